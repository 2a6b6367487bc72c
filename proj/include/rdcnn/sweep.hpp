#pragma once

#include <algorithm>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rdcnn/engine.hpp"
#include "rdcnn/frame.hpp"
#include "rdcnn/init.hpp"

namespace rdcnn {

enum class Regime { Homogeneous, Patterned, Growing, BlowUp };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Homogeneous: return "Homogeneous";
    case Regime::Patterned: return "Patterned";
    case Regime::Growing: return "Growing";
    case Regime::BlowUp: return "BlowUp";
  }
  return "?";
}

/// Classifier thresholds. These are configuration, not constants: the
/// defaults were calibrated once against the three named diffusion-plane
/// regimes and then frozen.
struct ClassifierConfig {
  double homogeneity_rel = 0.01;    // final range vs global dynamic range
  double homogeneity_floor = 0.01;  // absolute floor on the range threshold
  double activity_rel = 0.1;        // activity threshold vs final range
  double growth_factor = 10.0;      // final/initial active count for Growing
  double dip_tolerance = 0.10;      // tolerated fractional dip per interval
};

struct RegimeResult {
  Regime label = Regime::Patterned;
  double final_range = 0;
  double final_active_fraction = 0;
  std::vector<long> activity_counts;  // one entry per snapshot frame
};

/// Per-frame count of cells whose u deviates from the frame's spatial
/// median by more than `threshold`.
template <class T>
std::vector<long> growth_curve(const SnapshotBuffer<T>& snaps, double threshold) {
  std::vector<long> counts;
  counts.reserve(snaps.frame_count());
  std::vector<T> sorted;
  for (const auto& frame : snaps.frames_u) {
    sorted = frame;
    auto mid = sorted.begin() + sorted.size() / 2;
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double median = double(*mid);
    long n = 0;
    for (T x : frame)
      if (std::abs(double(x) - median) > threshold) ++n;
    counts.push_back(n);
  }
  return counts;
}

/// Regime heuristic over a completed run's snapshots:
///  - Homogeneous: final u range below the homogeneity threshold.
///  - Growing: active-cell counts rise (tolerating small dips) and the final
///    count exceeds growth_factor times the initial count.
///  - Patterned: everything else.
/// Thresholds are range-relative, so the labels are invariant under positive
/// affine rescaling of the values (up to the absolute floor).
template <class T>
RegimeResult classify_outcome(const SnapshotBuffer<T>& snaps,
                              const ClassifierConfig& cc = {}) {
  RegimeResult res;
  const auto& final_u = snaps.frames_u.back();
  auto [fmn, fmx] = std::minmax_element(final_u.begin(), final_u.end());
  res.final_range = double(*fmx) - double(*fmn);

  double gmin = double(*fmn), gmax = double(*fmx);
  for (const auto& frame : snaps.frames_u) {
    auto [mn, mx] = std::minmax_element(frame.begin(), frame.end());
    gmin = std::min(gmin, double(*mn));
    gmax = std::max(gmax, double(*mx));
  }
  const double global_range = gmax - gmin;

  const double homog_threshold =
      std::max(cc.homogeneity_floor, cc.homogeneity_rel * global_range);
  if (res.final_range < homog_threshold) {
    res.label = Regime::Homogeneous;
    res.activity_counts = growth_curve(snaps, cc.activity_rel * res.final_range);
    res.final_active_fraction =
        double(res.activity_counts.back()) / double(final_u.size());
    return res;
  }

  res.activity_counts = growth_curve(snaps, cc.activity_rel * res.final_range);
  res.final_active_fraction =
      double(res.activity_counts.back()) / double(final_u.size());

  bool rising = true;
  for (size_t k = 0; k + 1 < res.activity_counts.size(); ++k)
    rising &= double(res.activity_counts[k + 1]) >=
              (1.0 - cc.dip_tolerance) * double(res.activity_counts[k]);
  const bool grew =
      res.activity_counts.back() >=
      std::max<long>(1, long(cc.growth_factor * double(res.activity_counts.front())));
  res.label = (rising && grew) ? Regime::Growing : Regime::Patterned;
  return res;
}

// ---------------------------------------------------------------------------
// Parameter-plane sweeps.
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::string x_param;
  std::vector<double> x_values;
  std::string y_param;
  std::vector<double> y_values;
  Gene base_gene;
  RunConfig base_config;
  bool keep_buffers = false;   // retain full snapshot buffers per cell
  bool per_cell_seed = false;  // seed + cell index instead of one shared seed
  bool parallel_cells = false;
  // Panel tiles normalize per-frame unless a fixed (lo, hi) range is given,
  // which makes gray levels comparable across cells.
  std::optional<std::pair<double, double>> fixed_range;
  ClassifierConfig classifier;
};

inline void validate_sweep_spec(const SweepSpec& spec) {
  if (!is_gene_field(spec.x_param))
    throw std::invalid_argument("unknown sweep parameter: " + spec.x_param);
  if (!is_gene_field(spec.y_param))
    throw std::invalid_argument("unknown sweep parameter: " + spec.y_param);
  if (spec.x_param == spec.y_param)
    throw std::invalid_argument("sweep axes must differ (both are " + spec.x_param + ")");
  if (spec.x_values.empty() || spec.y_values.empty())
    throw std::invalid_argument("sweep value lists must be non-empty");
}

template <class T>
struct SweepCell {
  double x_value = 0, y_value = 0;
  Gene gene;
  bool blew_up = false;
  long blowup_iteration = 0;
  RegimeResult outcome;
  uint64_t digest = 0;
  std::vector<T> final_u;  // final frame, kept for the panel
  std::optional<SnapshotBuffer<T>> buffer;
};

template <class T>
struct SweepResult {
  std::vector<double> x_values, y_values;
  std::string x_param, y_param;
  int rows = 0, cols = 0;  // lattice dims of each cell
  std::vector<SweepCell<T>> cells;  // row-major: y outer, x inner
  Image8 panel;
  std::string labels_csv;

  const SweepCell<T>& at(size_t yi, size_t xi) const {
    return cells[yi * x_values.size() + xi];
  }
};

namespace detail_sweep {

template <class T>
Image8 render_panel(const SweepResult<T>& res, const SweepSpec& spec) {
  const int tile_h = res.rows, tile_w = res.cols;
  const int nx = int(res.x_values.size()), ny = int(res.y_values.size());
  const int scale = tile_w >= 192 ? 2 : 1;
  const int line_h = (font5x7::kHeight + 2) * scale;
  const int pad = 4 * scale;
  const int gap = 3 * scale;

  std::vector<std::string> ylabels, xlabels;
  int left = 0;
  for (double y : res.y_values) {
    ylabels.push_back(spec.y_param + "=" + format_double(y));
    left = std::max(left, text_width(ylabels.back(), scale));
  }
  for (double x : res.x_values) xlabels.push_back(spec.x_param + "=" + format_double(x));
  left += pad;

  const int width = pad + left + nx * tile_w + (nx - 1) * gap + pad;
  const int height = pad + line_h + ny * (tile_h + gap) - gap + pad;
  Image8 canvas{height, width, std::vector<uint8_t>(size_t(height) * width, 255)};

  for (int xi = 0; xi < nx; ++xi)
    draw_text(canvas, pad + left + xi * (tile_w + gap), pad, xlabels[xi], scale);
  for (int yi = 0; yi < ny; ++yi) {
    const int y0 = pad + line_h + yi * (tile_h + gap);
    draw_text(canvas, pad, y0 + tile_h / 2 - font5x7::kHeight * scale / 2,
              ylabels[yi], scale);
    for (int xi = 0; xi < nx; ++xi) {
      const int x0 = pad + left + xi * (tile_w + gap);
      const auto& cell = res.at(yi, xi);
      if (cell.blew_up) {
        // black tile with a white X
        for (int i = 0; i < tile_h; ++i)
          for (int j = 0; j < tile_w; ++j) {
            bool diag = std::abs(i * tile_w - j * tile_h) < tile_w ||
                        std::abs((tile_h - 1 - i) * tile_w - j * tile_h) < tile_w;
            canvas.px[size_t(y0 + i) * width + x0 + j] = diag ? 255 : 0;
          }
        continue;
      }
      Frame8 f = spec.fixed_range
                     ? normalize_frame_fixed(std::span<const T>(cell.final_u), tile_h,
                                             tile_w, spec.fixed_range->first,
                                             spec.fixed_range->second)
                     : normalize_frame(std::span<const T>(cell.final_u), tile_h, tile_w);
      for (int i = 0; i < tile_h; ++i)
        std::copy_n(f.px.begin() + size_t(i) * tile_w, tile_w,
                    canvas.px.begin() + size_t(y0 + i) * width + x0);
    }
  }
  return canvas;
}

template <class T>
std::string labels_csv(const SweepResult<T>& res) {
  std::ostringstream out;
  out << "x_value,y_value,label,final_range,final_active_fraction,checksum\n";
  for (size_t yi = 0; yi < res.y_values.size(); ++yi)
    for (size_t xi = 0; xi < res.x_values.size(); ++xi) {
      const auto& cell = res.at(yi, xi);
      out << format_double(cell.x_value) << ',' << format_double(cell.y_value) << ','
          << regime_name(cell.outcome.label) << ',';
      if (cell.blew_up) {
        out << ",,\n";
        continue;
      }
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", cell.outcome.final_range);
      out << buf << ',';
      std::snprintf(buf, sizeof(buf), "%.6g", cell.outcome.final_active_fraction);
      out << buf << ',' << checksum_hex(cell.digest) << '\n';
    }
  return out.str();
}

}  // namespace detail_sweep

/// Runs |x|*|y| independent simulations over the parameter plane. All cells
/// share one seed by default so differences are attributable to parameters;
/// blow-up cells are recorded, never fatal. Cell (row, col) of the panel
/// corresponds to (y_values[row], x_values[col]).
template <class T>
SweepResult<T> sweep_grid(const SweepSpec& spec) {
  validate_sweep_spec(spec);
  RunConfig base = spec.base_config;
  std::optional<GrayImage> image;
  {
    // Fail fast on anything that is not a per-cell blow-up: nothing else may
    // throw once cells run (possibly concurrently).
    auto issues = validate_config(base, spec.base_gene);
    if (!issues.empty()) throw std::invalid_argument(issues.front().message);
    if (base.iter_max % base.nssp != 0)
      throw ScheduleError("nssp must divide iter_max for sweep cells");
    if (base.init_mode == InitMode::Image) {
      image = load_grayscale(*base.image_path, base.image_size);
      base.nn = image->rows;  // the lattice adopts the image's dimensions
      base.nm = image->cols;
    }
    for (double y : spec.y_values)
      for (double x : spec.x_values) {
        Gene g = spec.base_gene;
        gene_field(g, spec.x_param) = x;
        gene_field(g, spec.y_param) = y;
        if (!gene_valid(g))
          throw std::invalid_argument("sweep cell gene invalid at " + spec.x_param +
                                      "=" + format_double(x) + " " + spec.y_param +
                                      "=" + format_double(y));
      }
  }
  SweepResult<T> res;
  res.x_values = spec.x_values;
  res.y_values = spec.y_values;
  res.x_param = spec.x_param;
  res.y_param = spec.y_param;
  res.rows = base.nn;
  res.cols = base.nm;
  const size_t total = spec.x_values.size() * spec.y_values.size();
  res.cells.resize(total);

#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) if (spec.parallel_cells)
#endif
  for (size_t idx = 0; idx < total; ++idx) {
    const size_t yi = idx / spec.x_values.size();
    const size_t xi = idx % spec.x_values.size();
    SweepCell<T>& cell = res.cells[idx];
    cell.x_value = spec.x_values[xi];
    cell.y_value = spec.y_values[yi];
    cell.gene = spec.base_gene;
    gene_field(cell.gene, spec.x_param) = cell.x_value;
    gene_field(cell.gene, spec.y_param) = cell.y_value;

    RunConfig cfg = base;
    if (spec.per_cell_seed) cfg.seed = base.seed + idx;
    try {
      auto out = run(cfg, cell.gene,
                     image ? init_from_image<T>(*image, cell.gene)
                           : initial_state<T>(cfg, cell.gene));
      cell.outcome = classify_outcome(out.snapshots, spec.classifier);
      cell.digest = checksum(out.final_state);
      cell.final_u = std::move(out.final_state.u);
      if (spec.keep_buffers) cell.buffer = std::move(out.snapshots);
    } catch (const BlowUpError& e) {
      cell.blew_up = true;
      cell.blowup_iteration = e.iteration;
      cell.outcome.label = Regime::BlowUp;
    }
  }

  res.panel = detail_sweep::render_panel(res, spec);
  res.labels_csv = detail_sweep::labels_csv(res);
  return res;
}

/// Writes panel.png, labels.csv and one cell_<x>_<y>.pgm final frame per
/// completed cell into `dir` (created if needed).
template <class T>
void write_sweep_outputs(const SweepResult<T>& res, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_png(dir + "/panel.png", res.panel);
  {
    std::ofstream f(dir + "/labels.csv", std::ios::trunc);
    if (!f) throw IoError("cannot write " + dir + "/labels.csv");
    f << res.labels_csv;
  }
  for (const auto& cell : res.cells) {
    if (cell.blew_up) continue;
    const std::string name = "cell_" + format_double(cell.x_value) + "_" +
                             format_double(cell.y_value) + ".pgm";
    write_pgm(dir + "/" + name,
              normalize_frame(std::span<const T>(cell.final_u), res.rows, res.cols)
                  .image());
  }
}

}  // namespace rdcnn
