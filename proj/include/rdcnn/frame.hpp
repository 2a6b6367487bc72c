#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdcnn/config.hpp"
#include "rdcnn/engine.hpp"
#include "rdcnn/font5x7.hpp"
#include "rdcnn/image.hpp"

namespace rdcnn {

/// 8-bit view of one layer plus the source range used for normalization.
struct Frame8 {
  int rows = 0, cols = 0;
  std::vector<uint8_t> px;
  double lo = 0, hi = 0;  // source min/max

  Image8 image() const { return Image8{rows, cols, px}; }
};

/// Per-frame min-max affine map onto 0..255; a degenerate range renders as
/// mid-gray 128. The recorded (lo, hi) feeds the "max-min" report.
template <class T>
Frame8 normalize_frame(std::span<const T> layer, int rows, int cols) {
  Frame8 f{rows, cols, std::vector<uint8_t>(layer.size()), 0, 0};
  auto [mn, mx] = std::minmax_element(layer.begin(), layer.end());
  f.lo = double(*mn);
  f.hi = double(*mx);
  if (f.hi > f.lo) {
    const double scale = 255.0 / (f.hi - f.lo);
    for (size_t k = 0; k < layer.size(); ++k) {
      long p = std::lround((double(layer[k]) - f.lo) * scale);
      f.px[k] = uint8_t(std::clamp(p, 0l, 255l));
    }
  } else {
    std::fill(f.px.begin(), f.px.end(), uint8_t(128));
  }
  return f;
}

template <class T>
Frame8 normalize_frame(const std::vector<T>& layer, int rows, int cols) {
  return normalize_frame(std::span<const T>(layer), rows, cols);
}

/// Fixed-range variant for cross-frame comparability; values clamp.
template <class T>
Frame8 normalize_frame_fixed(std::span<const T> layer, int rows, int cols,
                             double lo, double hi) {
  Frame8 f{rows, cols, std::vector<uint8_t>(layer.size()), lo, hi};
  if (hi > lo) {
    const double scale = 255.0 / (hi - lo);
    for (size_t k = 0; k < layer.size(); ++k) {
      long p = std::lround((double(layer[k]) - lo) * scale);
      f.px[k] = uint8_t(std::clamp(p, 0l, 255l));
    }
  } else {
    std::fill(f.px.begin(), f.px.end(), uint8_t(128));
  }
  return f;
}

/// Writes by extension: .pgm for the bit-exact golden format, .png otherwise.
inline void write_image(const std::string& path, const Image8& img) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
    write_pgm(path, img);
  else
    write_png(path, img);
}

template <class T>
void save_frame(std::span<const T> layer, int rows, int cols,
                const std::string& path) {
  write_image(path, normalize_frame(layer, rows, cols).image());
}

template <class T>
void save_frame(const std::vector<T>& layer, int rows, int cols,
                const std::string& path) {
  save_frame(std::span<const T>(layer), rows, cols, path);
}

// ---------------------------------------------------------------------------
// Text drawing on Image8 canvases.
// ---------------------------------------------------------------------------

inline void draw_text(Image8& canvas, int x, int y, const std::string& text,
                      int scale = 1, uint8_t color = 0) {
  int cx = x;
  for (char ch : text) {
    const auto& g = font5x7::glyph(ch);
    for (int r = 0; r < font5x7::kHeight; ++r)
      for (int c = 0; c < font5x7::kWidth; ++c) {
        if (g.rows[r][c] != '#') continue;
        for (int dy = 0; dy < scale; ++dy)
          for (int dx = 0; dx < scale; ++dx) {
            int py = y + r * scale + dy;
            int px = cx + c * scale + dx;
            if (py >= 0 && py < canvas.rows && px >= 0 && px < canvas.cols)
              canvas.px[size_t(py) * canvas.cols + px] = color;
          }
      }
    cx += font5x7::kAdvance * scale;
  }
}

inline int text_width(const std::string& text, int scale = 1) {
  return int(text.size()) * font5x7::kAdvance * scale;
}

// ---------------------------------------------------------------------------
// Montage: two rows of frames (u above v), columns ordered by iteration
// label, topped by a caption band with the full parameter list.
// ---------------------------------------------------------------------------

struct MontageTiming {
  double wall_seconds = 0;
  double ns_per_cell_iter = 0;
  double mcells_per_s = 0;
};

namespace detail {

inline std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

inline std::string sig5(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", x);
  return buf;
}

}  // namespace detail

/// Deterministic montage layout for a given tile size and column count. The
/// caption band can only widen the canvas beyond `width`, never move tiles.
struct MontageGeometry {
  int scale = 1, pad = 0, gap = 0, left = 0;
  int tile_h = 0, tile_w = 0, columns = 0;
  int labels_y = 0, row_u = 0, row_v = 0, tiles_x0 = 0;
  int width = 0, height = 0;

  int tile_x(int col) const { return tiles_x0 + col * (tile_w + gap); }
};

inline MontageGeometry montage_geometry(int tile_h, int tile_w, int ncol) {
  MontageGeometry g;
  g.tile_h = tile_h;
  g.tile_w = tile_w;
  g.columns = ncol;
  g.scale = tile_w >= 192 ? 2 : 1;
  const int line_h = (font5x7::kHeight + 2) * g.scale;
  g.pad = 4 * g.scale;
  g.gap = 3 * g.scale;
  g.left = (font5x7::kAdvance + 3) * g.scale;  // "u"/"v" row tags
  const int header_h = g.pad + 3 * line_h;
  g.labels_y = header_h;
  g.row_u = header_h + line_h;
  g.row_v = g.row_u + tile_h + g.gap;
  g.tiles_x0 = g.pad + g.left;
  g.width = g.tiles_x0 + ncol * tile_w + (ncol - 1) * g.gap + g.pad;
  g.height = g.row_v + tile_h + 2 * g.pad;
  return g;
}

template <class T>
Image8 make_montage(const SnapshotBuffer<T>& snaps, const Gene& gene,
                    const RunConfig& cfg, const std::string& backend_label,
                    const std::optional<MontageTiming>& timing = {}) {
  const int ncol = int(snaps.frame_count());
  const int tile_h = snaps.rows, tile_w = snaps.cols;
  const MontageGeometry geom = montage_geometry(tile_h, tile_w, ncol);
  const int scale = geom.scale;
  const int line_h = (font5x7::kHeight + 2) * scale;
  const int pad = geom.pad;
  const int gap = geom.gap;

  Frame8 final_u = normalize_frame(std::span<const T>(snaps.frames_u.back()),
                                   tile_h, tile_w);
  std::string line1 = "a=" + format_double(gene.a) + " b=" + format_double(gene.b) +
                      " eps=" + format_double(gene.eps) + " c=" + format_double(gene.c) +
                      " du=" + format_double(gene.Du) + " dv=" + format_double(gene.Dv) +
                      " dt=" + format_double(gene.dt) + " ka=" + format_double(gene.ka);
  std::string line2 = "typ=" + std::to_string(int(cfg.init_mode)) + " " +
                      std::to_string(cfg.nn) + "x" + std::to_string(cfg.nm) +
                      " iters=" + std::to_string(cfg.iter_max) +
                      " nssp=" + std::to_string(cfg.nssp) +
                      " seed=" + std::to_string(cfg.seed) +
                      " precision=" + precision_name(cfg.precision);
  std::string line3 = "simulator: " + backend_label +
                      "  max-min= " + detail::fixed6(final_u.hi - final_u.lo);
  if (timing)
    line3 += "  total: " + detail::fixed6(timing->wall_seconds) +
             " s  per cell: " + detail::sig5(timing->ns_per_cell_iter) +
             " ns  speed: " + detail::sig5(timing->mcells_per_s) + " mcells/s";

  const int width = std::max(
      geom.width,
      pad + std::max({text_width(line1, scale), text_width(line2, scale),
                      text_width(line3, scale)}) +
          pad);
  const int height = geom.height;

  Image8 canvas{height, width, std::vector<uint8_t>(size_t(height) * width, 255)};
  draw_text(canvas, pad, pad, line1, scale);
  draw_text(canvas, pad, pad + line_h, line2, scale);
  draw_text(canvas, pad, pad + 2 * line_h, line3, scale);

  const int tiles_x = geom.tiles_x0;
  const int labels_y = geom.labels_y;
  const int row_u = geom.row_u;
  const int row_v = geom.row_v;
  draw_text(canvas, pad, row_u + tile_h / 2 - font5x7::kHeight * scale / 2, "u", scale);
  draw_text(canvas, pad, row_v + tile_h / 2 - font5x7::kHeight * scale / 2, "v", scale);

  for (int col = 0; col < ncol; ++col) {
    const int x0 = tiles_x + col * (tile_w + gap);
    draw_text(canvas, x0, labels_y, std::to_string(snaps.labels[col]), scale);
    Frame8 fu = normalize_frame(std::span<const T>(snaps.frames_u[col]), tile_h, tile_w);
    Frame8 fv = normalize_frame(std::span<const T>(snaps.frames_v[col]), tile_h, tile_w);
    for (int i = 0; i < tile_h; ++i) {
      std::copy_n(fu.px.begin() + size_t(i) * tile_w, tile_w,
                  canvas.px.begin() + size_t(row_u + i) * width + x0);
      std::copy_n(fv.px.begin() + size_t(i) * tile_w, tile_w,
                  canvas.px.begin() + size_t(row_v + i) * width + x0);
    }
  }
  return canvas;
}

/// Renders the montage and writes it to out_path (.png unless .pgm given).
template <class T>
void render_montage(const SnapshotBuffer<T>& snaps, const Gene& gene,
                    const RunConfig& cfg, const std::string& backend_label,
                    const std::string& out_path,
                    const std::optional<MontageTiming>& timing = {}) {
  write_image(out_path, make_montage(snaps, gene, cfg, backend_label, timing));
}

}  // namespace rdcnn
