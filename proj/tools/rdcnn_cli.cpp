// Command-line frontend: simulate / bench / sweep.
//
// Exit codes: 0 success, 1 flag or config validation error, 2 blow-up,
// 3 I/O error.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdcnn/bench.hpp"
#include "rdcnn/engine.hpp"
#include "rdcnn/frame.hpp"
#include "rdcnn/init.hpp"
#include "rdcnn/sweep.hpp"

namespace fs = std::filesystem;
using namespace rdcnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitBlowUp = 2;
constexpr int kExitIo = 3;

std::string default_out_dir() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", std::localtime(&now));
  return std::string("out/") + buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

struct AxisSpec {
  std::string param;
  std::vector<double> values;
};

AxisSpec parse_axis(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("axis spec must look like du:0.3,0.5 (got '" +
                                text + "')");
  AxisSpec axis;
  axis.param = text.substr(0, colon);
  for (const auto& tok : split(text.substr(colon + 1), ','))
    axis.values.push_back(std::stod(tok));
  return axis;
}

// Shared simulation flags; every field mirrors a get_init_state parameter or
// an artifact-specific knob.
struct SimFlags {
  int typ = 1;
  int size = 512;
  int rows = 0, cols = 0;  // override --size when both set
  std::string image;
  int image_size = 0;
  long iters = 10000;
  int nssp = 5;
  uint64_t seed = 1;
  std::string backend = "parallel";
  std::string precision = "single";
  int threads = 0;
  int tile_rows = 64, tile_cols = 64;
  Gene gene;
  std::string out_dir;
  std::string manifest_in;
  bool band_timing = false;
};

void add_gene_flags(CLI::App* cmd, Gene& g) {
  cmd->add_option("--a", g.a, "reaction offset a");
  cmd->add_option("--b", g.b, "recovery coupling b");
  cmd->add_option("--eps", g.eps, "recovery rate eps");
  cmd->add_option("--c", g.c, "activation gain c");
  cmd->add_option("--du", g.Du, "diffusion coefficient of u");
  cmd->add_option("--dv", g.Dv, "diffusion coefficient of v");
  cmd->add_option("--dt", g.dt, "integration step");
  cmd->add_option("--ka", g.ka, "input scaling for image initial states");
}

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--typ", f.typ, "init mode: 1=center square, 2=full random, 3=image")
      ->check(CLI::Range(1, 3));
  cmd->add_option("--size", f.size, "square lattice side N (N x N)");
  cmd->add_option("--rows", f.rows, "lattice rows (overrides --size with --cols)");
  cmd->add_option("--cols", f.cols, "lattice cols (overrides --size with --rows)");
  cmd->add_option("--image", f.image, "grayscale PGM/PNG initial state (typ=3)");
  cmd->add_option("--image-size", f.image_size,
                  "resample the image to this square size before use");
  cmd->add_option("--iters", f.iters, "iteration count");
  cmd->add_option("--nssp", f.nssp, "snapshot count (must divide --iters)");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--backend", f.backend, "reference|shift|blocked|parallel");
  cmd->add_option("--precision", f.precision, "single|double");
  cmd->add_option("--threads", f.threads, "parallel backend worker count (0 = auto)");
  cmd->add_option("--tile-rows", f.tile_rows, "blocked backend tile rows");
  cmd->add_option("--tile-cols", f.tile_cols, "blocked backend tile cols");
  cmd->add_option("--out", f.out_dir, "output directory (default out/<timestamp>)");
  add_gene_flags(cmd, f.gene);
}

std::pair<Gene, RunConfig> to_config(const SimFlags& f) {
  Gene g = f.gene;
  RunConfig cfg;
  cfg.init_mode = parse_init_mode(f.typ);
  cfg.nn = f.rows > 0 ? f.rows : f.size;
  cfg.nm = f.cols > 0 ? f.cols : f.size;
  if (!f.image.empty()) cfg.image_path = f.image;
  if (f.image_size > 0) cfg.image_size = f.image_size;
  cfg.iter_max = f.iters;
  cfg.nssp = f.nssp;
  cfg.seed = f.seed;
  cfg.backend = make_backend(f.backend, f.tile_rows, f.tile_cols, f.threads);
  cfg.precision = parse_precision(f.precision);
  return {g, cfg};
}

int report_validation(const std::vector<ConfigIssue>& issues) {
  for (const auto& issue : issues)
    std::cerr << "error [" << config_error_name(issue.kind) << "]: "
              << issue.message << "\n";
  return kExitInvalid;
}

template <class T>
int simulate_run(const Gene& gene, RunConfig cfg, const std::string& out_dir,
                 bool band_timing) {
  GridState<T> initial;
  try {
    initial = initial_state<T>(cfg, gene);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  // image-mode grids adopt the image's dimensions
  cfg.nn = initial.rows;
  cfg.nm = initial.cols;

  try {
    fs::create_directories(out_dir);
    write_manifest(out_dir + "/manifest.txt", gene, cfg);  // before any result
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  std::printf("FHN Calculation: %d x %d mesh\n", cfg.nn, cfg.nm);
  RunOutput<T> out;
  try {
    out = run(cfg, gene, std::move(initial), [](long label, double elapsed) {
      std::printf("%ld, (elapsed: %f s)\n", label - 1, elapsed);
    });
  } catch (const BlowUpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const ScheduleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  auto tp = throughput(cfg.nn, cfg.nm, cfg.iter_max, out.wall_seconds);
  Frame8 final_u = normalize_frame(std::span<const T>(out.final_state.u), cfg.nn, cfg.nm);
  std::printf("total: %f s\n", out.wall_seconds);
  std::printf("=====\n");
  std::printf("per cell time: %s nano-seconds\n",
              format_double(tp.ns_per_cell_iter).c_str());
  std::printf("speed: %s Mega cells/second\n",
              format_double(tp.mcells_per_s).c_str());
  std::printf("max-min= %f\n", final_u.hi - final_u.lo);
  std::printf("checksum= %s\n", checksum_hex(checksum(out.final_state)).c_str());
  std::printf("=====\n");

  try {
    std::optional<MontageTiming> timing;
    if (band_timing)
      timing = MontageTiming{out.wall_seconds, tp.ns_per_cell_iter, tp.mcells_per_s};
    render_montage(out.snapshots, gene, cfg, backend_name(cfg.backend),
                   out_dir + "/montage.png", timing);
    save_frame(out.final_state.u, cfg.nn, cfg.nm, out_dir + "/final_u.pgm");
    save_frame(out.final_state.v, cfg.nn, cfg.nm, out_dir + "/final_v.pgm");
    save_frame(out.final_state.u, cfg.nn, cfg.nm, out_dir + "/final_u.png");
    save_frame(out.final_state.v, cfg.nn, cfg.nm, out_dir + "/final_v.png");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_simulate(SimFlags& flags) {
  Gene gene;
  RunConfig cfg;
  try {
    if (!flags.manifest_in.empty()) {
      std::tie(gene, cfg) = read_manifest(flags.manifest_in);
      cfg.backend.tile_rows = flags.tile_rows;
      cfg.backend.tile_cols = flags.tile_cols;
      cfg.backend.threads = flags.threads;
    } else {
      std::tie(gene, cfg) = to_config(flags);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  auto issues = validate_config(cfg, gene);
  if (!issues.empty()) return report_validation(issues);
  if (stability_advisory(gene))
    std::cerr << "advisory: dt*max(Du,Dv) = "
              << format_double(gene.dt * std::max(gene.Du, gene.Dv))
              << " exceeds 0.25; explicit Euler may be unstable\n";

  const std::string out_dir = flags.out_dir.empty() ? default_out_dir() : flags.out_dir;
  return cfg.precision == Precision::Single
             ? simulate_run<float>(gene, cfg, out_dir, flags.band_timing)
             : simulate_run<double>(gene, cfg, out_dir, flags.band_timing);
}

struct BenchFlags {
  std::string backends = "reference,shift,blocked,parallel";
  std::string sizes = "128,256,512,1024,2048,4096";
  long iters = 10000;
  int reps = 3;
  uint64_t seed = 42;
  std::string precision = "single";
  std::string hardware = "cpu";
  int threads = 0;
  int tile_rows = 64, tile_cols = 64;
  bool json = false;
  Gene gene;
  std::string out_dir;
};

int cmd_bench(BenchFlags& flags) {
  if (stability_advisory(flags.gene))
    std::cerr << "advisory: dt*max(Du,Dv) = "
              << format_double(flags.gene.dt * std::max(flags.gene.Du, flags.gene.Dv))
              << " exceeds 0.25; explicit Euler may be unstable\n";
  std::vector<Backend> backends;
  std::vector<int> sizes;
  std::vector<BenchRecord> records;
  try {
    for (const auto& name : split(flags.backends, ','))
      backends.push_back(
          make_backend(name, flags.tile_rows, flags.tile_cols, flags.threads));
    for (const auto& tok : split(flags.sizes, ',')) sizes.push_back(std::stoi(tok));
    if (backends.empty() || sizes.empty())
      throw std::invalid_argument("need at least one backend and one size");
    records = bench_suite(backends, sizes, flags.iters, flags.gene, flags.seed,
                          parse_precision(flags.precision), flags.reps,
                          flags.hardware);
  } catch (const BenchCellError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  std::cout << emit_table(records);
  const std::string out_dir = flags.out_dir.empty() ? default_out_dir() : flags.out_dir;
  try {
    fs::create_directories(out_dir);
    // workload manifest: gene, seed and the first cell's shape
    RunConfig base;
    base.init_mode = InitMode::CenterSquare;
    base.nn = base.nm = sizes.front();
    base.iter_max = flags.iters;
    base.nssp = 1;
    base.seed = flags.seed;
    base.backend = backends.front();
    base.precision = parse_precision(flags.precision);
    write_manifest(out_dir + "/manifest.txt", flags.gene, base);
    std::ofstream csv(out_dir + "/bench.csv", std::ios::trunc);
    csv << emit_csv(records);
    if (flags.json) {
      std::ofstream json(out_dir + "/bench.json", std::ios::trunc);
      json << emit_json(records);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

struct SweepFlags {
  std::string x_axis;
  std::string y_axis;
  std::string fixed_range;  // "lo:hi" panel normalization
  SimFlags sim;
  bool per_cell_seed = false;
  bool parallel_cells = false;
  ClassifierConfig classifier;
};

template <class T>
int sweep_run(const SweepSpec& spec, const std::string& out_dir) {
  auto result = sweep_grid<T>(spec);
  write_sweep_outputs(result, out_dir);
  for (size_t yi = 0; yi < result.y_values.size(); ++yi)
    for (size_t xi = 0; xi < result.x_values.size(); ++xi) {
      const auto& cell = result.at(yi, xi);
      std::printf("%s=%s %s=%s -> %s\n", spec.x_param.c_str(),
                  format_double(cell.x_value).c_str(), spec.y_param.c_str(),
                  format_double(cell.y_value).c_str(),
                  regime_name(cell.outcome.label));
    }
  std::printf("wrote %s/panel.png, labels.csv and %zu cell frames\n",
              out_dir.c_str(), result.cells.size());
  return kExitOk;
}

int cmd_sweep(SweepFlags& flags) {
  SweepSpec spec;
  try {
    // Without explicit axes, explore the (a,b) plane around the defaults.
    if (flags.x_axis.empty() && flags.y_axis.empty()) {
      flags.x_axis = "a:-0.5,-0.4,-0.3,-0.2,-0.1,0,0.1";
      flags.y_axis = "b:0.9,1.1,1.3,1.5,1.7";
    }
    if (flags.x_axis.empty() || flags.y_axis.empty())
      throw std::invalid_argument("--x and --y must be given together");
    AxisSpec x = parse_axis(flags.x_axis);
    AxisSpec y = parse_axis(flags.y_axis);
    spec.x_param = x.param;
    spec.x_values = x.values;
    spec.y_param = y.param;
    spec.y_values = y.values;
    auto [gene, cfg] = to_config(flags.sim);
    spec.base_gene = gene;
    spec.base_config = cfg;
    spec.per_cell_seed = flags.per_cell_seed;
    spec.parallel_cells = flags.parallel_cells;
    spec.classifier = flags.classifier;
    if (!flags.fixed_range.empty()) {
      auto colon = flags.fixed_range.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("--range must look like lo:hi");
      spec.fixed_range = {std::stod(flags.fixed_range.substr(0, colon)),
                          std::stod(flags.fixed_range.substr(colon + 1))};
    }
    validate_sweep_spec(spec);
    auto issues = validate_config(spec.base_config, spec.base_gene);
    if (!issues.empty()) return report_validation(issues);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  bool advisory = false;
  for (double y : spec.y_values)
    for (double x : spec.x_values) {
      Gene g = spec.base_gene;
      gene_field(g, spec.x_param) = x;
      gene_field(g, spec.y_param) = y;
      advisory |= stability_advisory(g);
    }
  if (advisory)
    std::cerr << "advisory: some sweep cells exceed dt*max(Du,Dv) = 0.25\n";

  const std::string out_dir =
      flags.sim.out_dir.empty() ? default_out_dir() : flags.sim.out_dir;
  try {
    fs::create_directories(out_dir);
    write_manifest(out_dir + "/manifest.txt", spec.base_gene, spec.base_config);
    return spec.base_config.precision == Precision::Single
               ? sweep_run<float>(spec, out_dir)
               : sweep_run<double>(spec, out_dir);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-layer FitzHugh-Nagumo reaction-diffusion lattice simulator"};
  app.require_subcommand(1);

  SimFlags sim;
  auto* simulate = app.add_subcommand("simulate", "run one simulation");
  add_sim_flags(simulate, sim);
  simulate->add_option("--manifest", sim.manifest_in,
                       "replay a run from its manifest file");
  simulate->add_flag("--band-timing", sim.band_timing,
                     "embed measured timing in the montage caption band");

  BenchFlags bench;
  auto* benchcmd = app.add_subcommand("bench", "benchmark backends across sizes");
  benchcmd->add_option("--backends", bench.backends, "comma-separated backend list");
  benchcmd->add_option("--sizes", bench.sizes, "comma-separated square sizes");
  benchcmd->add_option("--iters", bench.iters, "iterations per cell");
  benchcmd->add_option("--reps", bench.reps, "timed repetitions (median reported)");
  benchcmd->add_option("--seed", bench.seed, "RNG seed for the typ=1 workload");
  benchcmd->add_option("--precision", bench.precision, "single|double");
  benchcmd->add_option("--hardware", bench.hardware, "hardware label for the report");
  benchcmd->add_option("--threads", bench.threads, "parallel backend workers");
  benchcmd->add_option("--tile-rows", bench.tile_rows, "blocked tile rows");
  benchcmd->add_option("--tile-cols", bench.tile_cols, "blocked tile cols");
  benchcmd->add_option("--out", bench.out_dir, "output directory");
  benchcmd->add_flag("--json", bench.json, "also write bench.json");
  add_gene_flags(benchcmd, bench.gene);

  SweepFlags sweep;
  auto* sweepcmd = app.add_subcommand("sweep", "explore a two-parameter plane");
  sweepcmd->add_option("--x", sweep.x_axis,
                       "x axis, e.g. du:0.3,0.5,0.7 (default: a plane around the "
                       "stock gene)");
  sweepcmd->add_option("--y", sweep.y_axis, "y axis, e.g. dv:0.8,1.0");
  add_sim_flags(sweepcmd, sweep.sim);
  sweepcmd->add_option("--range", sweep.fixed_range,
                       "fixed lo:hi panel normalization for cross-cell comparability");
  sweepcmd->add_flag("--per-cell-seed", sweep.per_cell_seed,
                     "derive a distinct seed per sweep cell");
  sweepcmd->add_flag("--parallel-cells", sweep.parallel_cells,
                     "run sweep cells concurrently (do not combine with timing)");
  sweepcmd->add_option("--homogeneity-rel", sweep.classifier.homogeneity_rel,
                       "homogeneous if final range < rel * global range");
  sweepcmd->add_option("--homogeneity-floor", sweep.classifier.homogeneity_floor,
                       "absolute floor of the homogeneity threshold");
  sweepcmd->add_option("--activity-rel", sweep.classifier.activity_rel,
                       "active-cell threshold as a fraction of final range");
  sweepcmd->add_option("--growth-factor", sweep.classifier.growth_factor,
                       "final/initial activity ratio required for Growing");
  sweepcmd->add_option("--dip-tolerance", sweep.classifier.dip_tolerance,
                       "tolerated fractional dip in the activity curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (simulate->parsed()) return cmd_simulate(sim);
  if (benchcmd->parsed()) return cmd_bench(bench);
  if (sweepcmd->parsed()) return cmd_sweep(sweep);
  return kExitInvalid;
}
