#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdcnn/backend.hpp"
#include "rdcnn/gene.hpp"
#include "rdcnn/grid.hpp"

namespace rdcnn {

/// typ=1: random 11x11 square centered in a zero grid.
/// typ=2: every cell random.
/// typ=3: both layers set to ka * image.
enum class InitMode : int { CenterSquare = 1, FullRandom = 2, Image = 3 };

inline InitMode parse_init_mode(int typ) {
  if (typ < 1 || typ > 3) throw std::invalid_argument("typ must be 1, 2 or 3");
  return InitMode(typ);
}

struct RunConfig {
  InitMode init_mode = InitMode::CenterSquare;
  int nn = 512;                     // rows
  int nm = 512;                     // cols
  std::optional<std::string> image_path;  // required iff init_mode == Image
  std::optional<int> image_size;    // optional square resample of the image
  long iter_max = 10000;
  int nssp = 5;                     // snapshots after the initial frame
  uint64_t seed = 1;
  Backend backend;
  Precision precision = Precision::Single;
};

enum class ConfigErrorKind { InvalidSize, InvalidSchedule, MissingImage, NonFiniteGene };

struct ConfigIssue {
  ConfigErrorKind kind;
  std::string message;
};

inline const char* config_error_name(ConfigErrorKind k) {
  switch (k) {
    case ConfigErrorKind::InvalidSize: return "InvalidSize";
    case ConfigErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ConfigErrorKind::MissingImage: return "MissingImage";
    case ConfigErrorKind::NonFiniteGene: return "NonFiniteGene";
  }
  return "?";
}

/// Checks every invariant and reports all violations, not just the first.
/// An empty result means the (config, gene) pair is runnable as-is.
inline std::vector<ConfigIssue> validate_config(const RunConfig& cfg, const Gene& gene) {
  std::vector<ConfigIssue> issues;
  auto add = [&](ConfigErrorKind k, std::string msg) {
    issues.push_back({k, std::move(msg)});
  };

  if (cfg.nn < 3 || cfg.nm < 3)
    add(ConfigErrorKind::InvalidSize, "grid must be at least 3x3, got " +
                                          std::to_string(cfg.nn) + "x" +
                                          std::to_string(cfg.nm));
  if (cfg.init_mode == InitMode::CenterSquare && (cfg.nn < 11 || cfg.nm < 11))
    add(ConfigErrorKind::InvalidSize,
        "typ=1 needs room for the 11x11 seed square, got " +
            std::to_string(cfg.nn) + "x" + std::to_string(cfg.nm));
  if (cfg.iter_max < 1)
    add(ConfigErrorKind::InvalidSchedule,
        "iter_max must be >= 1, got " + std::to_string(cfg.iter_max));
  if (cfg.nssp < 1 || cfg.nssp > cfg.iter_max)
    add(ConfigErrorKind::InvalidSchedule,
        "nssp must satisfy 1 <= nssp <= iter_max, got nssp=" +
            std::to_string(cfg.nssp) + " iter_max=" + std::to_string(cfg.iter_max));
  else if (cfg.iter_max >= 1 && cfg.iter_max % cfg.nssp != 0)
    add(ConfigErrorKind::InvalidSchedule,
        "nssp (" + std::to_string(cfg.nssp) + ") must divide iter_max (" +
            std::to_string(cfg.iter_max) + ")");
  if (cfg.init_mode == InitMode::Image && !cfg.image_path)
    add(ConfigErrorKind::MissingImage, "typ=3 requires an image path");
  if (!gene_finite(gene))
    add(ConfigErrorKind::NonFiniteGene, "gene has non-finite fields");
  else if (!gene_valid(gene))
    add(ConfigErrorKind::NonFiniteGene,
        "gene invariant violated (need dt >= 0, Du >= 0, Dv >= 0)");
  return issues;
}

// ---------------------------------------------------------------------------
// Run manifest: one `key = value` per line, written alongside every
// simulation output so the identical run can be replayed.
// ---------------------------------------------------------------------------

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string manifest_text(const Gene& g, const RunConfig& cfg) {
  std::ostringstream out;
  out << "a = " << format_double(g.a) << "\n";
  out << "b = " << format_double(g.b) << "\n";
  out << "eps = " << format_double(g.eps) << "\n";
  out << "c = " << format_double(g.c) << "\n";
  out << "du = " << format_double(g.Du) << "\n";
  out << "dv = " << format_double(g.Dv) << "\n";
  out << "dt = " << format_double(g.dt) << "\n";
  out << "ka = " << format_double(g.ka) << "\n";
  out << "typ = " << int(cfg.init_mode) << "\n";
  out << "nn = " << cfg.nn << "\n";
  out << "nm = " << cfg.nm << "\n";
  out << "iter_max = " << cfg.iter_max << "\n";
  out << "nssp = " << cfg.nssp << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "backend = " << backend_name(cfg.backend) << "\n";
  out << "precision = " << precision_name(cfg.precision) << "\n";
  // Extra keys, emitted only for image runs: replay needs the source file
  // and the resample size actually applied.
  if (cfg.init_mode == InitMode::Image && cfg.image_path)
    out << "image = " << *cfg.image_path << "\n";
  if (cfg.init_mode == InitMode::Image && cfg.image_size)
    out << "image_size = " << *cfg.image_size << "\n";
  return out.str();
}

inline void write_manifest(const std::string& path, const Gene& g, const RunConfig& cfg) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write manifest " + path);
  f << manifest_text(g, cfg);
}

inline std::pair<Gene, RunConfig> parse_manifest(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("manifest line without '=': " + line);
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("manifest missing key: " + key);
    return it->second;
  };
  Gene g;
  g.a = std::stod(need("a"));
  g.b = std::stod(need("b"));
  g.eps = std::stod(need("eps"));
  g.c = std::stod(need("c"));
  g.Du = std::stod(need("du"));
  g.Dv = std::stod(need("dv"));
  g.dt = std::stod(need("dt"));
  g.ka = std::stod(need("ka"));
  RunConfig cfg;
  cfg.init_mode = parse_init_mode(std::stoi(need("typ")));
  cfg.nn = std::stoi(need("nn"));
  cfg.nm = std::stoi(need("nm"));
  cfg.iter_max = std::stol(need("iter_max"));
  cfg.nssp = std::stoi(need("nssp"));
  cfg.seed = std::stoull(need("seed"));
  cfg.backend.kind = parse_backend_kind(need("backend"));
  cfg.precision = parse_precision(need("precision"));
  if (auto it = kv.find("image"); it != kv.end()) cfg.image_path = it->second;
  if (auto it = kv.find("image_size"); it != kv.end())
    cfg.image_size = std::stoi(it->second);
  return {g, cfg};
}

inline std::pair<Gene, RunConfig> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read manifest " + path);
  return parse_manifest(f);
}

}  // namespace rdcnn
