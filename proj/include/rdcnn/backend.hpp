#pragma once

#include <stdexcept>
#include <string>

namespace rdcnn {

/// Interchangeable CPU time-stepping strategies. All of them advance the
/// same model; reference, blocked and parallel evaluate the canonical
/// per-cell expression and agree bit-exactly, shift regroups whole-array
/// sums and agrees within tolerance.
enum class BackendKind { Reference, Shift, Blocked, Parallel };

struct Backend {
  BackendKind kind = BackendKind::Reference;
  int tile_rows = 64;  // blocked backend tile height
  int tile_cols = 64;  // blocked backend tile width
  int threads = 0;     // parallel backend worker count; 0 = hardware default

  bool exact_order() const { return kind != BackendKind::Shift; }
};

inline const char* backend_name(BackendKind k) {
  switch (k) {
    case BackendKind::Reference: return "reference";
    case BackendKind::Shift: return "shift";
    case BackendKind::Blocked: return "blocked";
    case BackendKind::Parallel: return "parallel";
  }
  return "?";
}

inline const char* backend_name(const Backend& b) { return backend_name(b.kind); }

inline BackendKind parse_backend_kind(const std::string& s) {
  if (s == "reference") return BackendKind::Reference;
  if (s == "shift") return BackendKind::Shift;
  if (s == "blocked") return BackendKind::Blocked;
  if (s == "parallel") return BackendKind::Parallel;
  throw std::invalid_argument("unknown backend: " + s +
                              " (expected reference|shift|blocked|parallel)");
}

inline Backend make_backend(const std::string& name, int tile_rows = 64,
                            int tile_cols = 64, int threads = 0) {
  if (tile_rows < 1 || tile_cols < 1)
    throw std::invalid_argument("tile dimensions must be >= 1");
  if (threads < 0) throw std::invalid_argument("thread count must be >= 0");
  return Backend{parse_backend_kind(name), tile_rows, tile_cols, threads};
}

}  // namespace rdcnn
