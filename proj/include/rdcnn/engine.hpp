#pragma once

#include <chrono>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdcnn/config.hpp"
#include "rdcnn/kernels.hpp"

namespace rdcnn {

struct ScheduleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised at the first iteration whose result contains a non-finite entry.
struct BlowUpError : std::runtime_error {
  long iteration;
  explicit BlowUpError(long iter)
      : std::runtime_error("blow-up: non-finite state after iteration " +
                           std::to_string(iter)),
        iteration(iter) {}
};

/// The initial state plus nssp evenly spaced captures of both layers.
template <class T>
struct SnapshotBuffer {
  int rows = 0, cols = 0;
  std::vector<std::vector<T>> frames_u;
  std::vector<std::vector<T>> frames_v;
  std::vector<long> labels;  // completed-iteration count per frame; first is 0

  size_t frame_count() const { return labels.size(); }
};

template <class T>
struct RunOutput {
  GridState<T> final_state;
  SnapshotBuffer<T> snapshots;
  double wall_seconds = 0;                // around the step loop only
  std::vector<double> snapshot_elapsed;   // seconds at each capture after frame 0
};

/// Called as each snapshot is captured: (iteration label, elapsed seconds).
using SnapshotCallback = std::function<void(long, double)>;

/// Executes iter_max steps with snapshots after every iter_max/nssp
/// iterations. Frame 0 is the initial state; the final state is bit-identical
/// to the last frame. Throws ScheduleError when nssp does not divide
/// iter_max and BlowUpError at the first non-finite iteration.
template <class T>
RunOutput<T> run(const RunConfig& cfg, const Gene& gene, GridState<T> initial,
                 const SnapshotCallback& on_snapshot = {}) {
  if (initial.rows != cfg.nn || initial.cols != cfg.nm)
    throw std::invalid_argument("initial state shape does not match config");
  if (cfg.nssp < 1 || cfg.nssp > cfg.iter_max || cfg.iter_max % cfg.nssp != 0)
    throw ScheduleError("nssp (" + std::to_string(cfg.nssp) +
                        ") must divide iter_max (" + std::to_string(cfg.iter_max) + ")");
  const long test_mod = cfg.iter_max / cfg.nssp;

  RunOutput<T> out;
  auto& snaps = out.snapshots;
  snaps.rows = cfg.nn;
  snaps.cols = cfg.nm;
  snaps.frames_u.reserve(size_t(cfg.nssp) + 1);
  snaps.frames_v.reserve(size_t(cfg.nssp) + 1);
  snaps.frames_u.push_back(initial.u);
  snaps.frames_v.push_back(initial.v);
  snaps.labels.push_back(0);

  StepBuffers<T> bufs(std::move(initial));
  const FhnModel<T> model(gene);

  const auto t0 = std::chrono::steady_clock::now();
  for (long iter = 0; iter < cfg.iter_max; ++iter) {
    if (!step(bufs, model, cfg.backend)) throw BlowUpError(iter + 1);
    if ((iter + 1) % test_mod == 0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      snaps.frames_u.push_back(bufs.front.u);
      snaps.frames_v.push_back(bufs.front.v);
      snaps.labels.push_back(iter + 1);
      out.snapshot_elapsed.push_back(elapsed);
      if (on_snapshot) on_snapshot(iter + 1, elapsed);
    }
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.final_state = std::move(bufs.front);
  return out;
}

/// Bare timed loop used by the benchmark harness: no snapshot capture,
/// timing strictly around the iterations. Returns wall seconds.
template <class T>
double run_timed(StepBuffers<T>& bufs, const Gene& gene, const Backend& backend,
                 long iters) {
  const FhnModel<T> model(gene);
  const auto t0 = std::chrono::steady_clock::now();
  for (long iter = 0; iter < iters; ++iter)
    if (!step(bufs, model, backend)) throw BlowUpError(iter + 1);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace rdcnn
