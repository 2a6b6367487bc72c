#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "rdcnn/engine.hpp"
#include "rdcnn/init.hpp"

#include "json.hpp"

namespace rdcnn {

struct ZeroDuration : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Throughput {
  double mcells_per_s = 0;
  double ns_per_cell_iter = 0;
};

/// Converts a wall-time measurement into the two reciprocal rate metrics:
/// mcells = NN*NM*iters / (seconds*1e6), ns = seconds*1e9 / (NN*NM*iters).
inline Throughput throughput(long nn, long nm, long iter_max, double seconds) {
  if (!(seconds > 0)) throw ZeroDuration("throughput needs seconds > 0");
  const double cell_iters = double(nn) * double(nm) * double(iter_max);
  return {cell_iters / (seconds * 1e6), seconds * 1e9 / cell_iters};
}

/// One benchmark measurement. The two rate fields are stored explicitly and
/// must stay self-consistent with (n, iters, seconds) within 0.1%.
struct BenchRecord {
  std::string backend;
  std::string hardware;
  int n = 0;
  long iters = 0;
  double seconds = 0;
  double mcells_per_s = 0;
  double ns_per_cell_iter = 0;
  uint64_t checksum = 0;
  bool skipped = false;  // e.g. allocation failure at large N
};

/// BlowUp inside a benchmark cell, annotated with the offending cell.
struct BenchCellError : std::runtime_error {
  std::string backend;
  int n;
  long iteration;
  BenchCellError(std::string be, int size, long iter)
      : std::runtime_error("blow-up in benchmark cell backend=" + be +
                           " N=" + std::to_string(size) + " at iteration " +
                           std::to_string(iter)),
        backend(std::move(be)),
        n(size),
        iteration(iter) {}
};

namespace detail_bench {

template <class T>
BenchRecord bench_cell(const Backend& backend, int n, long iter_max,
                       const Gene& gene, uint64_t seed, int reps,
                       const std::string& hardware) {
  std::vector<double> times;
  uint64_t digest = 0;
  for (int rep = 0; rep < reps; ++rep) {
    StepBuffers<T> bufs(init_center_square<T>(n, n, seed));
    double sec;
    try {
      sec = run_timed(bufs, gene, backend, iter_max);
    } catch (const BlowUpError& e) {
      throw BenchCellError(backend_name(backend), n, e.iteration);
    }
    times.push_back(sec);
    digest = checksum(bufs.front);
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  auto tp = throughput(n, n, iter_max, median);
  return {backend_name(backend), hardware, n,      iter_max,
          median,                tp.mcells_per_s,  tp.ns_per_cell_iter,
          digest,                false};
}

}  // namespace detail_bench

/// Times every (backend, N) combination on the typ=1 workload. One warm-up
/// run per backend is discarded before its first timed cell; each timed cell
/// reports the median of `reps` repetitions. Snapshot capture stays off. A
/// cell that cannot allocate is marked skipped rather than failing the suite.
inline std::vector<BenchRecord> bench_suite(
    const std::vector<Backend>& backends, const std::vector<int>& sizes,
    long iter_max, const Gene& gene, uint64_t seed,
    Precision precision = Precision::Single, int reps = 3,
    const std::string& hardware = "cpu") {
  if (iter_max < 1) throw std::invalid_argument("bench needs iter_max >= 1");
  if (reps < 1) throw std::invalid_argument("bench needs reps >= 1");
  for (int n : sizes)
    if (n < 11) throw std::invalid_argument("bench sizes must be >= 11 (typ=1 seed square)");

  std::vector<BenchRecord> records;
  for (const Backend& backend : backends) {
    bool warmed = false;
    for (int n : sizes) {
      try {
        if (!warmed) {
          const long warm_iters = std::min<long>(iter_max, 100);
          try {
            if (precision == Precision::Single) {
              StepBuffers<float> bufs(init_center_square<float>(n, n, seed));
              run_timed(bufs, gene, backend, warm_iters);
            } else {
              StepBuffers<double> bufs(init_center_square<double>(n, n, seed));
              run_timed(bufs, gene, backend, warm_iters);
            }
          } catch (const BlowUpError& e) {
            throw BenchCellError(backend_name(backend), n, e.iteration);
          }
          warmed = true;
        }
        records.push_back(
            precision == Precision::Single
                ? detail_bench::bench_cell<float>(backend, n, iter_max, gene,
                                                  seed, reps, hardware)
                : detail_bench::bench_cell<double>(backend, n, iter_max, gene,
                                                   seed, reps, hardware));
      } catch (const std::bad_alloc&) {
        BenchRecord r;
        r.backend = backend_name(backend);
        r.hardware = hardware;
        r.n = n;
        r.iters = iter_max;
        r.skipped = true;
        records.push_back(r);
      }
    }
  }
  return records;
}

namespace detail_bench {

inline std::string sig5(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.5g", x);
  return buf;
}

inline std::string sig4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

}  // namespace detail_bench

/// CSV with exactly the documented columns; skipped cells are omitted.
inline std::string emit_csv(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  std::ostringstream out;
  out << "backend,hardware,n,iters,seconds,mcells_per_s,ns_per_cell_iter,checksum\n";
  for (const auto& r : records) {
    if (r.skipped) continue;
    out << r.backend << ',' << r.hardware << ',' << r.n << ',' << r.iters << ','
        << detail_bench::sig5(r.seconds) << ',' << detail_bench::sig5(r.mcells_per_s)
        << ',' << detail_bench::sig5(r.ns_per_cell_iter) << ','
        << checksum_hex(r.checksum) << '\n';
  }
  return out.str();
}

/// Human-readable matrix: one row per (backend, hardware), one column per N,
/// each cell "mcells (seconds)". Skipped or absent cells print "-".
inline std::string emit_table(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  std::vector<int> sizes;
  std::vector<std::pair<std::string, std::string>> rows;  // (backend, hardware)
  std::map<std::pair<std::string, std::string>, std::map<int, const BenchRecord*>> grid;
  for (const auto& r : records) {
    if (std::find(sizes.begin(), sizes.end(), r.n) == sizes.end())
      sizes.push_back(r.n);
    auto key = std::make_pair(r.backend, r.hardware);
    if (std::find(rows.begin(), rows.end(), key) == rows.end()) rows.push_back(key);
    grid[key][r.n] = &r;
  }
  std::sort(sizes.begin(), sizes.end());

  bool multi_hw = false;
  for (const auto& row : rows) multi_hw |= row.second != rows.front().second;

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"backend"};
  if (multi_hw) head.push_back("hardware");
  for (int n : sizes) head.push_back("N=" + std::to_string(n));
  cells.push_back(head);
  for (const auto& row : rows) {
    std::vector<std::string> line{row.first};
    if (multi_hw) line.push_back(row.second);
    for (int n : sizes) {
      auto it = grid[row].find(n);
      if (it == grid[row].end() || it->second->skipped)
        line.push_back("-");
      else
        line.push_back(detail_bench::sig5(it->second->mcells_per_s) + " (" +
                       detail_bench::sig4(it->second->seconds) + ")");
    }
    cells.push_back(line);
  }

  std::vector<size_t> width(cells[0].size(), 0);
  for (const auto& line : cells)
    for (size_t k = 0; k < line.size(); ++k)
      width[k] = std::max(width[k], line[k].size());
  std::ostringstream out;
  for (const auto& line : cells) {
    for (size_t k = 0; k < line.size(); ++k) {
      out << line[k];
      if (k + 1 < line.size())
        out << std::string(width[k] - line[k].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

/// Same fields as the CSV, as a JSON array. Checksums stay hexadecimal
/// strings: they exceed the safe integer range of JSON numbers.
inline std::string emit_json(const std::vector<BenchRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no benchmark records");
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json o;
    o["backend"] = r.backend;
    o["hardware"] = r.hardware;
    o["n"] = r.n;
    o["iters"] = r.iters;
    if (r.skipped) {
      o["skipped"] = true;
    } else {
      o["seconds"] = r.seconds;
      o["mcells_per_s"] = r.mcells_per_s;
      o["ns_per_cell_iter"] = r.ns_per_cell_iter;
      o["checksum"] = checksum_hex(r.checksum);
    }
    arr.push_back(o);
  }
  return arr.dump(2) + "\n";
}

}  // namespace rdcnn
