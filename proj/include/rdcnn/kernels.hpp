#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "rdcnn/backend.hpp"
#include "rdcnn/gene.hpp"
#include "rdcnn/grid.hpp"
#include "rdcnn/model.hpp"

namespace rdcnn {

/// Double buffer for Jacobi stepping. All reads of a step come from `front`,
/// all writes go to `back`; the buffers swap afterwards, never copy.
template <class T>
struct StepBuffers {
  GridState<T> front;
  GridState<T> back;
  std::vector<T> scratch;  // shift backend Laplacian workspace

  explicit StepBuffers(GridState<T> initial)
      : front(std::move(initial)), back(front.rows, front.cols) {}

  int rows() const { return front.rows; }
  int cols() const { return front.cols; }

  void swap() {
    std::swap(front.u, back.u);
    std::swap(front.v, back.v);
  }
};

/// 5-point toroidal stencil at (i,j). Canonical summation order:
/// right + left + down + up - 4*center, with down = row i+1.
/// Wrap indices resolve by branch; every exact-order backend reproduces
/// this arithmetic bit-for-bit.
template <class T>
inline T laplacian5(std::span<const T> layer, int rows, int cols, int i, int j) {
  const int iu = (i == 0) ? rows - 1 : i - 1;
  const int id = (i == rows - 1) ? 0 : i + 1;
  const int jl = (j == 0) ? cols - 1 : j - 1;
  const int jr = (j == cols - 1) ? 0 : j + 1;
  const T center = layer[size_t(i) * cols + j];
  const T right = layer[size_t(i) * cols + jr];
  const T left = layer[size_t(i) * cols + jl];
  const T down = layer[size_t(id) * cols + j];
  const T up = layer[size_t(iu) * cols + j];
  return right + left + down + up - T(4) * center;
}

namespace kern {

// Canonical per-cell update, shared by every exact-order backend so their
// arithmetic is identical by construction. Indices are flat offsets of the
// center and its four toroidal neighbors.
template <class M, class T = typename M::value_type>
inline void stencil_cell(const M& m, const T* u, const T* v, T* un, T* vn,
                         size_t c, size_t l, size_t r, size_t up, size_t dn) {
  const T uc = u[c];
  const T vc = v[c];
  const T lap_u = u[r] + u[l] + u[dn] + u[up] - T(4) * uc;
  const T lap_v = v[r] + v[l] + v[dn] + v[up] - T(4) * vc;
  un[c] = uc + m.time_step() * (m.reaction_u(uc, vc) + m.diffusion_u() * lap_u);
  vn[c] = vc + m.time_step() * (m.reaction_v(uc, vc) + m.diffusion_v() * lap_v);
}

template <class T>
inline bool row_finite(const T* un, const T* vn, size_t base, int cols) {
  uint32_t bad = 0;
  for (int j = 0; j < cols; ++j) {
    bad |= uint32_t(!detail::finite_bits(un[base + j]));
    bad |= uint32_t(!detail::finite_bits(vn[base + j]));
  }
  return bad == 0;
}

// Plain double loop; wrap handled per cell through laplacian5. This is the
// executable definition the optimized backends are checked against.
template <class M, class T = typename M::value_type>
bool step_reference(const GridState<T>& f, GridState<T>& b, const M& m) {
  const int rows = f.rows, cols = f.cols;
  std::span<const T> u(f.u), v(f.v);
  uint32_t bad = 0;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const size_t c = size_t(i) * cols + j;
      const T uc = f.u[c];
      const T vc = f.v[c];
      const T lap_u = laplacian5(u, rows, cols, i, j);
      const T lap_v = laplacian5(v, rows, cols, i, j);
      const T un = uc + m.time_step() * (m.reaction_u(uc, vc) + m.diffusion_u() * lap_u);
      const T vn = vc + m.time_step() * (m.reaction_v(uc, vc) + m.diffusion_v() * lap_v);
      b.u[c] = un;
      b.v[c] = vn;
      bad |= uint32_t(!detail::finite_bits(un));
      bad |= uint32_t(!detail::finite_bits(vn));
    }
  }
  return bad == 0;
}

// One row of the canonical update with the row's wrap state precomputed;
// column wraps only at the first and last cell.
template <class M, class T = typename M::value_type>
inline void update_row(const M& m, const T* u, const T* v, T* un, T* vn, int i,
                       int iu, int id, int cols, int j_begin, int j_end) {
  const size_t base = size_t(i) * cols;
  const size_t ubase = size_t(iu) * cols;
  const size_t dbase = size_t(id) * cols;
  for (int j = j_begin; j < j_end; ++j) {
    const size_t jl = base + size_t(j == 0 ? cols - 1 : j - 1);
    const size_t jr = base + size_t(j == cols - 1 ? 0 : j + 1);
    stencil_cell(m, u, v, un, vn, base + j, jl, jr, ubase + j, dbase + j);
  }
}

// Cache-tiled single-thread variant; default tile 64x64.
template <class M, class T = typename M::value_type>
bool step_blocked(const GridState<T>& f, GridState<T>& b, const M& m,
                  int tile_rows, int tile_cols) {
  const int rows = f.rows, cols = f.cols;
  const T* u = f.u.data();
  const T* v = f.v.data();
  T* un = b.u.data();
  T* vn = b.v.data();
  uint32_t bad = 0;
  for (int bi = 0; bi < rows; bi += tile_rows) {
    const int bi_end = std::min(bi + tile_rows, rows);
    for (int bj = 0; bj < cols; bj += tile_cols) {
      const int bj_end = std::min(bj + tile_cols, cols);
      for (int i = bi; i < bi_end; ++i) {
        const int iu = (i == 0) ? rows - 1 : i - 1;
        const int id = (i == rows - 1) ? 0 : i + 1;
        update_row(m, u, v, un, vn, i, iu, id, cols, bj, bj_end);
      }
    }
    // tile band is still cache-warm; validate it before moving on
    for (int i = bi; i < bi_end; ++i)
      bad |= uint32_t(!row_finite(un, vn, size_t(i) * cols, cols));
  }
  return bad == 0;
}

// Contiguous row bands, one band per worker, full barrier per step. Bands
// only read the immutable front buffer, so no halo exchange is needed.
template <class M, class T = typename M::value_type>
bool step_parallel(const GridState<T>& f, GridState<T>& b, const M& m, int threads) {
  const int rows = f.rows, cols = f.cols;
  const T* u = f.u.data();
  const T* v = f.v.data();
  T* un = b.u.data();
  T* vn = b.v.data();
  uint32_t bad = 0;
#if defined(_OPENMP)
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt) reduction(| : bad)
#else
  (void)threads;
#endif
  for (int i = 0; i < rows; ++i) {
    const int iu = (i == 0) ? rows - 1 : i - 1;
    const int id = (i == rows - 1) ? 0 : i + 1;
    update_row(m, u, v, un, vn, i, iu, id, cols, 0, cols);
    bad |= uint32_t(!row_finite(un, vn, size_t(i) * cols, cols));
  }
  return bad == 0;
}

// Whole-array cyclic-shift formulation: the Laplacian sum accumulates in
// shifted-array order (down + up + right + left), so results match the
// exact-order backends only within tolerance, not bit-exactly.
template <class M, class T = typename M::value_type>
bool step_shift_layer(const T* src, const T* other, T* dst, bool is_u, const M& m,
                      std::vector<T>& lap, int rows, int cols) {
  const size_t n = size_t(rows) * cols;
  lap.resize(n);
  // lap = shift(src, row+1) + shift(src, row-1)
  for (int i = 0; i < rows; ++i) {
    const T* dn_row = src + size_t(i == rows - 1 ? 0 : i + 1) * cols;
    const T* up_row = src + size_t(i == 0 ? rows - 1 : i - 1) * cols;
    T* out = lap.data() + size_t(i) * cols;
    for (int j = 0; j < cols; ++j) out[j] = dn_row[j] + up_row[j];
  }
  // lap += shift(src, col+1)
  for (int i = 0; i < rows; ++i) {
    const T* row = src + size_t(i) * cols;
    T* out = lap.data() + size_t(i) * cols;
    for (int j = 0; j < cols - 1; ++j) out[j] += row[j + 1];
    out[cols - 1] += row[0];
  }
  // lap += shift(src, col-1)
  for (int i = 0; i < rows; ++i) {
    const T* row = src + size_t(i) * cols;
    T* out = lap.data() + size_t(i) * cols;
    out[0] += row[cols - 1];
    for (int j = 1; j < cols; ++j) out[j] += row[j - 1];
  }
  // dst = src + dt*(reaction + D*(lap - 4*src))
  uint32_t bad = 0;
  const T diff = is_u ? m.diffusion_u() : m.diffusion_v();
  for (size_t k = 0; k < n; ++k) {
    const T x = src[k];
    const T reac = is_u ? m.reaction_u(x, other[k]) : m.reaction_v(other[k], x);
    const T val = x + m.time_step() * (reac + diff * (lap[k] - T(4) * x));
    dst[k] = val;
    bad |= uint32_t(!detail::finite_bits(val));
  }
  return bad == 0;
}

template <class M, class T = typename M::value_type>
bool step_shift(const GridState<T>& f, GridState<T>& b, const M& m,
                std::vector<T>& scratch) {
  bool ok_u = step_shift_layer(f.u.data(), f.v.data(), b.u.data(), true, m,
                               scratch, f.rows, f.cols);
  bool ok_v = step_shift_layer(f.v.data(), f.u.data(), b.v.data(), false, m,
                               scratch, f.rows, f.cols);
  return ok_u && ok_v;
}

}  // namespace kern

/// Advances the lattice one iteration with the selected backend and swaps
/// the buffers. Returns false when any freshly written entry is non-finite
/// (the swap still happens; the run loop owns blow-up reporting).
template <class M, class T = typename M::value_type>
  requires CellModel<M>
bool step(StepBuffers<T>& bufs, const M& model, const Backend& backend) {
  bool ok = false;
  switch (backend.kind) {
    case BackendKind::Reference:
      ok = kern::step_reference(bufs.front, bufs.back, model);
      break;
    case BackendKind::Blocked:
      ok = kern::step_blocked(bufs.front, bufs.back, model, backend.tile_rows,
                              backend.tile_cols);
      break;
    case BackendKind::Parallel:
      ok = kern::step_parallel(bufs.front, bufs.back, model, backend.threads);
      break;
    case BackendKind::Shift:
      ok = kern::step_shift(bufs.front, bufs.back, model, bufs.scratch);
      break;
  }
  bufs.swap();
  return ok;
}

template <class T>
bool step(StepBuffers<T>& bufs, const Gene& gene, const Backend& backend) {
  return step(bufs, FhnModel<T>(gene), backend);
}

}  // namespace rdcnn
