#pragma once

#include <concepts>
#include <type_traits>

#include "rdcnn/gene.hpp"

namespace rdcnn {

/// Pointwise cell model: two reaction rates plus per-layer diffusion
/// coefficients and the integration step, all in the working precision.
/// Reactions must be pure; kernels rely on bit-identical re-evaluation.
template <class M>
concept CellModel = requires(const M m, typename M::value_type x) {
  requires std::is_floating_point_v<typename M::value_type>;
  { m.reaction_u(x, x) } -> std::same_as<typename M::value_type>;
  { m.reaction_v(x, x) } -> std::same_as<typename M::value_type>;
  { m.diffusion_u() } -> std::same_as<typename M::value_type>;
  { m.diffusion_v() } -> std::same_as<typename M::value_type>;
  { m.time_step() } -> std::same_as<typename M::value_type>;
};

/// Gene narrowed once to the working precision, in kernel-parameter order.
template <class T>
struct FhnParams {
  T dt, a, b, eps, c, du, dv;
};

template <class T>
FhnParams<T> make_params(const Gene& g) {
  return {T(g.dt), T(g.a), T(g.b), T(g.eps), T(g.c), T(g.Du), T(g.Dv)};
}

// f1(u,v) = c*u - u^3/3 - v, factored as u*(c - u*u/3) - v. The factored
// form is the canonical evaluation order; every backend must use it so
// that results agree bit-exactly.
template <class T>
inline T reaction_u(T u, T v, const FhnParams<T>& p) {
  return u * (p.c - u * u / T(3)) - v;
}

// f2(u,v) = -eps*(u - b*v + a).
template <class T>
inline T reaction_v(T u, T v, const FhnParams<T>& p) {
  return -p.eps * (u - p.b * v + p.a);
}

// One explicit Euler step of a single cell given precomputed Laplacians:
//   u+ = u + dt*(f1 + Du*lap_u)
//   v+ = v + dt*(f2 + Dv*lap_v)
template <class T>
inline void cell_update(T u, T v, T lap_u, T lap_v, const FhnParams<T>& p,
                        T& u_next, T& v_next) {
  u_next = u + p.dt * (reaction_u(u, v, p) + p.du * lap_u);
  v_next = v + p.dt * (reaction_v(u, v, p) + p.dv * lap_v);
}

// Gene-taking overloads; convenience for tests and one-off evaluation.
template <class T>
inline T reaction_u(T u, T v, const Gene& g) {
  return reaction_u(u, v, make_params<T>(g));
}
template <class T>
inline T reaction_v(T u, T v, const Gene& g) {
  return reaction_v(u, v, make_params<T>(g));
}
template <class T>
inline void cell_update(T u, T v, T lap_u, T lap_v, const Gene& g, T& un, T& vn) {
  cell_update(u, v, lap_u, lap_v, make_params<T>(g), un, vn);
}

/// FitzHugh-Nagumo cell model, the shipped CellModel instance.
template <class T>
struct FhnModel {
  using value_type = T;
  FhnParams<T> p;

  explicit FhnModel(const Gene& g) : p(make_params<T>(g)) {}
  explicit FhnModel(const FhnParams<T>& params) : p(params) {}

  T reaction_u(T u, T v) const { return rdcnn::reaction_u(u, v, p); }
  T reaction_v(T u, T v) const { return rdcnn::reaction_v(u, v, p); }
  T diffusion_u() const { return p.du; }
  T diffusion_v() const { return p.dv; }
  T time_step() const { return p.dt; }
};

static_assert(CellModel<FhnModel<float>>);
static_assert(CellModel<FhnModel<double>>);

}  // namespace rdcnn
