#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace rdcnn {

/// Full parameter set of one RD-CNN instance. `ka` scales external images at
/// initialization only; it never enters the update loop.
struct Gene {
  double a = -0.3;    // reaction offset
  double b = 1.3;     // recovery coupling
  double eps = -0.1;  // recovery rate
  double c = 1.0;     // activation gain
  double Du = 0.06;   // diffusion coefficient, u layer
  double Dv = 1.0;    // diffusion coefficient, v layer
  double dt = 0.1;    // integration step
  double ka = 1.0;    // input scaling for image initial states

  bool operator==(const Gene&) const = default;
};

inline bool gene_finite(const Gene& g) {
  return std::isfinite(g.a) && std::isfinite(g.b) && std::isfinite(g.eps) &&
         std::isfinite(g.c) && std::isfinite(g.Du) && std::isfinite(g.Dv) &&
         std::isfinite(g.dt) && std::isfinite(g.ka);
}

/// dt >= 0, Du >= 0, Dv >= 0, all fields finite. dt = 0 is allowed: the
/// zero-step update is the identity map, which the CLI and sweeps rely on.
inline bool gene_valid(const Gene& g) {
  return gene_finite(g) && g.dt >= 0.0 && g.Du >= 0.0 && g.Dv >= 0.0;
}

/// Kernel-parameter ordering. ka is excluded (init-only).
inline std::array<double, 7> gene_to_vector(const Gene& g) {
  return {g.dt, g.a, g.b, g.eps, g.c, g.Du, g.Dv};
}

inline Gene vector_to_gene(const std::array<double, 7>& p, double ka = 1.0) {
  Gene g;
  g.dt = p[0];
  g.a = p[1];
  g.b = p[2];
  g.eps = p[3];
  g.c = p[4];
  g.Du = p[5];
  g.Dv = p[6];
  g.ka = ka;
  return g;
}

/// Soft stability advisory: explicit Euler diffusion with dt*max(Du,Dv)
/// beyond 0.25 is prone to blow-up. Advisory only, never an error.
inline bool stability_advisory(const Gene& g) {
  return g.dt * std::fmax(g.Du, g.Dv) > 0.25;
}

/// Mutable access to a gene field by its lowercase name (sweep axes,
/// CLI flags). Throws std::invalid_argument for unknown names.
inline double& gene_field(Gene& g, const std::string& name) {
  if (name == "a") return g.a;
  if (name == "b") return g.b;
  if (name == "eps") return g.eps;
  if (name == "c") return g.c;
  if (name == "du") return g.Du;
  if (name == "dv") return g.Dv;
  if (name == "dt") return g.dt;
  if (name == "ka") return g.ka;
  throw std::invalid_argument("unknown gene field: " + name);
}

inline double gene_field(const Gene& g, const std::string& name) {
  return gene_field(const_cast<Gene&>(g), name);
}

inline bool is_gene_field(const std::string& name) {
  return name == "a" || name == "b" || name == "eps" || name == "c" ||
         name == "du" || name == "dv" || name == "dt" || name == "ka";
}

}  // namespace rdcnn
