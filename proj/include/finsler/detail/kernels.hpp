#pragma once

// Per-cell kernels of the discrete Dirichlet energy. Each cell writes only its
// own record; reductions run serially in cell order, so serial and OpenMP
// execution give bit-identical sums.

#include <vector>

#include "finsler/detail/calculus_fixed.hpp"
#include "finsler/detail/parallel.hpp"
#include "finsler/harmonic.hpp"

namespace finsler {

struct DirichletProblem::Geometry {
  std::array<int, 3> nodes;
  double area;
  std::array<Vec<double, 2>, 3> grad;  // gradients of the barycentric functions
  Vec<double, 2> centroid;             // unscaled
  double sigma;                        // density at scale * centroid
};

namespace detail {

struct CellFlux {
  Vec<double, 2> omega;  // du on the cell
  double energy;         // 1/2 omega . A |T|
  Vec<double, 2> flux;   // A(scale c, omega) |T|
  Mat<double, 2> d_omega;  // sigma g* |T|, filled on request
  bool degenerate;         // omega = 0
};

inline Vec<double, 2> cell_gradient(const DirichletProblem::Geometry& t, const std::vector<double>& u) {
  Vec<double, 2> w{0.0, 0.0};
  for (int a = 0; a < 3; ++a)
    for (int i = 0; i < 2; ++i) w[i] += u[t.nodes[a]] * t.grad[a][i];
  return w;
}

/// Evaluates every cell. `warm` holds Legendre preimages from a previous call
/// and is updated in place.
inline void cell_fluxes(const DirichletProblem& p, const std::vector<double>& u, bool hessian, Execution exec,
                        std::vector<CellFlux>& out, std::vector<Vec<double, 2>>* warm = nullptr) {
  const auto& geo = p.geometry();
  const int n = static_cast<int>(geo.size());
  out.resize(n);
  if (warm != nullptr) warm->resize(n, Vec<double, 2>{0.0, 0.0});
  parallel_for(n, exec, [&](int c) {
    const auto& t = geo[c];
    CellFlux& r = out[c];
    r.omega = cell_gradient(t, u);
    r.degenerate = is_zero<2>(r.omega);
    r.d_omega = zero_mat<double, 2>();
    if (r.degenerate) {
      r.energy = 0.0;
      r.flux = {0.0, 0.0};
      return;
    }
    const Vec<double, 2> xs{p.scale() * t.centroid[0], p.scale() * t.centroid[1]};
    const Vec<double, 2>* guess = warm != nullptr ? &(*warm)[c] : nullptr;
    const auto inv = legendre_inverse_fixed<2>(p.spec(), xs, r.omega, guess);
    if (warm != nullptr) (*warm)[c] = inv.v;
    const double s = t.sigma * t.area;
    r.flux = {s * inv.v[0], s * inv.v[1]};
    r.energy = 0.5 * dot<double, 2>(r.omega, r.flux);
    if (hessian) {
      const auto gi = inverse<double, 2>(vertical<2>(p.spec(), xs, inv.v).g);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.d_omega[i][j] = s * gi[i][j];
    }
  });
}

inline double total_energy(const std::vector<CellFlux>& cells) {
  double e = 0.0;
  for (const auto& c : cells) e += c.energy;
  return e;
}

inline void scatter_gradient(const DirichletProblem& p, const std::vector<CellFlux>& cells,
                             std::vector<double>& grad) {
  const auto& geo = p.geometry();
  grad.assign(p.grid().node_count(), 0.0);
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (int a = 0; a < 3; ++a) grad[geo[c].nodes[a]] += dot<double, 2>(cells[c].flux, geo[c].grad[a]);
}

}  // namespace detail
}  // namespace finsler
