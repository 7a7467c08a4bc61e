#pragma once

// Spray coefficients as Taylor jets in (x, y). F^2 is expanded to second order
// around a base point that is itself a jet of order K, so G comes out exact to
// order K and curvature needs no finite differences.

#include <Eigen/Eigenvalues>

#include "finsler/detail/fixed.hpp"

namespace finsler::detail {

template <int M, int K>
using PhaseJet = ad::Jet<double, 2 * M, K>;

/// Variables 0..M-1 are x, M..2M-1 are y.
template <int M, int K>
Vec<PhaseJet<M, K>, M> phase_variables(const Vec<double, M>& p, int offset) {
  Vec<PhaseJet<M, K>, M> out;
  for (int i = 0; i < M; ++i) out[i] = PhaseJet<M, K>::variable(p[i], offset + i);
  return out;
}

template <int M, int K>
struct PhaseMetric {
  PhaseJet<M, K> f2;
  Vec<PhaseJet<M, K>, M> dx;        // dF^2/dx^j
  Mat<PhaseJet<M, K>, M> dxdy;      // (k, j): d^2 F^2 / dx^k dy^j
  Mat<PhaseJet<M, K>, M> g;         // half the vertical Hessian
};

inline void check_conditioning(const Matrix& g) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(g);
  const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw Error(ErrorCode::conditioning, "fundamental tensor is degenerate or ill-conditioned", hi / lo);
}

template <int M, int K>
PhaseMetric<M, K> phase_metric(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& y) {
  using In = PhaseJet<M, K>;
  using Out = ad::Jet<In, 2 * M, 2>;
  Vec<Out, M> xo, yo;
  for (int i = 0; i < M; ++i) {
    xo[i] = Out::variable(In::variable(x[i], i), i);
    yo[i] = Out::variable(In::variable(y[i], M + i), M + i);
  }
  const Out f2 = norm_sq<M, Out>(spec, xo, yo);
  PhaseMetric<M, K> out;
  out.f2 = f2.value();
  for (int i = 0; i < M; ++i) {
    out.dx[i] = f2.d(i);
    for (int j = 0; j < M; ++j) {
      out.dxdy[i][j] = f2.d(i, M + j);
      out.g[i][j] = f2.d(M + i, M + j) * 0.5;
    }
  }
  Matrix g0(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) g0(i, j) = ad::scalar(out.g[i][j]);
  check_conditioning(g0);
  return out;
}

/// G^i as jets of order K in (x, y).
template <int M, int K>
Vec<PhaseJet<M, K>, M> spray_jet(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& y) {
  using J = PhaseJet<M, K>;
  const auto pm = phase_metric<M, K>(spec, x, y);
  const auto yj = phase_variables<M, K>(y, M);
  Vec<J, M> rhs;
  for (int j = 0; j < M; ++j) {
    J s = -pm.dx[j];
    for (int k = 0; k < M; ++k) s += pm.dxdy[k][j] * yj[k];
    rhs[j] = s;
  }
  const Mat<J, M> gi = inverse<J, M>(pm.g);
  Vec<J, M> G = matvec<J, J, M>(gi, rhs);
  for (auto& c : G) c = c * 0.25;
  return G;
}

/// R^i_k as jets of order K - 2, from G of order K.
template <int M, int K>
Mat<PhaseJet<M, K - 2>, M> curvature_jet(const Vec<PhaseJet<M, K>, M>& G, const Vec<double, M>& y) {
  using R = PhaseJet<M, K - 2>;
  const auto yr = phase_variables<M, K - 2>(y, M);
  Vec<R, M> g0;
  Mat<R, M> gy;  // (i, m): dG^i/dy^m
  for (int i = 0; i < M; ++i) {
    g0[i] = ad::truncate<K - 2>(G[i]);
    for (int m = 0; m < M; ++m) gy[i][m] = ad::truncate<K - 2>(ad::derivative(G[i], M + m));
  }
  Mat<R, M> out;
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      R r = ad::truncate<K - 2>(ad::derivative(G[i], k)) * 2.0;
      const auto gik = ad::derivative(G[i], M + k);
      for (int m = 0; m < M; ++m) {
        r -= yr[m] * ad::derivative(gik, m);
        r += g0[m] * ad::derivative(gik, M + m) * 2.0;
        r -= gy[i][m] * gy[m][k];
      }
      out[i][k] = r;
    }
  return out;
}

/// Fixed probe directions for y-independence checks.
template <int M>
std::array<Vec<double, M>, 10> probe_directions() {
  std::array<Vec<double, M>, 10> out;
  const auto& sweep = sweep_directions<M>();
  for (int k = 0; k < 10; ++k) out[k] = sweep[(6 * k + 1) % 64];
  return out;
}

}  // namespace finsler::detail
