#pragma once

// Fixed-dimension kernels shared by the public modules: vertical derivatives
// of F^2 and the Newton inverse of the Legendre map.

#include <array>
#include <cmath>
#include <string>
#include <type_traits>

#include "finsler/detail/metric_eval.hpp"
#include "finsler/error.hpp"
#include "finsler/jet.hpp"
#include "finsler/small_linalg.hpp"

namespace finsler::detail {

/// Calls fn(std::integral_constant<int, M>) for the supported dimensions.
template <class Fn>
decltype(auto) dispatch(int m, Fn&& fn) {
  if (m == 2) return fn(std::integral_constant<int, 2>{});
  if (m == 3) return fn(std::integral_constant<int, 3>{});
  throw Error(ErrorCode::unsupported_dimension, "dimension " + std::to_string(m) + " is not supported (m = 2 or 3)");
}

template <int M>
double norm2(const Vec<double, M>& v) {
  return std::sqrt(dot<double, M>(v, v));
}

template <int M>
bool is_zero(const Vec<double, M>& v) {
  for (double c : v)
    if (c != 0.0) return false;
  return true;
}

template <int M>
struct Vertical {
  double f2;
  Vec<double, M> omega;  // half the vertical gradient of F^2
  Mat<double, M> g;      // half the vertical Hessian of F^2
};

template <int M>
Vertical<M> vertical(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& v) {
  using J = ad::Jet<double, M, 2>;
  Vec<J, M> xj, vj;
  for (int i = 0; i < M; ++i) {
    xj[i] = J(x[i]);
    vj[i] = J::variable(v[i], i);
  }
  const J f2 = norm_sq<M, J>(spec, xj, vj);
  Vertical<M> out;
  out.f2 = f2.value();
  for (int i = 0; i < M; ++i) {
    out.omega[i] = 0.5 * f2.d(i);
    for (int j = 0; j < M; ++j) out.g[i][j] = 0.5 * f2.d(i, j);
  }
  return out;
}

/// 64 unit directions: equally spaced angles for M = 2, a Fibonacci sphere for M = 3.
template <int M>
const std::array<Vec<double, M>, 64>& sweep_directions() {
  static const std::array<Vec<double, M>, 64> dirs = [] {
    std::array<Vec<double, M>, 64> d{};
    for (int k = 0; k < 64; ++k) {
      if constexpr (M == 2) {
        const double t = 2.0 * M_PI * k / 64.0;
        d[k] = {std::cos(t), std::sin(t)};
      } else {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        const double z = 1.0 - (2.0 * k + 1.0) / 64.0;
        const double r = std::sqrt(1.0 - z * z);
        d[k] = {r * std::cos(golden * k), r * std::sin(golden * k), z};
      }
    }
    return d;
  }();
  return dirs;
}

/// Coarse estimate of the dual norm: max over the sweep of omega(u) / F(u).
template <int M>
double dual_norm_estimate(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& omega) {
  double best = 0.0;
  for (const auto& u : sweep_directions<M>()) best = std::max(best, dot<double, M>(omega, u) / norm<M, double>(spec, x, u));
  return best;
}

template <int M>
struct LegendreFixed {
  Vec<double, M> v;
  double residual;
  int iterations;
};

/// Newton solve of l(x, v) = omega. `warm`, when given, replaces the sweep guess.
template <int M>
LegendreFixed<M> legendre_inverse_fixed(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& omega,
                                        const Vec<double, M>* warm = nullptr, int max_iter = 50) {
  const double scale = norm2<M>(omega);
  if (!(scale > 0.0)) throw Error(ErrorCode::degenerate_direction, "Legendre inverse of a zero covector");
  Vec<double, M> w;
  for (int i = 0; i < M; ++i) w[i] = omega[i] / scale;

  Vec<double, M> v;
  if (warm != nullptr && !is_zero<M>(*warm)) {
    for (int i = 0; i < M; ++i) v[i] = (*warm)[i] / scale;
  } else {
    const double target = dual_norm_estimate<M>(spec, x, w);
    const double fw = norm<M, double>(spec, x, w);
    for (int i = 0; i < M; ++i) v[i] = w[i] * target / fw;
  }

  auto phi = [&](const Vec<double, M>& u) { return 0.5 * norm_sq<M, double>(spec, x, u) - dot<double, M>(w, u); };

  double res = 0.0;
  double prev = INFINITY;
  int it = 0;
  for (;; ++it) {
    const Vertical<M> vert = vertical<M>(spec, x, v);
    Vec<double, M> r;
    for (int i = 0; i < M; ++i) r[i] = vert.omega[i] - w[i];
    res = norm2<M>(r);
    if (res <= 1e-15 || it >= max_iter) break;
    if (res < 1e-11 && res >= 0.5 * prev) break;
    prev = res;

    const Mat<double, M> ginv = inverse<double, M>(vert.g);
    Vec<double, M> p = matvec<double, double, M>(ginv, r);
    for (auto& c : p) c = -c;

    if (res < 1e-6) {
      for (int i = 0; i < M; ++i) v[i] += p[i];
      continue;
    }
    const double phi0 = 0.5 * vert.f2 - dot<double, M>(w, v);
    const double slope = dot<double, M>(r, p);
    double t = 1.0;
    Vec<double, M> trial;
    for (;;) {
      for (int i = 0; i < M; ++i) trial[i] = v[i] + t * p[i];
      if (phi(trial) <= phi0 + 1e-4 * t * slope) break;
      t *= 0.5;
      if (t < 1e-12) break;
    }
    v = trial;
  }

  if (!(res <= 1e-10))
    throw Error(ErrorCode::no_convergence,
                "Legendre inverse did not converge after " + std::to_string(it) + " iterations", res * scale);
  for (auto& c : v) c *= scale;
  return {v, res * scale, it};
}

/// Dual fundamental tensor g* = g(l^{-1} omega)^{-1}, with the preimage.
template <int M>
struct DualData {
  Vec<double, M> v;
  Mat<double, M> g;
  Mat<double, M> g_star;
};

template <int M>
DualData<M> dual_data(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& omega,
                      const Vec<double, M>* warm = nullptr) {
  DualData<M> d;
  d.v = legendre_inverse_fixed<M>(spec, x, omega, warm).v;
  d.g = vertical<M>(spec, x, d.v).g;
  d.g_star = inverse<double, M>(d.g);
  return d;
}

}  // namespace finsler::detail
