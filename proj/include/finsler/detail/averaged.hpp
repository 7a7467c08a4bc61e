#pragma once

// Indicatrix averages of the fundamental tensor, templated over the scalar
// type of the base point so that x-derivatives of h come out exactly.

#include <cmath>
#include <vector>

#include "finsler/detail/metric_eval.hpp"
#include "finsler/jet.hpp"
#include "finsler/small_linalg.hpp"

namespace finsler {

/// Measure on the indicatrix used as averaging weight.
enum class IndicatrixMeasure {
  cone,     // Lebesgue measure of the cone over a surface element
  surface,  // Euclidean arc length / surface area
};

namespace detail {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [a, b] (Newton on the Legendre recurrence).
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.nodes[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    r.weights[i] = (b - a) / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

template <class S>
S abs_value(const S& s) {
  return ad::scalar(s) < 0.0 ? S(-s) : s;
}

/// One angular node: a ray direction u and the integration weight of its
/// parameter cell (dtheta or dtheta dphi).
template <int M>
struct AngularNode {
  Vec<double, M> angles;  // theta (and phi)
  double cell;
};

/// Angular nodes: n equally spaced angles for M = 2; n/2 Gauss-Legendre
/// polar angles times n azimuths for M = 3.
template <int M>
std::vector<AngularNode<M>> angular_nodes(int n) {
  std::vector<AngularNode<M>> out;
  if constexpr (M == 2) {
    for (int q = 0; q < n; ++q) out.push_back({{2.0 * M_PI * q / n, 0.0}, 2.0 * M_PI / n});
  } else {
    const int nt = std::max(n / 2, 2);
    const GaussRule rule = gauss_legendre(nt, 0.0, M_PI);
    for (int i = 0; i < nt; ++i)
      for (int q = 0; q < n; ++q)
        out.push_back({{rule.nodes[i], 2.0 * M_PI * q / n, 0.0}, rule.weights[i] * 2.0 * M_PI / n});
  }
  return out;
}

template <class T, int M>
Vec<T, M> ray(const Vec<T, M>& angles) {
  using std::cos;
  using std::sin;
  if constexpr (M == 2) {
    return {cos(angles[0]), sin(angles[0])};
  } else {
    return {sin(angles[0]) * cos(angles[1]), sin(angles[0]) * sin(angles[1]), cos(angles[0])};
  }
}

/// Indicatrix point y(angles) = u / F(x, u) and its measure density, with
/// exact angle derivatives from a first-order jet over the angles.
template <int M, class S>
struct IndicatrixPoint {
  Vec<S, M> y;
  S weight;  // measure density times the parameter cell
};

template <int M, class S>
IndicatrixPoint<M, S> indicatrix_point(const MetricSpec& spec, const Vec<S, M>& x, const AngularNode<M>& node,
                                       IndicatrixMeasure measure) {
  constexpr int P = M - 1;  // number of angles
  using T = ad::Jet<S, P, 1>;
  Vec<T, M> angles;
  for (int k = 0; k < M; ++k) angles[k] = k < P ? T::variable(S(node.angles[k]), k) : T(S(0.0));
  const Vec<T, M> u = ray<T, M>(angles);
  Vec<T, M> xt;
  for (int i = 0; i < M; ++i) xt[i] = T(x[i]);
  const T f = norm<M, T>(spec, xt, u);
  using ad::recip;
  const T inv = recip(f);
  Vec<T, M> yt;
  for (int i = 0; i < M; ++i) yt[i] = u[i] * inv;

  IndicatrixPoint<M, S> out;
  for (int i = 0; i < M; ++i) out.y[i] = yt[i].value();
  S density;
  if constexpr (M == 2) {
    const S y0 = yt[0].value(), y1 = yt[1].value();
    const S t0 = yt[0].d(0), t1 = yt[1].d(0);
    if (measure == IndicatrixMeasure::cone) {
      density = abs_value(y0 * t1 - y1 * t0) * 0.5;
    } else {
      using std::sqrt;
      density = sqrt(t0 * t0 + t1 * t1);
    }
  } else {
    Vec<S, 3> a, b, c;
    for (int i = 0; i < 3; ++i) {
      a[i] = yt[i].value();
      b[i] = yt[i].d(0);
      c[i] = yt[i].d(1);
    }
    const Vec<S, 3> cross = {b[1] * c[2] - b[2] * c[1], b[2] * c[0] - b[0] * c[2], b[0] * c[1] - b[1] * c[0]};
    if (measure == IndicatrixMeasure::cone) {
      density = abs_value(dot<S, 3>(a, cross)) * (1.0 / 3.0);
    } else {
      using std::sqrt;
      density = sqrt(dot<S, 3>(cross, cross));
    }
  }
  out.weight = density * node.cell;
  return out;
}

/// g(x, u) with x-jets as coefficients; 0-homogeneity lets u be any ray.
template <int M, class S>
Mat<S, M> fundamental_tensor_at(const MetricSpec& spec, const Vec<S, M>& x, const Vec<S, M>& u) {
  using J = ad::Jet<S, M, 2>;
  Vec<J, M> xj, vj;
  for (int i = 0; i < M; ++i) {
    xj[i] = J(x[i]);
    vj[i] = J::variable(u[i], i);
  }
  const J f2 = norm_sq<M, J>(spec, xj, vj);
  Mat<S, M> g;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) g[i][j] = f2.d(i, j) * 0.5;
  return g;
}

/// h(x) = sum_q w_q g(x, y_q) / sum_q w_q.
template <int M, class S>
Mat<S, M> averaged_metric_at(const MetricSpec& spec, const Vec<S, M>& x, int n, IndicatrixMeasure measure) {
  Mat<S, M> h = zero_mat<S, M>();
  S total = S(0.0);
  for (const auto& node : angular_nodes<M>(n)) {
    const auto p = indicatrix_point<M, S>(spec, x, node, measure);
    const Mat<S, M> g = fundamental_tensor_at<M, S>(spec, x, p.y);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) h[i][j] += g[i][j] * p.weight;
    total += p.weight;
  }
  using ad::recip;
  const S inv = recip(total);
  for (auto& row : h)
    for (auto& e : row) e = e * inv;
  return h;
}

}  // namespace detail
}  // namespace finsler
