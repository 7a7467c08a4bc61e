#pragma once

#include <cmath>

#include "finsler/calculus.hpp"
#include "finsler/detail/averaged.hpp"
#include "finsler/detail/fixed.hpp"

namespace finsler::detail {

template <int M, class X>
X density(const VolumeForm& mu, const Vec<X, M>& x) {
  using std::sqrt;
  return std::visit(overloaded{
                        [&](const VolumeForm::Lebesgue&) { return X(1.0); },
                        [&](const VolumeForm::SqrtDet& s) { return sqrt(determinant<X, M>(s.a.evaluate<M>(x))); },
                        [&](const VolumeForm::SqrtDetAveraged& s) {
                          return sqrt(determinant<X, M>(averaged_metric_at<M, X>(*s.spec, x, s.nodes, s.measure)));
                        },
                    },
                    mu.kind());
}

template <int M>
struct DensityValue {
  double value;
  Vec<double, M> gradient;
};

template <int M>
DensityValue<M> density_with_gradient(const VolumeForm& mu, const Vec<double, M>& x) {
  if (std::holds_alternative<VolumeForm::Lebesgue>(mu.kind())) return {1.0, zero_vec<double, M>()};
  using J = ad::Jet<double, M, 1>;
  Vec<J, M> xj;
  for (int i = 0; i < M; ++i) xj[i] = J::variable(x[i], i);
  const J s = density<M, J>(mu, xj);
  DensityValue<M> out{s.value(), {}};
  for (int i = 0; i < M; ++i) out.gradient[i] = s.d(i);
  return out;
}

template <int M>
struct AMapValue {
  Vec<double, M> v;  // Legendre preimage of omega at the scaled point
  Vec<double, M> value;
  Mat<double, M> d_omega;
  Mat<double, M> d_x;
  double sigma;
};

/// A(scale x, omega) and its derivatives; dA/dx includes the factor `scale`.
/// `density` may carry a precomputed sigma and its gradient at scale * x.
template <int M>
AMapValue<M> amap(const MetricSpec& spec, const VolumeForm& mu, double scale, const Vec<double, M>& x,
                  const Vec<double, M>& omega, const Vec<double, M>* warm = nullptr,
                  const DensityValue<M>* density = nullptr) {
  Vec<double, M> xs;
  for (int i = 0; i < M; ++i) xs[i] = scale * x[i];
  AMapValue<M> out;
  out.v = legendre_inverse_fixed<M>(spec, xs, omega, warm).v;

  using J = ad::Jet<double, 2 * M, 2>;
  Vec<J, M> xj, vj;
  for (int i = 0; i < M; ++i) {
    xj[i] = J::variable(xs[i], i);
    vj[i] = J::variable(out.v[i], M + i);
  }
  const J f2 = norm_sq<M, J>(spec, xj, vj);
  Mat<double, M> g, lx;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      g[i][j] = 0.5 * f2.d(M + i, M + j);
      lx[i][j] = 0.5 * f2.d(M + i, j);
    }
  const Mat<double, M> gi = inverse<double, M>(g);
  const Mat<double, M> dvdx = matmul<double, M>(gi, lx);

  const DensityValue<M> sig = density ? *density : density_with_gradient<M>(mu, xs);
  out.sigma = sig.value;
  for (int i = 0; i < M; ++i) {
    out.value[i] = sig.value * out.v[i];
    for (int k = 0; k < M; ++k) {
      out.d_omega[i][k] = sig.value * gi[i][k];
      out.d_x[i][k] = scale * (out.v[i] * sig.gradient[k] - sig.value * dvdx[i][k]);
    }
  }
  return out;
}

/// A(scale x, omega) alone; zero at omega = 0.
template <int M>
Vec<double, M> amap_value(const MetricSpec& spec, const VolumeForm& mu, double scale, const Vec<double, M>& x,
                          const Vec<double, M>& omega) {
  if (is_zero<M>(omega)) return zero_vec<double, M>();
  Vec<double, M> xs;
  for (int i = 0; i < M; ++i) xs[i] = scale * x[i];
  const Vec<double, M> v = legendre_inverse_fixed<M>(spec, xs, omega).v;
  const double s = density<M, double>(mu, xs);
  Vec<double, M> out;
  for (int i = 0; i < M; ++i) out[i] = s * v[i];
  return out;
}

}  // namespace finsler::detail
