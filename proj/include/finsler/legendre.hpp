#pragma once

#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

struct LegendreResult {
  Vector v;
  double residual = 0.0;
  int iterations = 0;
};

/// l(x, v) = half the vertical gradient of F^2.
Vector legendre(const MetricSpec& spec, const Vector& x, const Vector& v);

/// Newton inverse of the Legendre map.
LegendreResult legendre_inverse(const MetricSpec& spec, const Vector& x, const Vector& omega, int max_iter = 50);

/// Dual norm F*(x, omega) = F(l^{-1}(x, omega)); zero at omega = 0.
double eval_F_star(const MetricSpec& spec, const Vector& x, const Vector& omega);

/// g*(x, omega) = g(l^{-1}(x, omega))^{-1}.
Matrix dual_fundamental_tensor(const MetricSpec& spec, const Vector& x, const Vector& omega);

/// Half the omega-Hessian of F*^2, differentiated exactly through the Newton
/// iteration. Independent of dual_fundamental_tensor; used as a cross-check.
Matrix co_finsler_hessian(const MetricSpec& spec, const Vector& x, const Vector& omega);

}  // namespace finsler
