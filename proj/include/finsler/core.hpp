#pragma once

#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// The fundamental tensor g at (x, v), half the vertical Hessian of F^2.
struct FundamentalTensor {
  Vector x;
  Vector direction;
  Matrix g;
};

/// F(x, v); zero at v = 0.
double eval_F(const MetricSpec& spec, const Vector& x, const Vector& v);

/// Exact (jet) evaluation of g at a nonzero direction.
FundamentalTensor fundamental_tensor(const MetricSpec& spec, const Vector& x, const Vector& v);

/// The metric (x, v) -> spec(I(x), dI(x) v). Checks the diffeomorphism on `grid`.
MetricSpec pullback_metric(const MetricSpec& spec, const DiffeoSpec& diffeo, const SampleGrid& grid);
MetricSpec pullback_metric(const MetricSpec& spec, const DiffeoSpec& diffeo);

}  // namespace finsler
