#include "finsler/core.hpp"

#include <sstream>

#include "finsler/detail/fixed.hpp"

namespace finsler {
namespace {

void check_point(const MetricSpec& spec, const Vector& x, const Vector& v) {
  require_dimension(x, spec.dimension(), "x");
  require_dimension(v, spec.dimension(), "v");
  require_finite(x, "x");
  require_finite(v, "v");
  spec.require_convex_at(x);
}

}  // namespace

double eval_F(const MetricSpec& spec, const Vector& x, const Vector& v) {
  check_point(spec, x, v);
  return detail::dispatch(spec.dimension(), [&](auto m) {
    constexpr int M = decltype(m)::value;
    return detail::norm<M, double>(spec, to_array<M>(x), to_array<M>(v));
  });
}

FundamentalTensor fundamental_tensor(const MetricSpec& spec, const Vector& x, const Vector& v) {
  check_point(spec, x, v);
  if (v.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "fundamental tensor at v = 0");
  const Matrix g = detail::dispatch(spec.dimension(), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::vertical<M>(spec, to_array<M>(x), to_array<M>(v)).g);
  });
  return {x, v, g};
}

MetricSpec pullback_metric(const MetricSpec& spec, const DiffeoSpec& diffeo, const SampleGrid& grid) {
  const DiffeoAudit audit = audit_diffeo(diffeo, grid);
  if (!(audit.min_abs_det > 1e-12))
    throw Error(ErrorCode::pullback_degenerate, "diffeomorphism Jacobian is singular at a sampled point");
  if (audit.max_roundtrip > 1e-8 || audit.max_jacobian_error > 1e-5) {
    std::ostringstream os;
    os << "diffeomorphism is inconsistent: round-trip error " << audit.max_roundtrip << ", Jacobian error "
       << audit.max_jacobian_error;
    throw Error(ErrorCode::metric_invalid, os.str());
  }
  return MetricSpec::unchecked(spec.dimension(),
                               MetricSpec::Pullback{std::make_shared<const MetricSpec>(spec), diffeo});
}

MetricSpec pullback_metric(const MetricSpec& spec, const DiffeoSpec& diffeo) {
  return pullback_metric(spec, diffeo, SampleGrid::cube(spec.dimension()));
}

}  // namespace finsler
