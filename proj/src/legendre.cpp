#include "finsler/legendre.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "finsler/detail/fixed.hpp"

namespace finsler {
namespace {

void check_covector(const MetricSpec& spec, const Vector& x, const Vector& w, const char* name) {
  require_dimension(x, spec.dimension(), "x");
  require_dimension(w, spec.dimension(), name);
  require_finite(x, "x");
  require_finite(w, name);
  spec.require_convex_at(x);
}

template <int M>
Mat<double, M> co_hessian(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& omega) {
  using W = ad::Jet<double, M, 2>;
  using V = ad::Jet<W, M, 2>;
  const auto base = detail::legendre_inverse_fixed<M>(spec, x, omega);

  Vec<W, M> w, v;
  for (int i = 0; i < M; ++i) {
    w[i] = W::variable(omega[i], i);
    v[i] = W(base.v[i]);
  }
  // Each Newton step doubles the number of exact Taylor orders of v(omega).
  for (int step = 0; step < 3; ++step) {
    Vec<V, M> xv, vv;
    for (int i = 0; i < M; ++i) {
      xv[i] = V(W(x[i]));
      vv[i] = V::variable(v[i], i);
    }
    const V f2 = detail::norm_sq<M, V>(spec, xv, vv);
    Vec<W, M> r;
    Mat<W, M> g;
    for (int i = 0; i < M; ++i) {
      r[i] = f2.d(i) * 0.5 - w[i];
      for (int j = 0; j < M; ++j) g[i][j] = f2.d(i, j) * 0.5;
    }
    const Vec<W, M> dv = matvec<W, W, M>(inverse<W, M>(g), r);
    for (int i = 0; i < M; ++i) v[i] -= dv[i];
  }

  const W f2 = detail::norm_sq<M, W>(spec, lift<W, double, M>(x), v);
  Mat<double, M> h;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) h[i][j] = 0.5 * f2.d(i, j);
  return h;
}

}  // namespace

Vector legendre(const MetricSpec& spec, const Vector& x, const Vector& v) {
  check_covector(spec, x, v, "v");
  if (v.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "Legendre map at v = 0");
  return detail::dispatch(spec.dimension(), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::vertical<M>(spec, to_array<M>(x), to_array<M>(v)).omega);
  });
}

LegendreResult legendre_inverse(const MetricSpec& spec, const Vector& x, const Vector& omega, int max_iter) {
  check_covector(spec, x, omega, "omega");
  if (omega.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "Legendre inverse at omega = 0");
  return detail::dispatch(spec.dimension(), [&](auto m) -> LegendreResult {
    constexpr int M = decltype(m)::value;
    const auto r = detail::legendre_inverse_fixed<M>(spec, to_array<M>(x), to_array<M>(omega), nullptr, max_iter);
    return {to_eigen<M>(r.v), r.residual, r.iterations};
  });
}

double eval_F_star(const MetricSpec& spec, const Vector& x, const Vector& omega) {
  check_covector(spec, x, omega, "omega");
  if (omega.isZero(0.0)) return 0.0;
  return detail::dispatch(spec.dimension(), [&](auto m) -> double {
    constexpr int M = decltype(m)::value;
    const auto xa = to_array<M>(x);
    const auto r = detail::legendre_inverse_fixed<M>(spec, xa, to_array<M>(omega));
    return detail::norm<M, double>(spec, xa, r.v);
  });
}

Matrix dual_fundamental_tensor(const MetricSpec& spec, const Vector& x, const Vector& omega) {
  check_covector(spec, x, omega, "omega");
  if (omega.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "dual fundamental tensor at omega = 0");
  const Matrix g = detail::dispatch(spec.dimension(), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::dual_data<M>(spec, to_array<M>(x), to_array<M>(omega)).g);
  });
  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw Error(ErrorCode::conditioning, "fundamental tensor is ill-conditioned at the Legendre preimage");
  return g.inverse();
}

Matrix co_finsler_hessian(const MetricSpec& spec, const Vector& x, const Vector& omega) {
  check_covector(spec, x, omega, "omega");
  if (omega.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "co-Finsler Hessian at omega = 0");
  return detail::dispatch(spec.dimension(), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(co_hessian<M>(spec, to_array<M>(x), to_array<M>(omega)));
  });
}

}  // namespace finsler
