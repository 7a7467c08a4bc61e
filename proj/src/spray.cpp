#include "finsler/spray.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "finsler/detail/spray_fixed.hpp"

namespace finsler {
namespace {

void check_phase_point(const MetricSpec& spec, const Vector& x, const Vector& y) {
  require_dimension(x, spec.dimension(), "x");
  require_dimension(y, spec.dimension(), "y");
  require_finite(x, "x");
  require_finite(y, "y");
  if (y.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "spray data at y = 0");
  spec.require_convex_at(x);
}

template <int M, int K>
Matrix second_y(const detail::PhaseJet<M, K>& j) {
  Matrix out(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) out(a, b) = ad::scalar(j.d(M + a, M + b));
  return out;
}

template <int M>
Tensor3 christoffel_at(const MetricSpec& spec, const Vec<double, M>& x, const Vec<double, M>& y) {
  const auto G = detail::spray_jet<M, 2>(spec, x, y);
  Tensor3 out(M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k) out(i, j, k) = G[i].d(M + j, M + k);
  return out;
}

template <int M>
Tensor3 checked_christoffel(const MetricSpec& spec, const Vec<double, M>& x, double tol) {
  const auto probes = detail::probe_directions<M>();
  const Tensor3 ref = christoffel_at<M>(spec, x, probes[0]);
  double spread = 0.0;
  for (std::size_t p = 1; p < probes.size(); ++p) {
    const Tensor3 other = christoffel_at<M>(spec, x, probes[p]);
    for (std::size_t n = 0; n < ref.data.size(); ++n) spread = std::max(spread, std::abs(other.data[n] - ref.data[n]));
  }
  if (spread > tol * (1.0 + ref.max_abs())) {
    std::ostringstream os;
    os << "connection is not linear in y: Christoffel symbols vary by " << spread << " across directions at x=(";
    for (int i = 0; i < M; ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    throw Error(ErrorCode::not_berwald, os.str(), spread);
  }
  return ref;
}

}  // namespace

double Tensor3::max_abs() const {
  double r = 0.0;
  for (double v : data) r = std::max(r, std::abs(v));
  return r;
}

double Tensor4::max_abs() const {
  double r = 0.0;
  for (double v : data) r = std::max(r, std::abs(v));
  return r;
}

SprayData spray(const MetricSpec& spec, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> SprayData {
    constexpr int M = decltype(m)::value;
    const auto G = detail::spray_jet<M, 1>(spec, to_array<M>(x), to_array<M>(y));
    SprayData out{x, y, Vector(M), Matrix(M, M)};
    for (int i = 0; i < M; ++i) {
      out.G[i] = G[i].value();
      for (int j = 0; j < M; ++j) out.N(i, j) = G[i].d(M + j);
    }
    return out;
  });
}

SprayDerivatives spray_derivatives(const MetricSpec& spec, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> SprayDerivatives {
    constexpr int M = decltype(m)::value;
    const auto G = detail::spray_jet<M, 2>(spec, to_array<M>(x), to_array<M>(y));
    SprayDerivatives out{Matrix(M, M), Matrix(M, M), std::vector<Matrix>(M, Matrix(M, M)),
                         std::vector<Matrix>(M, Matrix(M, M))};
    for (int i = 0; i < M; ++i)
      for (int a = 0; a < M; ++a) {
        out.dx(i, a) = G[i].d(a);
        out.dy(i, a) = G[i].d(M + a);
        for (int b = 0; b < M; ++b) {
          out.dxdy[i](a, b) = G[i].d(a, M + b);
          out.dydy[i](a, b) = G[i].d(M + a, M + b);
        }
      }
    return out;
  });
}

CurvatureData riemann_curvature(const MetricSpec& spec, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> CurvatureData {
    constexpr int M = decltype(m)::value;
    const auto ya = to_array<M>(y);
    const auto R = detail::curvature_jet<M, 2>(detail::spray_jet<M, 2>(spec, to_array<M>(x), ya), ya);
    CurvatureData out{x, y, Matrix(M, M), 0.0};
    for (int i = 0; i < M; ++i)
      for (int k = 0; k < M; ++k) out.Rk(i, k) = R[i][k].value();
    for (int i = 0; i < M; ++i) out.ricci_scalar += out.Rk(i, i);
    return out;
  });
}

Matrix ricci_scalar_hessian(const MetricSpec& spec, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    const auto ya = to_array<M>(y);
    const auto R = detail::curvature_jet<M, 4>(detail::spray_jet<M, 4>(spec, to_array<M>(x), ya), ya);
    auto trace = R[0][0];
    for (int i = 1; i < M; ++i) trace += R[i][i];
    return 0.5 * second_y<M, 2>(trace);
  });
}

// ---------------------------------------------------------------------------

Connection Connection::nonlinear(const MetricSpec& spec) { return Connection(spec, Mode::nonlinear, 0.0); }

Connection Connection::berwald(const MetricSpec& spec, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_input, "Berwald tolerance must be positive");
  return Connection(spec, Mode::berwald_linear, tol);
}

Matrix Connection::N(const Vector& x, const Vector& y) const {
  const int m = spec_.dimension();
  if (y.isZero(0.0)) return Matrix::Zero(m, m);
  if (mode_ == Mode::nonlinear) return spray(spec_, x, y).N;
  const Tensor3 gamma = christoffel(x);
  Matrix out = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) out(i, j) += gamma(i, j, k) * y[k];
  return out;
}

Tensor3 Connection::christoffel(const Vector& x) const {
  if (mode_ != Mode::berwald_linear)
    throw Error(ErrorCode::not_berwald, "Christoffel symbols requested from a nonlinear connection");
  require_dimension(x, spec_.dimension(), "x");
  require_finite(x, "x");
  spec_.require_convex_at(x);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Tensor3 {
    constexpr int M = decltype(m)::value;
    return checked_christoffel<M>(spec_, to_array<M>(x), tol_);
  });
}

Tensor4 Connection::christoffel_derivative(const Vector& x) const {
  christoffel(x);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Tensor4 {
    constexpr int M = decltype(m)::value;
    using J = detail::PhaseJet<M, 3>;
    const auto G = detail::spray_jet<M, 3>(spec_, to_array<M>(x), detail::probe_directions<M>()[0]);
    Tensor4 out(M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int k = 0; k < M; ++k)
          for (int l = 0; l < M; ++l) {
            typename J::Tables::Exponents e{};
            e[l] += 1;
            e[M + j] += 1;
            e[M + k] += 1;
            out(i, j, k, l) = G[i].partial(e);
          }
    return out;
  });
}

Tensor4 chern_from_berwald(const Connection& conn, const Vector& x) {
  if (conn.mode() != Connection::Mode::berwald_linear)
    throw Error(ErrorCode::not_berwald, "Chern curvature needs a Berwald-linear connection");
  const Tensor3 gam = conn.christoffel(x);
  const Tensor4 dg = conn.christoffel_derivative(x);
  const int m = gam.m;
  Tensor4 r(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          double s = dg(i, j, l, k) - dg(i, j, k, l);
          for (int n = 0; n < m; ++n) s += gam(n, j, l) * gam(i, n, k) - gam(n, j, k) * gam(i, n, l);
          r(i, j, k, l) = s;
        }
  return r;
}

Vector covariant_derivative(const Connection& conn, const VectorField& v, const Vector& x, const Vector& y) {
  const MetricSpec& spec = conn.spec();
  require_dimension(x, spec.dimension(), "x");
  require_dimension(y, spec.dimension(), "y");
  if (y.isZero(0.0)) return Vector::Zero(spec.dimension());
  const Matrix n = conn.N(x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    using J = ad::Jet<double, M, 1>;
    Vec<J, M> xj;
    for (int i = 0; i < M; ++i) xj[i] = J::variable(x[i], i);
    const Vec<J, M> vj = v.evaluate<M, J>(xj);
    Vector out(M), val(M);
    for (int i = 0; i < M; ++i) {
      val[i] = vj[i].value();
      out[i] = 0.0;
      for (int k = 0; k < M; ++k) out[i] += vj[i].d(k) * y[k];
    }
    return out + n * val;
  });
}

double horizontal_laplacian(const MetricSpec& spec, const ScalarFunction& f, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  const Matrix n = Connection::berwald(spec).N(x, y);
  return detail::dispatch(spec.dimension(), [&](auto m) -> double {
    constexpr int M = decltype(m)::value;
    using J = detail::PhaseJet<M, 1>;
    using J2 = detail::PhaseJet<M, 2>;
    const auto xa = to_array<M>(x);
    const auto pm = detail::phase_metric<M, 1>(spec, xa, to_array<M>(y));
    const J2 fj = f.evaluate<M, J2>(detail::phase_variables<M, 2>(xa, 0));
    Vec<J, M> df;
    for (int j = 0; j < M; ++j) df[j] = ad::derivative(fj, j);

    using ad::sqrt;
    const J root = sqrt(determinant<J, M>(pm.g));
    const Vec<J, M> w = matvec<J, J, M>(inverse<J, M>(pm.g), df);
    double div = 0.0;
    for (int i = 0; i < M; ++i) {
      const J wi = root * w[i];
      div += wi.d(i);
      for (int k = 0; k < M; ++k) div -= n(k, i) * wi.d(M + k);
    }
    return div / root.value();
  });
}

double hessian_trace(const MetricSpec& spec, const ScalarFunction& f, const Vector& x, const Vector& y) {
  check_phase_point(spec, x, y);
  const Tensor3 gam = Connection::berwald(spec).christoffel(x);
  return detail::dispatch(spec.dimension(), [&](auto m) -> double {
    constexpr int M = decltype(m)::value;
    using J = ad::Jet<double, M, 2>;
    const auto g = detail::vertical<M>(spec, to_array<M>(x), to_array<M>(y)).g;
    const auto gi = inverse<double, M>(g);
    Vec<J, M> xj;
    for (int i = 0; i < M; ++i) xj[i] = J::variable(x[i], i);
    const J fj = f.evaluate<M, J>(xj);
    double s = 0.0;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double hij = fj.d(i, j);
        for (int k = 0; k < M; ++k) hij -= fj.d(k) * gam(k, i, j);
        s += gi[i][j] * hij;
      }
    return s;
  });
}

}  // namespace finsler
