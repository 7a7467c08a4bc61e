#include "finsler/metric.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "finsler/detail/fixed.hpp"

namespace finsler {
namespace {

std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

std::vector<Vector> grid_points(const SampleGrid& grid) {
  const int dim = grid.box.dimension();
  const int n = std::max(grid.per_axis, 1);
  std::vector<Vector> points;
  std::vector<int> idx(dim, 0);
  for (;;) {
    Vector p(dim);
    for (int k = 0; k < dim; ++k) {
      const double t = n == 1 ? 0.5 : static_cast<double>(idx[k]) / (n - 1);
      p[k] = grid.box.lo[k] + t * (grid.box.hi[k] - grid.box.lo[k]);
    }
    points.push_back(p);
    int k = 0;
    while (k < dim && ++idx[k] == n) idx[k++] = 0;
    if (k == dim) break;
  }
  return points;
}

bool is_spd(const Matrix& a) {
  if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))
    return false;
  Eigen::LLT<Matrix> llt(a);
  return llt.info() == Eigen::Success;
}

/// The A^{-1}-norm of b, or +inf when A is not SPD.
double covector_norm(const Matrix& a, const Vector& b) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return INFINITY;
  return std::sqrt(b.dot(llt.solve(b)));
}

void check_field_dimension(int field_dim, int dim, const char* what) {
  if (field_dim >= 0 && field_dim != dim)
    throw Error(ErrorCode::invalid_input,
                std::string(what) + " has dimension " + std::to_string(field_dim) + ", metric has " + std::to_string(dim));
}

DiffeoAudit audit_diffeo_points(const DiffeoSpec& diffeo, const std::vector<Vector>& points) {
  DiffeoAudit a;
  a.min_abs_det = INFINITY;
  for (const auto& x : points) {
    a.max_roundtrip = std::max(a.max_roundtrip, (diffeo.inverse(diffeo.forward(x)) - x).cwiseAbs().maxCoeff());
    a.max_roundtrip = std::max(a.max_roundtrip, (diffeo.forward(diffeo.inverse(x)) - x).cwiseAbs().maxCoeff());
    const Matrix j = diffeo.jacobian(x);
    a.min_abs_det = std::min(a.min_abs_det, std::abs(j.determinant()));
    const double h = 1e-6;
    for (int c = 0; c < x.size(); ++c) {
      Vector e = Vector::Zero(x.size());
      e[c] = h;
      const Vector fd = (diffeo.forward(x + e) - diffeo.forward(x - e)) / (2 * h);
      a.max_jacobian_error = std::max(a.max_jacobian_error, (fd - j.col(c)).cwiseAbs().maxCoeff());
    }
  }
  return a;
}

void audit_points(const MetricSpec& spec, const std::vector<Vector>& points, std::vector<std::string>& out) {
  std::visit(overloaded{
                 [&](const MetricSpec::Euclidean&) {},
                 [&](const MetricSpec::Riemannian& r) {
                   for (const auto& x : points) {
                     if (!is_spd(r.a(x))) {
                       out.push_back("A(x) is not symmetric positive definite at x=" + format_point(x));
                       return;
                     }
                   }
                 },
                 [&](const MetricSpec::Randers& r) {
                   for (const auto& x : points) {
                     const Matrix a = r.a(x);
                     if (!is_spd(a)) {
                       out.push_back("A(x) is not symmetric positive definite at x=" + format_point(x));
                       return;
                     }
                     const double nb = covector_norm(a, r.b(x));
                     if (!(nb < 1.0)) {
                       std::ostringstream os;
                       os << "strong convexity violated: |b|_A = " << nb << " >= 1 at x=" << format_point(x);
                       out.push_back(os.str());
                       return;
                     }
                   }
                 },
                 [&](const MetricSpec::LocallyMinkowski& n) {
                   if (!is_spd(n.a)) {
                     out.push_back("A is not symmetric positive definite");
                     return;
                   }
                   const double nb = covector_norm(n.a, n.b);
                   if (!(nb < 1.0)) {
                     std::ostringstream os;
                     os << "strong convexity violated: |b|_A = " << nb << " >= 1";
                     out.push_back(os.str());
                   }
                 },
                 [&](const MetricSpec::Pullback& p) {
                   const DiffeoAudit a = audit_diffeo_points(p.diffeo, points);
                   if (a.max_roundtrip > 1e-8) {
                     std::ostringstream os;
                     os << "diffeomorphism inverse is inconsistent: max round-trip error " << a.max_roundtrip;
                     out.push_back(os.str());
                   }
                   if (a.max_jacobian_error > 1e-5) {
                     std::ostringstream os;
                     os << "diffeomorphism Jacobian disagrees with finite differences by " << a.max_jacobian_error;
                     out.push_back(os.str());
                   }
                   if (!(a.min_abs_det > 1e-12)) out.push_back("diffeomorphism Jacobian is singular at a sampled point");
                   std::vector<Vector> images;
                   for (const auto& x : points) images.push_back(p.diffeo.forward(x));
                   audit_points(*p.inner, images, out);
                 },
             },
             spec.kind());
}

}  // namespace

MetricSpec MetricSpec::euclidean(int dim) {
  if (dim != 2 && dim != 3)
    throw Error(ErrorCode::unsupported_dimension, "dimension " + std::to_string(dim) + " is not supported");
  return MetricSpec(dim, Euclidean{});
}

MetricSpec MetricSpec::unchecked(int dim, Kind kind) {
  if (dim != 2 && dim != 3)
    throw Error(ErrorCode::unsupported_dimension, "dimension " + std::to_string(dim) + " is not supported");
  std::visit(overloaded{
                 [&](const Euclidean&) {},
                 [&](const Riemannian& r) { check_field_dimension(r.a.intrinsic_dimension(), dim, "A(x)"); },
                 [&](const Randers& r) {
                   check_field_dimension(r.a.intrinsic_dimension(), dim, "A(x)");
                   check_field_dimension(r.b.intrinsic_dimension(), dim, "b(x)");
                 },
                 [&](const LocallyMinkowski& n) {
                   check_field_dimension(static_cast<int>(n.a.rows()), dim, "A");
                   check_field_dimension(static_cast<int>(n.b.size()), dim, "b");
                 },
                 [&](const Pullback& p) {
                   if (!p.inner) throw Error(ErrorCode::invalid_input, "pullback without an inner metric");
                   check_field_dimension(p.inner->dimension(), dim, "inner metric");
                   check_field_dimension(p.diffeo.intrinsic_dimension(), dim, "diffeomorphism");
                 },
             },
             kind);
  return MetricSpec(dim, std::move(kind));
}

namespace {
MetricSpec checked(int dim, MetricSpec::Kind kind, const SampleGrid& grid) {
  MetricSpec spec = MetricSpec::unchecked(dim, std::move(kind));
  const auto diagnostics = spec.audit(grid);
  if (!diagnostics.empty()) throw Error(ErrorCode::metric_invalid, diagnostics.front());
  return spec;
}
}  // namespace

MetricSpec MetricSpec::riemannian(int dim, MatrixField a, const SampleGrid& grid) {
  return checked(dim, Riemannian{std::move(a)}, grid);
}

MetricSpec MetricSpec::riemannian(int dim, MatrixField a) {
  return riemannian(dim, std::move(a), SampleGrid::cube(dim));
}

MetricSpec MetricSpec::randers(int dim, MatrixField a, CovectorField b, const SampleGrid& grid) {
  return checked(dim, Randers{std::move(a), std::move(b)}, grid);
}

MetricSpec MetricSpec::randers(int dim, MatrixField a, CovectorField b) {
  return randers(dim, std::move(a), std::move(b), SampleGrid::cube(dim));
}

MetricSpec MetricSpec::locally_minkowski(Matrix a, Vector b) {
  const int dim = static_cast<int>(a.rows());
  return checked(dim, LocallyMinkowski{std::move(a), std::move(b)}, SampleGrid::cube(dim, 1.0, 1));
}

std::string MetricSpec::name() const {
  return std::visit(overloaded{
                        [](const Euclidean&) { return std::string("euclidean"); },
                        [](const Riemannian&) { return std::string("riemannian"); },
                        [](const Randers&) { return std::string("randers"); },
                        [](const LocallyMinkowski&) { return std::string("locally-minkowski"); },
                        [](const Pullback& p) { return "pullback(" + p.inner->name() + ")"; },
                    },
                    kind_);
}

std::vector<std::string> MetricSpec::audit(const SampleGrid& grid) const {
  if (grid.box.dimension() != dim_)
    throw Error(ErrorCode::invalid_input, "audit grid dimension does not match the metric");
  std::vector<std::string> out;
  audit_points(*this, grid_points(grid), out);
  return out;
}

void MetricSpec::require_convex_at(const Vector& x) const {
  double nb = 0.0;
  if (const auto* r = std::get_if<Randers>(&kind_)) {
    nb = covector_norm(r->a(x), r->b(x));
  } else if (const auto* p = std::get_if<Pullback>(&kind_)) {
    p->inner->require_convex_at(p->diffeo.forward(x));
  }
  if (!(nb < 1.0)) {
    std::ostringstream os;
    os << "strong convexity violated: |b|_A = " << nb << " >= 1 at x=" << format_point(x);
    throw Error(ErrorCode::metric_invalid, os.str());
  }
}

DiffeoAudit audit_diffeo(const DiffeoSpec& diffeo, const SampleGrid& grid) {
  return audit_diffeo_points(diffeo, grid_points(grid));
}

}  // namespace finsler
