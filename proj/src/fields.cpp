#include "finsler/fields.hpp"

#include <sstream>

#include <Eigen/LU>

#include "finsler/detail/fixed.hpp"

namespace finsler {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::metric_invalid: return "metric-invalid";
    case ErrorCode::degenerate_direction: return "degenerate-direction";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::conditioning: return "conditioning";
    case ErrorCode::pullback_degenerate: return "pullback-degenerate";
    case ErrorCode::not_berwald: return "not-berwald";
    case ErrorCode::chart_degenerate: return "chart-degenerate";
    case ErrorCode::unsupported_dimension: return "unsupported-dimension";
  }
  return "unknown";
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorCode::invalid_input, std::string(what) + " has non-finite components");
}

void require_dimension(const Vector& v, int dim, const char* what) {
  if (v.size() != dim)
    throw Error(ErrorCode::invalid_input, std::string(what) + " has " + std::to_string(v.size()) +
                                              " components, expected " + std::to_string(dim));
}

int MatrixField::intrinsic_dimension() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return static_cast<int>(c.value.rows()); },
                        [](const Affine& a) { return static_cast<int>(a.base.rows()); },
                        [](const Warped&) { return -1; },
                        [](const Sphere&) { return -1; },
                    },
                    field_);
}

std::string MatrixField::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Constant&) { os << "constant"; },
                 [&](const Affine&) { os << "affine"; },
                 [&](const Warped& w) { os << "warped(rate=" << w.rate << ")"; },
                 [&](const Sphere& s) { os << "sphere(curvature=" << s.curvature << ")"; },
             },
             field_);
  return os.str();
}

Matrix MatrixField::operator()(const Vector& x) const {
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(evaluate<M, double>(to_array<M>(x)));
  });
}

int CovectorField::intrinsic_dimension() const {
  return std::visit(overloaded{
                        [](const Constant& c) { return static_cast<int>(c.value.size()); },
                        [](const Affine& a) { return static_cast<int>(a.base.size()); },
                    },
                    field_);
}

std::string CovectorField::describe() const { return is_constant() ? "constant" : "affine"; }

Vector CovectorField::operator()(const Vector& x) const {
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(evaluate<M, double>(to_array<M>(x)));
  });
}

DiffeoSpec DiffeoSpec::affine(const Matrix& linear, const Vector& offset) {
  Eigen::FullPivLU<Matrix> lu(linear);
  if (!lu.isInvertible()) throw Error(ErrorCode::pullback_degenerate, "affine map has a singular linear part");
  return DiffeoSpec(Affine{linear, offset, lu.inverse()});
}

int DiffeoSpec::intrinsic_dimension() const {
  if (const auto* a = std::get_if<Affine>(&map_)) return static_cast<int>(a->linear.rows());
  return -1;
}

std::string DiffeoSpec::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Identity&) { os << "identity"; },
                 [&](const Affine&) { os << "affine"; },
                 [&](const QuadraticShear& s) { os << "quadratic-shear(c=" << s.c << ")"; },
                 [&](const SineShear& s) { os << "sine-shear(c=" << s.c << ")"; },
             },
             map_);
  return os.str();
}

Vector DiffeoSpec::forward(const Vector& x) const {
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(forward<M, double>(to_array<M>(x)));
  });
}

Matrix DiffeoSpec::jacobian(const Vector& x) const {
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(jacobian<M, double>(to_array<M>(x)));
  });
}

Vector DiffeoSpec::inverse(const Vector& y) const {
  return std::visit(overloaded{
                        [&](const Identity&) -> Vector { return y; },
                        [&](const Affine& f) -> Vector { return f.inverse_linear * (y - f.offset); },
                        [&](const QuadraticShear& f) -> Vector {
                          Vector x = y;
                          x[f.target] -= f.inverse_c * y[f.source] * y[f.source];
                          return x;
                        },
                        [&](const SineShear& f) -> Vector {
                          Vector x = y;
                          x[f.target] -= f.inverse_c * std::sin(y[f.source]);
                          return x;
                        },
                    },
                    map_);
}

ScalarFunction ScalarFunction::coordinate(int index, int dim) {
  std::vector<int> powers(dim, 0);
  powers[index] = 1;
  return polynomial({{1.0, powers}});
}

ScalarFunction ScalarFunction::constant(double value, int dim) {
  return polynomial({{value, std::vector<int>(dim, 0)}});
}

double ScalarFunction::operator()(const Vector& x) const {
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> double {
    constexpr int M = decltype(m)::value;
    return evaluate<M, double>(to_array<M>(x));
  });
}

VectorField VectorField::affine(const Vector& c, const Matrix& b) {
  const int dim = static_cast<int>(c.size());
  VectorField field;
  for (int i = 0; i < dim; ++i) {
    std::vector<ScalarFunction::Term> terms{{c[i], std::vector<int>(dim, 0)}};
    for (int j = 0; j < dim; ++j) {
      if (b(i, j) == 0.0) continue;
      std::vector<int> powers(dim, 0);
      powers[j] = 1;
      terms.push_back({b(i, j), powers});
    }
    field.components.push_back(ScalarFunction::polynomial(std::move(terms)));
  }
  return field;
}

}  // namespace finsler
