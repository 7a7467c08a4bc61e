#pragma once

// Closed-form coordinate fields used to declare metrics: matrix fields A(x),
// covector fields b(x), diffeomorphisms, scalar functions and vector fields.
// Every field is a closed set of named built-ins whose evaluation is a
// template over the scalar type, so jets flow through them unchanged.

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "finsler/small_linalg.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Symmetric matrix field x -> A(x).
class MatrixField {
 public:
  struct Constant {
    Matrix value;
  };
  /// A(x) = base + sum_k x^k slopes[k]
  struct Affine {
    Matrix base;
    std::vector<Matrix> slopes;
  };
  /// diag(1, w^2, ..., w^2) with w = 1 + rate * x^1
  struct Warped {
    double rate;
  };
  /// 4 / (1 + K |x|^2)^2 * I, the round metric of curvature K in stereographic coordinates
  struct Sphere {
    double curvature;
  };
  using Variant = std::variant<Constant, Affine, Warped, Sphere>;

  MatrixField() : field_(Constant{Matrix::Identity(2, 2)}) {}
  explicit MatrixField(Variant v) : field_(std::move(v)) {}

  static MatrixField constant(Matrix a) { return MatrixField(Constant{std::move(a)}); }
  static MatrixField affine(Matrix base, std::vector<Matrix> slopes) {
    return MatrixField(Affine{std::move(base), std::move(slopes)});
  }
  static MatrixField warped(double rate) { return MatrixField(Warped{rate}); }
  static MatrixField sphere(double curvature) { return MatrixField(Sphere{curvature}); }

  const Variant& variant() const { return field_; }
  bool is_constant() const { return std::holds_alternative<Constant>(field_); }

  /// Dimension fixed by the field's data, or -1 for dimension-agnostic fields.
  int intrinsic_dimension() const;
  std::string describe() const;

  template <int M, class X>
  Mat<X, M> evaluate(const Vec<X, M>& x) const;

  Matrix operator()(const Vector& x) const;

 private:
  Variant field_;
};

/// Covector field x -> b(x).
class CovectorField {
 public:
  struct Constant {
    Vector value;
  };
  /// b(x) = base + slope * x
  struct Affine {
    Vector base;
    Matrix slope;
  };
  using Variant = std::variant<Constant, Affine>;

  CovectorField() : field_(Constant{Vector::Zero(2)}) {}
  explicit CovectorField(Variant v) : field_(std::move(v)) {}

  static CovectorField constant(Vector b) { return CovectorField(Constant{std::move(b)}); }
  static CovectorField affine(Vector base, Matrix slope) {
    return CovectorField(Affine{std::move(base), std::move(slope)});
  }

  const Variant& variant() const { return field_; }
  bool is_constant() const { return std::holds_alternative<Constant>(field_); }
  int intrinsic_dimension() const;
  std::string describe() const;

  template <int M, class X>
  Vec<X, M> evaluate(const Vec<X, M>& x) const;

  Vector operator()(const Vector& x) const;

 private:
  Variant field_;
};

/// A diffeomorphism of coordinate space with its inverse and Jacobian.
class DiffeoSpec {
 public:
  struct Identity {};
  /// x -> linear * x + offset; `inverse_linear` is stored, not recomputed.
  struct Affine {
    Matrix linear;
    Vector offset;
    Matrix inverse_linear;
  };
  /// x^t -> x^t + c (x^s)^2; the inverse subtracts inverse_c (y^s)^2.
  struct QuadraticShear {
    int target;
    int source;
    double c;
    double inverse_c;
  };
  /// x^t -> x^t + c sin(x^s); the inverse subtracts inverse_c sin(y^s).
  struct SineShear {
    int target;
    int source;
    double c;
    double inverse_c;
  };
  using Variant = std::variant<Identity, Affine, QuadraticShear, SineShear>;

  DiffeoSpec() : map_(Identity{}) {}
  explicit DiffeoSpec(Variant v) : map_(std::move(v)) {}

  static DiffeoSpec identity() { return DiffeoSpec(Identity{}); }
  static DiffeoSpec affine(const Matrix& linear, const Vector& offset);
  static DiffeoSpec quadratic_shear(int target, int source, double c) {
    return DiffeoSpec(QuadraticShear{target, source, c, c});
  }
  static DiffeoSpec sine_shear(int target, int source, double c) {
    return DiffeoSpec(SineShear{target, source, c, c});
  }

  const Variant& variant() const { return map_; }
  int intrinsic_dimension() const;
  std::string describe() const;

  template <int M, class X>
  Vec<X, M> forward(const Vec<X, M>& x) const;

  /// Closed-form Jacobian dI(x).
  template <int M, class X>
  Mat<X, M> jacobian(const Vec<X, M>& x) const;

  Vector forward(const Vector& x) const;
  Vector inverse(const Vector& y) const;
  Matrix jacobian(const Vector& x) const;

 private:
  Variant map_;
};

/// Closed-form scalar function on coordinate space.
class ScalarFunction {
 public:
  struct Term {
    double coefficient;
    std::vector<int> powers;
  };
  struct Polynomial {
    std::vector<Term> terms;
  };
  /// exp(rate x^1) cos(rate x^2), harmonic for the Euclidean Laplacian.
  struct HarmonicExp {
    double rate;
  };
  using Variant = std::variant<Polynomial, HarmonicExp>;

  ScalarFunction() : f_(Polynomial{}) {}
  explicit ScalarFunction(Variant v) : f_(std::move(v)) {}

  static ScalarFunction polynomial(std::vector<Term> terms) {
    return ScalarFunction(Polynomial{std::move(terms)});
  }
  /// The coordinate function x^index (zero-based) in dimension dim.
  static ScalarFunction coordinate(int index, int dim);
  static ScalarFunction constant(double value, int dim);
  static ScalarFunction harmonic_exp(double rate) { return ScalarFunction(HarmonicExp{rate}); }

  const Variant& variant() const { return f_; }

  template <int M, class X>
  X evaluate(const Vec<X, M>& x) const;

  double operator()(const Vector& x) const;

 private:
  Variant f_;
};

/// Vector field given componentwise by scalar functions.
struct VectorField {
  std::vector<ScalarFunction> components;

  template <int M, class X>
  Vec<X, M> evaluate(const Vec<X, M>& x) const {
    Vec<X, M> r;
    for (int i = 0; i < M; ++i) r[i] = components[i].evaluate<M>(x);
    return r;
  }

  /// V(x) = c + B x
  static VectorField affine(const Vector& c, const Matrix& b);
};

// ---------------------------------------------------------------------------

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

template <int M, class X>
Mat<X, M> MatrixField::evaluate(const Vec<X, M>& x) const {
  return std::visit(
      overloaded{
          [&](const Constant& c) {
            Mat<X, M> a;
            for (int i = 0; i < M; ++i)
              for (int j = 0; j < M; ++j) a[i][j] = X(c.value(i, j));
            return a;
          },
          [&](const Affine& f) {
            Mat<X, M> a;
            for (int i = 0; i < M; ++i)
              for (int j = 0; j < M; ++j) {
                a[i][j] = X(f.base(i, j));
                for (int k = 0; k < M; ++k) a[i][j] += x[k] * f.slopes[k](i, j);
              }
            return a;
          },
          [&](const Warped& f) {
            Mat<X, M> a = zero_mat<X, M>();
            const X w = x[0] * f.rate + 1.0;
            a[0][0] = X(1.0);
            for (int i = 1; i < M; ++i) a[i][i] = w * w;
            return a;
          },
          [&](const Sphere& f) {
            Mat<X, M> a = zero_mat<X, M>();
            const X lambda = 2.0 / (dot<X, M>(x, x) * f.curvature + 1.0);
            const X l2 = lambda * lambda;
            for (int i = 0; i < M; ++i) a[i][i] = l2;
            return a;
          },
      },
      field_);
}

template <int M, class X>
Vec<X, M> CovectorField::evaluate(const Vec<X, M>& x) const {
  return std::visit(overloaded{
                        [&](const Constant& c) {
                          Vec<X, M> b;
                          for (int i = 0; i < M; ++i) b[i] = X(c.value[i]);
                          return b;
                        },
                        [&](const Affine& f) {
                          Vec<X, M> b;
                          for (int i = 0; i < M; ++i) {
                            b[i] = X(f.base[i]);
                            for (int k = 0; k < M; ++k) b[i] += x[k] * f.slope(i, k);
                          }
                          return b;
                        },
                    },
                    field_);
}

template <int M, class X>
Vec<X, M> DiffeoSpec::forward(const Vec<X, M>& x) const {
  using std::sin;
  return std::visit(overloaded{
                        [&](const Identity&) { return x; },
                        [&](const Affine& f) {
                          Vec<X, M> y;
                          for (int i = 0; i < M; ++i) {
                            y[i] = X(f.offset[i]);
                            for (int j = 0; j < M; ++j) y[i] += x[j] * f.linear(i, j);
                          }
                          return y;
                        },
                        [&](const QuadraticShear& f) {
                          Vec<X, M> y = x;
                          y[f.target] += x[f.source] * x[f.source] * f.c;
                          return y;
                        },
                        [&](const SineShear& f) {
                          Vec<X, M> y = x;
                          y[f.target] += sin(x[f.source]) * f.c;
                          return y;
                        },
                    },
                    map_);
}

template <int M, class X>
Mat<X, M> DiffeoSpec::jacobian(const Vec<X, M>& x) const {
  using std::cos;
  return std::visit(overloaded{
                        [&](const Identity&) { return identity_mat<X, M>(); },
                        [&](const Affine& f) {
                          Mat<X, M> j;
                          for (int r = 0; r < M; ++r)
                            for (int c = 0; c < M; ++c) j[r][c] = X(f.linear(r, c));
                          return j;
                        },
                        [&](const QuadraticShear& f) {
                          Mat<X, M> j = identity_mat<X, M>();
                          j[f.target][f.source] += x[f.source] * (2.0 * f.c);
                          return j;
                        },
                        [&](const SineShear& f) {
                          Mat<X, M> j = identity_mat<X, M>();
                          j[f.target][f.source] += cos(x[f.source]) * f.c;
                          return j;
                        },
                    },
                    map_);
}

template <int M, class X>
X ScalarFunction::evaluate(const Vec<X, M>& x) const {
  using std::cos;
  using std::exp;
  return std::visit(overloaded{
                        [&](const Polynomial& p) {
                          X sum = X(0.0);
                          for (const auto& term : p.terms) {
                            X t = X(term.coefficient);
                            for (int i = 0; i < M && i < static_cast<int>(term.powers.size()); ++i)
                              if (term.powers[i] > 0) t = t * ad::ipow(x[i], term.powers[i]);
                            sum += t;
                          }
                          return sum;
                        },
                        [&](const HarmonicExp& h) { return exp(x[0] * h.rate) * cos(x[1] * h.rate); },
                    },
                    f_);
}

}  // namespace finsler
