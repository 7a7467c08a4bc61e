#pragma once

// Metric families shared by the unit tests and the acceptance suite.

#include <string>
#include <vector>

#include "finsler/core.hpp"
#include "finsler/metric.hpp"

namespace fam {

using finsler::CovectorField;
using finsler::DiffeoSpec;
using finsler::Matrix;
using finsler::MatrixField;
using finsler::MetricSpec;
using finsler::Vector;

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline Matrix diag(std::initializer_list<double> xs) { return vec(xs).asDiagonal(); }

inline MetricSpec euclidean(int m = 2) { return MetricSpec::euclidean(m); }

inline MetricSpec riemannian_diag14() { return MetricSpec::riemannian(2, MatrixField::constant(diag({1, 4}))); }

/// diag(1, (1 + c x^1)^2)
inline MetricSpec riemannian_warped(double c = 0.1) { return MetricSpec::riemannian(2, MatrixField::warped(c)); }

/// Round sphere of curvature K in stereographic coordinates.
inline MetricSpec sphere(int m = 2, double k = 1.0) { return MetricSpec::riemannian(m, MatrixField::sphere(k)); }

inline MetricSpec randers_const(double b1 = 0.5) {
  return MetricSpec::randers(2, MatrixField::constant(Matrix::Identity(2, 2)), CovectorField::constant(vec({b1, 0})));
}

inline MetricSpec locally_minkowski(int m = 2) {
  Vector b = Vector::Zero(m);
  b[0] = 0.5;
  return MetricSpec::locally_minkowski(Matrix::Identity(m, m), b);
}

/// Randers with b(x) = (b0 + slope * x^2, 0) on the Euclidean A.
inline MetricSpec randers_x(double b0 = 0.3, double slope = 0.1) {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 1) = slope;
  return MetricSpec::randers(2, MatrixField::constant(Matrix::Identity(2, 2)),
                             CovectorField::affine(vec({b0, 0}), s));
}

inline MetricSpec randers_nonparallel() { return randers_x(0.3, 0.2); }

/// Quadratic shear (x^1, x^2) -> (x^1 + c (x^2)^2, x^2) of the Minkowski Randers norm.
inline MetricSpec pullback_flat(double c = 0.1, int m = 2) {
  return finsler::pullback_metric(locally_minkowski(m), DiffeoSpec::quadratic_shear(0, 1, c));
}

struct Named {
  std::string name;
  MetricSpec spec;
};

/// The five families used for the core identity suite.
inline std::vector<Named> core_families() {
  return {{"euclidean", euclidean()},
          {"riemannian", riemannian_warped()},
          {"randers", randers_x()},
          {"locally-minkowski", locally_minkowski()},
          {"pullback", pullback_flat()}};
}

/// Every shipped family, including the curved and three-dimensional ones.
inline std::vector<Named> all_families() {
  auto out = core_families();
  out.push_back({"riemannian-diag", riemannian_diag14()});
  out.push_back({"sphere", sphere()});
  out.push_back({"randers-const", randers_const()});
  out.push_back({"randers-nonparallel", randers_nonparallel()});
  out.push_back({"euclidean-3d", euclidean(3)});
  out.push_back({"sphere-3d", sphere(3)});
  out.push_back({"pullback-3d", pullback_flat(0.1, 3)});
  return out;
}

}  // namespace fam
