#pragma once

#include <vector>

#include "finsler/fields.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Dense m^3 array, index (i, j, k) with i the upper index.
struct Tensor3 {
  int m = 0;
  std::vector<double> data;

  Tensor3() = default;
  explicit Tensor3(int dim) : m(dim), data(static_cast<std::size_t>(dim * dim * dim), 0.0) {}
  double& operator()(int i, int j, int k) { return data[(i * m + j) * m + k]; }
  double operator()(int i, int j, int k) const { return data[(i * m + j) * m + k]; }
  double max_abs() const;
};

/// Dense m^4 array, index (i, j, k, l).
struct Tensor4 {
  int m = 0;
  std::vector<double> data;

  Tensor4() = default;
  explicit Tensor4(int dim) : m(dim), data(static_cast<std::size_t>(dim * dim * dim * dim), 0.0) {}
  double& operator()(int i, int j, int k, int l) { return data[((i * m + j) * m + k) * m + l]; }
  double operator()(int i, int j, int k, int l) const { return data[((i * m + j) * m + k) * m + l]; }
  double max_abs() const;
};

struct SprayData {
  Vector x;
  Vector y;
  Vector G;  // G^i = 1/4 g^{ij} (F^2_{x^k y^j} y^k - F^2_{x^j})
  Matrix N;  // N^i_j = dG^i/dy^j
};

/// Exact first and second derivatives of G, for cross-checks.
struct SprayDerivatives {
  Matrix dx;              // dG^i/dx^k, (i, k)
  Matrix dy;              // dG^i/dy^k, (i, k)
  std::vector<Matrix> dxdy;  // [i](m, k): d^2 G^i / dx^m dy^k
  std::vector<Matrix> dydy;  // [i](m, k): d^2 G^i / dy^m dy^k
};

struct CurvatureData {
  Vector x;
  Vector y;
  Matrix Rk;  // R^i_k
  double ricci_scalar = 0.0;
};

SprayData spray(const MetricSpec& spec, const Vector& x, const Vector& y);
SprayDerivatives spray_derivatives(const MetricSpec& spec, const Vector& x, const Vector& y);

/// R^i_k(x, y) and its trace, from exact derivatives of G.
CurvatureData riemann_curvature(const MetricSpec& spec, const Vector& x, const Vector& y);

/// 1/2 d^2 R / dy^a dy^b of the Ricci scalar.
Matrix ricci_scalar_hessian(const MetricSpec& spec, const Vector& x, const Vector& y);

/// Nonlinear connection of a metric, or its linear (Berwald) form.
class Connection {
 public:
  enum class Mode { nonlinear, berwald_linear };

  static Connection nonlinear(const MetricSpec& spec);
  /// Gamma^i_{jk}(x) = d^2 G^i / dy^j dy^k, checked for y-independence to `tol` on each use.
  static Connection berwald(const MetricSpec& spec, double tol = 1e-7);

  Mode mode() const { return mode_; }
  const MetricSpec& spec() const { return spec_; }
  double tolerance() const { return tol_; }

  /// N^i_j(x, y); zero at y = 0.
  Matrix N(const Vector& x, const Vector& y) const;
  /// Gamma^i_{jk}(x). Throws not_berwald for a nonlinear connection or y-dependent Gamma.
  Tensor3 christoffel(const Vector& x) const;
  /// d Gamma^i_{jk} / dx^l as (i, j, k, l).
  Tensor4 christoffel_derivative(const Vector& x) const;

 private:
  Connection(MetricSpec spec, Mode mode, double tol) : spec_(std::move(spec)), mode_(mode), tol_(tol) {}
  MetricSpec spec_;
  Mode mode_;
  double tol_;
};

/// R^i_{jkl} = d_k Gamma^i_{jl} - d_l Gamma^i_{jk} + Gamma^m_{jl} Gamma^i_{mk} - Gamma^m_{jk} Gamma^i_{ml}.
Tensor4 chern_from_berwald(const Connection& conn, const Vector& x);

/// D_y V = dV(y) + N(y) V; zero at y = 0.
Vector covariant_derivative(const Connection& conn, const VectorField& v, const Vector& x, const Vector& y);

/// (1/sqrt g) d/dx^i (sqrt g g^{ij} df/dx^j) with horizontal derivatives, for Berwald metrics.
double horizontal_laplacian(const MetricSpec& spec, const ScalarFunction& f, const Vector& x, const Vector& y);

/// g^{ij} f_{ij} - f_k g^{ij} Gamma^k_{ij}, the g-trace of the Finslerian Hessian.
double hessian_trace(const MetricSpec& spec, const ScalarFunction& f, const Vector& x, const Vector& y);

}  // namespace finsler
