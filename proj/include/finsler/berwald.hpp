#pragma once

#include <cstdint>
#include <vector>

#include "finsler/detail/averaged.hpp"
#include "finsler/metric.hpp"
#include "finsler/spray.hpp"
#include "finsler/types.hpp"

namespace finsler {

struct BerwaldReport {
  bool berwald = false;
  double max_nonlinearity = 0.0;  // max |N(y) - Gamma y| over unit y after a least-squares fit of Gamma
  Vector witness_x;
  Vector witness_y;
  int points = 0;
};

/// Fits N^i_j(x, y) = Gamma^i_{jk}(x) y^k at random points of `domain`.
BerwaldReport is_berwald(const MetricSpec& spec, const Box& domain, double tol = 1e-7, int points = 20,
                         std::uint64_t seed = 1, Execution exec = Execution::parallel);

struct IndicatrixQuadrature {
  Vector x;
  std::vector<Vector> nodes;   // F(x, y_q) = 1
  std::vector<double> weights;  // measure elements, positive
  IndicatrixMeasure measure;

  double total() const;
};

/// Nodes y(theta) = u(theta) / F(x, u(theta)) on rays u; weights from exact
/// angle derivatives. The surface measure gives arc length (m = 2) or area (m = 3).
IndicatrixQuadrature indicatrix_quadrature(const MetricSpec& spec, const Vector& x, int n,
                                           IndicatrixMeasure measure = IndicatrixMeasure::surface);

/// The indicatrix average h of the fundamental tensor.
class AveragedMetric {
 public:
  AveragedMetric(MetricSpec spec, int nodes, IndicatrixMeasure measure = IndicatrixMeasure::cone);

  const MetricSpec& spec() const { return spec_; }
  int nodes() const { return nodes_; }
  IndicatrixMeasure measure() const { return measure_; }

  Matrix operator()(const Vector& x) const;
  /// dh_{ij}/dx^k as (k)(i, j), differentiated under the integral sign.
  std::vector<Matrix> gradient(const Vector& x) const;
  /// Levi-Civita Christoffel symbols of h.
  Tensor3 christoffel(const Vector& x) const;
  /// Riemann tensor R^i_{jkl} of h, same index convention as chern_from_berwald.
  Tensor4 riemann(const Vector& x) const;
  /// Ric_{jl} = R^m_{jml}.
  Matrix ricci(const Vector& x) const;

 private:
  MetricSpec spec_;
  int nodes_;
  IndicatrixMeasure measure_;
};

AveragedMetric averaged_metric(const MetricSpec& spec, int n, IndicatrixMeasure measure = IndicatrixMeasure::cone);

struct SzaboReport {
  double max_deviation = 0.0;  // max |Gamma_LC(h) - Gamma_Berwald|
  Vector witness;
  int points = 0;
  double tol = 0.0;
  bool passed = false;
};

/// Compares the Levi-Civita connection of h with the Berwald connection.
/// Throws not_berwald when the connection is not linear in y.
SzaboReport szabo_check(const MetricSpec& spec, int n, const Box& domain, double tol = 1e-5, int points = 10,
                        std::uint64_t seed = 1, IndicatrixMeasure measure = IndicatrixMeasure::cone,
                        Execution exec = Execution::parallel);

struct RicciIdentityReport {
  double y_variation = 0.0;       // spread of 1/2 d^2R/dy^2 over directions
  double hessian_vs_chern = 0.0;  // |1/2 d^2R/dy^2 - R^m_{a m b}|
  double chern_vs_h = NAN;        // |R^m_{a m b} - Ric(h)|, when the Szabo check passes
  bool szabo_passed = false;
  double max_deviation = 0.0;
  Vector witness;
  int points = 0;
  double tol = 0.0;
  bool passed = false;
};

RicciIdentityReport ricci_identity_check(const MetricSpec& spec, int n, const Box& domain, double tol = 1e-6,
                                         int points = 5, std::uint64_t seed = 1,
                                         IndicatrixMeasure measure = IndicatrixMeasure::cone,
                                         Execution exec = Execution::parallel);

}  // namespace finsler
