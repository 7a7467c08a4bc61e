#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "finsler/detail/averaged.hpp"
#include "finsler/fields.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Volume form mu = sigma dx^1 ... dx^m.
class VolumeForm {
 public:
  struct Lebesgue {};
  /// sigma = sqrt(det A(x))
  struct SqrtDet {
    MatrixField a;
  };
  /// sigma = sqrt(det h(x)) for the indicatrix-averaged metric h
  struct SqrtDetAveraged {
    std::shared_ptr<const MetricSpec> spec;
    int nodes;
    IndicatrixMeasure measure;
  };
  using Kind = std::variant<Lebesgue, SqrtDet, SqrtDetAveraged>;

  VolumeForm() = default;

  static VolumeForm lebesgue() { return VolumeForm(Lebesgue{}); }
  static VolumeForm sqrt_det(MatrixField a) { return VolumeForm(SqrtDet{std::move(a)}); }
  /// sqrt(det A) of a Riemannian or Randers spec.
  static VolumeForm riemannian(const MetricSpec& spec);
  static VolumeForm averaged(const MetricSpec& spec, int nodes = 64,
                             IndicatrixMeasure measure = IndicatrixMeasure::cone);

  const Kind& kind() const { return kind_; }
  std::string name() const;

  double density(const Vector& x) const;
  Vector density_gradient(const Vector& x) const;

 private:
  explicit VolumeForm(Kind k) : kind_(std::move(k)) {}
  Kind kind_ = Lebesgue{};
};

/// A(x, omega) = sigma(x) l^{-1}(x, omega), optionally with the base point
/// rescaled: A_eps(x, omega) = A(eps x, omega).
class AMap {
 public:
  struct Derivatives {
    Vector value;
    Matrix d_omega;  // dA/domega = sigma g*
    Matrix d_x;      // dA/dx at fixed omega
  };

  AMap(MetricSpec spec, VolumeForm mu, double scale = 1.0);

  const MetricSpec& spec() const { return spec_; }
  const VolumeForm& volume() const { return mu_; }
  double scale() const { return scale_; }

  /// Zero at omega = 0.
  Vector operator()(const Vector& x, const Vector& omega) const;
  /// Requires omega != 0.
  Derivatives derivatives(const Vector& x, const Vector& omega) const;

 private:
  MetricSpec spec_;
  VolumeForm mu_;
  double scale_;
};

/// Finsler gradient l^{-1}(df); zero where df = 0.
Vector gradient(const MetricSpec& spec, const ScalarFunction& f, const Vector& x);

struct LaplacianValue {
  double value = 0.0;
  bool low_confidence = false;  // df(x) = 0: divergence estimated by differencing
};

/// Nonlinear Laplacian (1/sigma) div(sigma l^{-1}(df)) from exact derivatives.
LaplacianValue laplacian(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f, const Vector& x,
                         double fallback_step = 1e-3);

/// Conservative flux-difference Laplacian on a Cartesian stencil of spacing h.
double laplacian_grid(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f, const Vector& x,
                      double h);

struct EnergyEstimate {
  double value = 0.0;       // 3-point Gauss-Legendre per cell, `cells` per axis
  double refined = 0.0;     // same rule on twice as many cells per axis
  double richardson = 0.0;  // extrapolation of the two
  double error = 0.0;       // |refined - value|
};

/// E(f) = 1/2 int F*^2(df) dmu over an axis-aligned box.
EnergyEstimate dirichlet_energy(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f,
                                const Box& domain, int cells = 8, Execution exec = Execution::parallel);

struct StructureViolation {
  std::string condition;  // "growth", "ellipticity" or "monotonicity"
  Vector x;
  Vector omega1;
  Vector omega2;
  double value;
};

struct StructureReport {
  int pairs = 0;
  int antipodal_pairs = 0;
  int zero_pairs = 0;
  double max_growth_ratio = 0.0;         // (|A| + |d_x A| + |w| |d_w A|) / |w|
  double min_ellipticity = INFINITY;     // smallest eigenvalue of d_w A
  double min_monotonicity = INFINITY;    // (A(w2) - A(w1)).(w2 - w1) / |w2 - w1|^2
  double c_growth = 0.0;
  double c_ellipticity = 0.0;
  double c_monotonicity = 0.0;
  double c = 0.0;
  std::vector<StructureViolation> violations;
};

/// Empirical constants for the growth, ellipticity and monotonicity bounds of
/// the A-map over random points of `domain`.
StructureReport verify_structure_conditions(const MetricSpec& spec, const VolumeForm& mu, const Box& domain,
                                            int samples, std::uint64_t seed = 1,
                                            Execution exec = Execution::parallel);

}  // namespace finsler
