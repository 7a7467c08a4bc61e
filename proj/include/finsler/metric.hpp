#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "finsler/fields.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Declarative description of a Finsler metric on a coordinate domain.
///
/// The set of kinds is closed so every metric can be evaluated on jets.
class MetricSpec {
 public:
  struct Euclidean {};
  /// F = sqrt(v' A(x) v)
  struct Riemannian {
    MatrixField a;
  };
  /// F = sqrt(v' A(x) v) + b(x) . v
  struct Randers {
    MatrixField a;
    CovectorField b;
  };
  /// x-independent Randers-type norm F = sqrt(v' A v) + b . v
  struct LocallyMinkowski {
    Matrix a;
    Vector b;
  };
  /// F(x, v) = inner(I(x), dI(x) v)
  struct Pullback {
    std::shared_ptr<const MetricSpec> inner;
    DiffeoSpec diffeo;
  };
  using Kind = std::variant<Euclidean, Riemannian, Randers, LocallyMinkowski, Pullback>;

  MetricSpec() = default;

  static MetricSpec euclidean(int dim);
  static MetricSpec riemannian(int dim, MatrixField a, const SampleGrid& audit_grid);
  static MetricSpec riemannian(int dim, MatrixField a);
  static MetricSpec randers(int dim, MatrixField a, CovectorField b, const SampleGrid& audit_grid);
  static MetricSpec randers(int dim, MatrixField a, CovectorField b);
  static MetricSpec locally_minkowski(Matrix a, Vector b);

  /// Builds a spec without auditing it. Use audit() to inspect the result.
  static MetricSpec unchecked(int dim, Kind kind);

  int dimension() const { return dim_; }
  const Kind& kind() const { return kind_; }
  std::string name() const;

  /// Well-formedness diagnostics on a sample grid; empty when the metric is sound.
  std::vector<std::string> audit(const SampleGrid& grid) const;

  /// Throws metric_invalid if the Randers convexity bound fails at x.
  void require_convex_at(const Vector& x) const;

 private:
  MetricSpec(int dim, Kind kind) : dim_(dim), kind_(std::move(kind)) {}

  int dim_ = 2;
  Kind kind_ = Euclidean{};
};

/// Round-trip and Jacobian consistency of a diffeomorphism at sampled points.
struct DiffeoAudit {
  double max_roundtrip = 0.0;
  double max_jacobian_error = 0.0;
  double min_abs_det = 0.0;
};

DiffeoAudit audit_diffeo(const DiffeoSpec& diffeo, const SampleGrid& grid);

}  // namespace finsler
