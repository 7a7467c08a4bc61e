#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include <Eigen/Core>
#include <Eigen/LU>

#include "finsler/error.hpp"

namespace finsler {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box in coordinate space.
struct Box {
  Vector lo;
  Vector hi;

  int dimension() const { return static_cast<int>(lo.size()); }
  static Box cube(int dim, double half_width) {
    return {Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
  }
};

/// Tensor-product grid of sample points used to audit a metric.
struct SampleGrid {
  Box box;
  int per_axis = 9;

  static SampleGrid cube(int dim, double half_width = 1.0, int per_axis = 9) {
    return {Box::cube(dim, half_width), per_axis};
  }
};

/// Execution policy for the data-parallel kernels.
enum class Execution { serial, parallel };

/// Caps the number of OpenMP threads used by parallel kernels (threads >= 1).
void set_thread_count(int threads);

/// Portable deterministic random source (mt19937_64, explicit conversions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; one variate per call keeps the stream position simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vector point_in(const Box& box) {
    Vector p(box.dimension());
    for (int i = 0; i < p.size(); ++i) p[i] = uniform(box.lo[i], box.hi[i]);
    return p;
  }

  /// Uniformly distributed direction on the Euclidean unit sphere.
  Vector direction(int dim) {
    Vector v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = normal();
    } while (v.norm() < 1e-12);
    return v / v.norm();
  }

 private:
  std::mt19937_64 engine_;
};

void require_finite(const Vector& v, const char* what);
void require_dimension(const Vector& v, int dim, const char* what);

}  // namespace finsler
