#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "finsler/calculus.hpp"
#include "finsler/fields.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Structured planar grid on a disk or a square, triangulated union-jack
/// style (diagonals point away from the center).
class Grid {
 public:
  enum class Shape { ball, square };

  /// Disk of the given radius: the square grid of spacing h is mapped onto
  /// the disk by p -> p max(|p1|, |p2|) / |p|, so boundary nodes lie on the circle.
  static Grid ball(double radius, double h);
  static Grid square(double half_width, double h);

  Shape shape() const { return shape_; }
  double radius() const { return radius_; }
  double spacing() const { return radius_ / n_; }
  int half_cells() const { return n_; }

  int node_count() const { return static_cast<int>(points_.size()); }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<int>& boundary() const { return boundary_; }
  /// Position of a node in the unknown vector, or -1 on the boundary.
  int unknown(int node) const { return unknown_[node]; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

  /// Node at integer offset (i, j) from the center, |i|, |j| <= half_cells().
  int index(int i, int j) const { return (j + n_) * (2 * n_ + 1) + (i + n_); }
  int center() const { return index(0, 0); }

 private:
  Grid(Shape shape, double radius, int n);
  Shape shape_;
  double radius_;
  int n_;
  std::vector<Vector> points_;
  std::vector<int> interior_, boundary_, unknown_;
  std::vector<std::array<int, 3>> triangles_;
};

struct SolverOptions {
  double tol = 1e-8;  // on max |dE/du| over interior nodes
  int max_ncg = 4000;
  int max_newton = 50;
  double ncg_handoff = 1e-4;  // switch to Newton below this gradient norm
  Execution exec = Execution::parallel;
};

/// Discrete energy E(u) = sum_T 1/2 F*^2(scale c_T, du_T) sigma(scale c_T) |T| for
/// P1 fields, with the operator A_scale(x, w) = A(scale x, w).
class DirichletProblem {
 public:
  DirichletProblem(MetricSpec spec, VolumeForm mu, Grid grid, double scale = 1.0);

  const Grid& grid() const { return grid_; }
  const MetricSpec& spec() const { return spec_; }
  const VolumeForm& volume() const { return mu_; }
  double scale() const { return scale_; }

  double energy(const std::vector<double>& u, Execution exec = Execution::parallel) const;
  /// dE/du at every node (boundary entries included).
  std::vector<double> energy_gradient(const std::vector<double>& u, Execution exec = Execution::parallel) const;
  /// sum_T A(du) . d eta |T|.
  double weak_form(const std::vector<double>& u, const std::vector<double>& eta,
                   Execution exec = Execution::parallel) const;
  /// H^1 norm of a P1 field.
  double h1_norm(const std::vector<double>& eta) const;

  struct Geometry;  // per-triangle data
  const std::vector<Geometry>& geometry() const { return *geometry_; }

 private:
  MetricSpec spec_;
  VolumeForm mu_;
  Grid grid_;
  double scale_;
  std::shared_ptr<const std::vector<Geometry>> geometry_;
};

struct DirichletSolution {
  std::vector<double> u;  // node values
  double energy = 0.0;
  double gradient_norm = 0.0;  // max |dE/du| over interior nodes
  int ncg_iterations = 0;
  int newton_iterations = 0;
  int degenerate_cells = 0;  // cells with du = 0 at the solution
};

/// Minimizes the discrete energy with boundary values of `boundary`.
DirichletSolution solve_dirichlet(const DirichletProblem& problem, const ScalarFunction& boundary,
                                  const SolverOptions& options = {});

struct HarmonicChart {
  Grid grid;
  double scale = 1.0;
  double delta_det = 0.1;
  std::array<DirichletSolution, 2> fields;
  std::vector<Matrix> jacobian;   // per node; empty on the boundary
  std::vector<double> det;        // per node; NaN on the boundary
  Matrix jacobian_center;
  double deviation_center = 0.0;  // spectral norm of D Phi(0) - Id
  double deviation_l2 = 0.0;      // L^2 norm of D Phi - Id over the grid, per unit area
  double identity_error = 0.0;    // max nodal |Phi(x) - x|
  double certified_radius = 0.0;  // |det D Phi| >= delta_det at interior nodes inside
  std::array<double, 2> residual{};
};

/// Solves the m = 2 problems with data x^i and differentiates the chart.
HarmonicChart build_chart(const MetricSpec& spec, const VolumeForm& mu, const Grid& grid, double scale = 1.0,
                          const SolverOptions& options = {}, double delta_det = 0.1);

struct RescalingRow {
  double epsilon;
  double deviation;     // |D Phi(0) - Id|
  double deviation_l2;  // L^2 average of |D Phi - Id|
  int newton_iterations;
};

struct RescalingTable {
  std::vector<RescalingRow> rows;
  double slope = 0.0;     // least-squares slope of log deviation against log epsilon
  double slope_l2 = 0.0;  // same for deviation_l2
  bool strictly_decreasing = false;
};

/// Charts of A_eps(x, w) = A(eps x, w) on the unit disk for each eps.
RescalingTable rescaling_experiment(const MetricSpec& spec, const VolumeForm& mu, const std::vector<double>& eps,
                                    double h = 1.0 / 32, const SolverOptions& options = {});

struct WeakResidualReport {
  double max_ratio = 0.0;  // max |weak form| / |eta|_{H^1}
  int tests = 0;
};

/// Random P1 test functions vanishing on the boundary.
WeakResidualReport weak_residual(const DirichletProblem& problem, const std::vector<double>& u, int tests = 20,
                                 std::uint64_t seed = 1);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace finsler
