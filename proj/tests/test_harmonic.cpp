#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "families.hpp"
#include "finsler/detail/kernels.hpp"
#include "finsler/harmonic.hpp"

using namespace finsler;
using fam::vec;

namespace {

const ScalarFunction kX1 = ScalarFunction::coordinate(0, 2);

double max_error(const Grid& g, const std::vector<double>& u, const std::function<double(const Vector&)>& exact) {
  double e = 0.0;
  for (int k = 0; k < g.node_count(); ++k) e = std::max(e, std::abs(u[k] - exact(g.points()[k])));
  return e;
}

}  // namespace

TEST_CASE("grids") {
  const Grid b = Grid::ball(1.0, 1.0 / 16);
  CHECK(b.half_cells() == 16);
  CHECK(b.node_count() == 33 * 33);
  CHECK(b.boundary().size() == 128);
  for (int k : b.boundary()) CHECK(std::abs(b.points()[k].norm() - 1.0) <= 1e-15);
  for (int k : b.interior()) CHECK(b.points()[k].norm() < 1.0);
  CHECK(b.points()[b.center()].norm() == 0.0);
  CHECK(b.points()[b.index(1, 0)].isApprox(vec({1.0 / 16, 0})));

  const DirichletProblem sq(fam::euclidean(), VolumeForm::lebesgue(), Grid::square(1.0, 0.25));
  double area = 0.0;
  for (const auto& t : sq.geometry()) area += t.area;
  CHECK(area == doctest::Approx(4.0).epsilon(1e-14));

  const DirichletProblem disk(fam::euclidean(), VolumeForm::lebesgue(), Grid::ball(1.0, 1.0 / 32));
  area = 0.0;
  for (const auto& t : disk.geometry()) {
    CHECK(t.area > 0);
    area += t.area;
  }
  CHECK(area < M_PI);
  CHECK(area == doctest::Approx(M_PI).epsilon(1e-2));
  CHECK_THROWS_AS(Grid::ball(1.0, 0.0), Error);
  CHECK_THROWS_AS(DirichletProblem(fam::euclidean(3), VolumeForm::lebesgue(), Grid::ball(1, 0.5)), Error);
}

TEST_CASE("linear data on constant-coefficient operators") {
  const Grid grid = Grid::ball(1.0, 1.0 / 32);
  for (const auto& [name, spec] :
       std::vector<fam::Named>{{"euclidean", fam::euclidean()}, {"locally-minkowski", fam::locally_minkowski()}}) {
    CAPTURE(name);
    const DirichletProblem p(spec, VolumeForm::lebesgue(), grid);
    const auto s = solve_dirichlet(p, kX1);
    CHECK(max_error(grid, s.u, [](const Vector& x) { return x[0]; }) <= 1e-8);
    CHECK(s.gradient_norm <= 1e-8);
    // Maximum principle for data x^1 on the unit disk.
    for (double v : s.u) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("x-dependent Randers: minimization certificates") {
  const Grid grid = Grid::ball(1.0, 1.0 / 16);
  const DirichletProblem p(fam::randers_x(), VolumeForm::lebesgue(), grid);
  const auto s = solve_dirichlet(p, kX1);
  CHECK(s.gradient_norm <= 1e-8);
  std::vector<double> ext(grid.node_count());
  for (int k = 0; k < grid.node_count(); ++k) ext[k] = grid.points()[k][0];
  CHECK(s.energy < p.energy(ext));
  CHECK(s.energy == doctest::Approx(p.energy(s.u)).epsilon(1e-12));

  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    auto c = s.u;
    const double amp = rng.uniform(1e-4, 1e-1);
    for (int k : grid.interior()) c[k] += amp * rng.uniform(-1.0, 1.0);
    CHECK(s.energy <= p.energy(c));
  }
  const auto w = weak_residual(p, s.u, 20, 3);
  CHECK(w.tests == 20);
  CHECK(w.max_ratio <= 1e-6);
}

TEST_CASE("serial and parallel solves agree bit for bit") {
  const Grid grid = Grid::ball(1.0, 1.0 / 8);
  const DirichletProblem p(fam::randers_x(), VolumeForm::riemannian(fam::riemannian_warped()), grid, 0.5);
  SolverOptions serial, parallel;
  serial.exec = Execution::serial;
  parallel.exec = Execution::parallel;
  const auto a = solve_dirichlet(p, kX1, serial);
  const auto b = solve_dirichlet(p, kX1, parallel);
  CHECK(a.u == b.u);
  CHECK(a.energy == b.energy);
  CHECK(p.energy_gradient(a.u, Execution::serial) == p.energy_gradient(a.u, Execution::parallel));
}

TEST_CASE("grid refinement on a harmonic function") {
  const auto f = ScalarFunction::harmonic_exp(1.0);
  const auto exact = [](const Vector& x) { return std::exp(x[0]) * std::cos(x[1]); };
  std::vector<double> hs, errs;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    const Grid grid = Grid::square(1.0, h);
    const auto s = solve_dirichlet(DirichletProblem(fam::euclidean(), VolumeForm::lebesgue(), grid), f);
    hs.push_back(h);
    errs.push_back(max_error(grid, s.u, exact));
  }
  const double p = loglog_slope(hs, errs);
  CHECK(p >= 1.0);
  CHECK(errs.back() <= 1e-3);
}

TEST_CASE("degenerate cells fall back to conjugate gradients") {
  // Data 1 - (x^1)^2 has a critical point at the center line; the solve must still converge.
  const auto f = ScalarFunction::polynomial({{1.0, {0, 0}}, {-1.0, {2, 0}}});
  const Grid grid = Grid::square(1.0, 1.0 / 8);
  const DirichletProblem p(fam::randers_const(), VolumeForm::lebesgue(), grid);
  const auto s = solve_dirichlet(p, f);
  CHECK(s.gradient_norm <= 1e-8);
}

TEST_CASE("harmonic charts") {
  const Grid grid = Grid::ball(1.0, 1.0 / 16);
  const auto e = build_chart(fam::euclidean(), VolumeForm::lebesgue(), grid);
  CHECK(e.identity_error <= 1e-8);
  for (int k : grid.interior()) CHECK(std::abs(e.det[k] - 1.0) <= 1e-8);
  CHECK(e.certified_radius == 1.0);
  CHECK(e.deviation_center <= 1e-8);

  const auto w = build_chart(fam::riemannian_warped(), VolumeForm::riemannian(fam::riemannian_warped()), grid, 0.1);
  CHECK(std::abs(w.det[grid.center()] - 1.0) <= 0.2);

  const auto r = build_chart(fam::randers_x(), VolumeForm::lebesgue(), grid, 0.1);
  CHECK(r.certified_radius > 0.0);
  CHECK(r.residual[0] <= 1e-8);
  CHECK(r.residual[1] <= 1e-8);
}

TEST_CASE("rescaling") {
  const std::vector<double> eps = {0.4, 0.2, 0.1, 0.05};
  const auto e = rescaling_experiment(fam::euclidean(), VolumeForm::lebesgue(), eps, 1.0 / 8);
  for (const auto& row : e.rows) CHECK(row.deviation <= 1e-10);
  const auto lm = rescaling_experiment(fam::locally_minkowski(), VolumeForm::lebesgue(), eps, 1.0 / 8);
  for (const auto& row : lm.rows) CHECK(row.deviation <= 1e-10);

  const auto r = rescaling_experiment(fam::randers_x(), VolumeForm::lebesgue(), eps, 1.0 / 16);
  CHECK(r.strictly_decreasing);
  // The first-order correction v solves L v = const with zero data on a centrally
  // symmetric ball, so it is even and Dv(0) = 0: the center deviation is O(eps^2),
  // while the averaged deviation keeps the O(eps) rate.
  CHECK(r.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.slope_l2 == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(rescaling_experiment(fam::euclidean(), VolumeForm::lebesgue(), {0.1, 0.2}), Error);
}
