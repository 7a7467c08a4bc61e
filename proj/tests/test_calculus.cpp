#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "families.hpp"
#include "finsler/calculus.hpp"
#include "finsler/core.hpp"
#include "finsler/legendre.hpp"
#include "poly.hpp"

using namespace finsler;
using fam::vec;

TEST_CASE("gradient") {
  const Vector x0 = vec({0.1, 0.2});
  CHECK(gradient(fam::euclidean(), ScalarFunction::coordinate(0, 2), x0).isApprox(vec({1, 0}), 1e-12));
  CHECK(gradient(fam::riemannian_diag14(), ScalarFunction::coordinate(1, 2), x0).isApprox(vec({0, 0.25}), 1e-12));
  const auto spec = fam::randers_const();
  const Vector g = gradient(spec, ScalarFunction::coordinate(0, 2), x0);
  CHECK(std::abs(eval_F(spec, x0, g) - eval_F_star(spec, x0, vec({1, 0}))) <= 1e-9);
  CHECK(gradient(spec, ScalarFunction::constant(3.0, 2), x0).isZero(0.0));
}

TEST_CASE("duality of the gradient on random functions") {
  Rng rng(41);
  for (const auto& [name, spec] : fam::core_families()) {
    CAPTURE(name);
    for (const auto& p : poly::test_functions()) {
      const Vector x = rng.point_in(Box::cube(2, 0.5));
      const Vector grad = gradient(spec, p.f, x);
      const Vector df = p.gradient(x);
      const double fs = eval_F_star(spec, x, df);
      CHECK(std::abs(eval_F(spec, x, grad) - fs) <= 1e-9 * fs);
      CHECK((fundamental_tensor(spec, x, grad).g * grad - df).norm() <= 1e-9 * df.norm());
    }
  }
}

TEST_CASE("laplacian reference values") {
  const Vector x0 = vec({0.3, -0.2});
  const auto sq1 = poly::monomial(2, 0);
  const auto sq2 = poly::monomial(0, 2);
  CHECK(laplacian(fam::euclidean(), VolumeForm::lebesgue(), sq1, x0).value == doctest::Approx(2.0));
  const auto diag = fam::riemannian_diag14();
  CHECK(laplacian(diag, VolumeForm::riemannian(diag), sq2, x0).value == doctest::Approx(0.5));
  CHECK(VolumeForm::riemannian(diag).density(x0) == doctest::Approx(2.0));
  const auto lin = ScalarFunction::polynomial({{1.0, {1, 0}}, {-2.0, {0, 1}}});
  CHECK(std::abs(laplacian(fam::randers_const(), VolumeForm::lebesgue(), lin, x0).value) <= 1e-12);
  CHECK(std::abs(laplacian(fam::locally_minkowski(), VolumeForm::lebesgue(), lin, x0).value) <= 1e-12);
}

TEST_CASE("laplacian at a critical point falls back to differencing") {
  const auto f = ScalarFunction::polynomial({{1.0, {2, 0}}, {1.0, {0, 2}}});
  const auto v = laplacian(fam::euclidean(), VolumeForm::lebesgue(), f, vec({0, 0}));
  CHECK(v.low_confidence);
  CHECK(v.value == doctest::Approx(4.0).epsilon(1e-8));
  CHECK_FALSE(laplacian(fam::euclidean(), VolumeForm::lebesgue(), f, vec({0.1, 0})).low_confidence);
}

TEST_CASE("Riemannian reduction to Laplace-Beltrami") {
  const Vector x0 = vec({0.3, -0.2});
  for (const auto& r : poly::riemannian_cases()) {
    CAPTURE(r.name);
    const auto mu = VolumeForm::riemannian(r.spec);
    for (const auto& p : poly::test_functions()) {
      CAPTURE(p.name);
      const double expect = r.laplace_beltrami(p, x0);
      CHECK(std::abs(laplacian(r.spec, mu, p.f, x0).value - expect) <= 1e-10 * (1 + std::abs(expect)));

      double err[3];
      const double hs[3] = {1.0 / 16, 1.0 / 32, 1.0 / 64};
      for (int k = 0; k < 3; ++k) err[k] = std::abs(laplacian_grid(r.spec, mu, p.f, x0, hs[k]) - expect);
      CHECK(err[2] <= 1e-3);
      // Stencils exact up to roundoff have no measurable order.
      if (err[0] > 1e-9) CHECK(poly::fitted_order(hs, err) >= 1.8);
    }
  }
}

TEST_CASE("A-map homogeneity and value at zero") {
  Rng rng(5);
  for (const auto& [name, spec] : fam::all_families()) {
    CAPTURE(name);
    const int m = spec.dimension();
    const AMap a(spec, VolumeForm::lebesgue());
    for (int k = 0; k < 20; ++k) {
      const Vector x = rng.point_in(Box::cube(m, 0.5));
      const Vector w = rng.direction(m) * rng.uniform(0.1, 3.0);
      const double lambda = rng.uniform(0.1, 10.0);
      const Vector aw = a(x, w);
      CHECK((a(x, lambda * w) - lambda * aw).norm() <= 1e-10 * lambda * aw.norm());
      CHECK(a(x, Vector::Zero(m)).isZero(0.0));
    }
  }
}

TEST_CASE("A-map derivatives agree with differences") {
  const auto spec = fam::randers_x();
  const auto mu = VolumeForm::riemannian(fam::riemannian_warped());
  const AMap a(spec, mu, 0.7);
  const Vector x = vec({0.2, -0.3}), w = vec({0.4, 1.1});
  const auto d = a.derivatives(x, w);
  const double h = 1e-5;
  for (int k = 0; k < 2; ++k) {
    Vector e = Vector::Zero(2);
    e[k] = h;
    const Vector dx = (a(x + e, w) - a(x - e, w)) / (2 * h);
    const Vector dw = (a(x, w + e) - a(x, w - e)) / (2 * h);
    CHECK((d.d_x.col(k) - dx).norm() <= 1e-7);
    CHECK((d.d_omega.col(k) - dw).norm() <= 1e-7);
  }
}

TEST_CASE("Dirichlet energy") {
  const Box unit{vec({0, 0}), vec({1, 1})};
  const auto x1 = ScalarFunction::coordinate(0, 2);
  const auto e = dirichlet_energy(fam::euclidean(), VolumeForm::lebesgue(), x1, unit);
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(dirichlet_energy(fam::euclidean(), VolumeForm::lebesgue(), ScalarFunction::constant(2.0, 2), unit).value ==
        0.0);
  const auto r = dirichlet_energy(fam::randers_const(), VolumeForm::lebesgue(), x1, unit, 4);
  const double fs = eval_F_star(fam::randers_const(), vec({0, 0}), vec({1, 0}));
  CHECK(r.value == doctest::Approx(0.5 * fs * fs).epsilon(1e-12));
  CHECK(r.error <= 1e-12);

  // The quartic has no critical point in the unit square, so F*^2(df) is smooth there.
  const auto f = poly::test_functions()[3].f;
  const auto coarse = dirichlet_energy(fam::randers_x(), VolumeForm::lebesgue(), f, unit, 2);
  const auto fine = dirichlet_energy(fam::randers_x(), VolumeForm::lebesgue(), f, unit, 16);
  CHECK(std::abs(coarse.richardson - fine.value) < std::abs(coarse.value - fine.value));
  // Three-point Gauss-Legendre is sixth order: halving h cuts the gap ~64x.
  const auto mid = dirichlet_energy(fam::randers_x(), VolumeForm::lebesgue(), f, unit, 8);
  CHECK(mid.error / fine.error >= 32.0);

  const auto serial = dirichlet_energy(fam::randers_x(), VolumeForm::lebesgue(), f, unit, 8, Execution::serial);
  const auto parallel = dirichlet_energy(fam::randers_x(), VolumeForm::lebesgue(), f, unit, 8, Execution::parallel);
  CHECK(serial.value == parallel.value);
}

TEST_CASE("structure conditions") {
  const Box box = Box::cube(2, 0.5);
  const auto e = verify_structure_conditions(fam::euclidean(), VolumeForm::lebesgue(), box, 400);
  CHECK(e.violations.empty());
  CHECK(e.min_ellipticity == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.min_monotonicity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.c_ellipticity == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.c_monotonicity == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.c_growth == doctest::Approx(2.0).epsilon(1e-14));

  const auto diag = fam::riemannian_diag14();
  const auto d = verify_structure_conditions(diag, VolumeForm::riemannian(diag), box, 400);
  CHECK(d.violations.empty());
  // A = 2 A^{-1} omega has eigenvalues 2 and 0.5.
  CHECK(d.min_ellipticity == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.c_ellipticity == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d.min_monotonicity >= 0.5 - 1e-12);

  const auto r = verify_structure_conditions(fam::randers_const(), VolumeForm::lebesgue(), box, 10000);
  CHECK(r.pairs == 10000);
  CHECK(r.antipodal_pairs == 2500);
  CHECK(r.violations.empty());
  CHECK(r.c < INFINITY);

  const auto s1 = verify_structure_conditions(fam::randers_x(), VolumeForm::lebesgue(), box, 200, 9, Execution::serial);
  const auto s2 = verify_structure_conditions(fam::randers_x(), VolumeForm::lebesgue(), box, 200, 9, Execution::parallel);
  CHECK(s1.c == s2.c);
  CHECK(s1.min_monotonicity == s2.min_monotonicity);
}

TEST_CASE("averaged volume form") {
  const auto diag = fam::riemannian_diag14();
  CHECK(VolumeForm::averaged(diag, 32).density(vec({0.1, 0.2})) == doctest::Approx(2.0).epsilon(1e-12));
  const auto warped = fam::riemannian_warped();
  const auto av = VolumeForm::averaged(warped, 32);
  const auto rm = VolumeForm::riemannian(warped);
  const Vector x = vec({0.3, 0.1});
  CHECK(av.density(x) == doctest::Approx(rm.density(x)).epsilon(1e-12));
  CHECK((av.density_gradient(x) - rm.density_gradient(x)).norm() <= 1e-12);
}
