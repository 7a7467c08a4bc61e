#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "families.hpp"
#include "finsler/berwald.hpp"
#include "finsler/core.hpp"

using namespace finsler;
using fam::vec;

namespace {

const Box kDomain = Box::cube(2, 0.5);

/// Adaptive Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        const double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  return rec(a, b, fa, fc, fb, (b - a) / 6 * (fa + 4 * fc + fb), depth);
}

}  // namespace

TEST_CASE("Berwald classification") {
  for (const auto& [name, spec] :
       std::vector<fam::Named>{{"euclidean", fam::euclidean()},
                               {"riemannian", fam::riemannian_warped()},
                               {"sphere", fam::sphere()},
                               {"locally-minkowski", fam::locally_minkowski()},
                               {"pullback", fam::pullback_flat()},
                               {"randers-const", fam::randers_const()}}) {
    CAPTURE(name);
    const auto r = is_berwald(spec, kDomain);
    CHECK(r.berwald);
    CHECK(r.max_nonlinearity <= 1e-9);
  }
  const auto r = is_berwald(fam::randers_nonparallel(), kDomain);
  CHECK_FALSE(r.berwald);
  CHECK(r.max_nonlinearity > 1e-3);
  CHECK(r.witness_y.norm() == doctest::Approx(1.0));
  CHECK(is_berwald(fam::randers_x(), kDomain, 1e-7, 20, 3, Execution::serial).max_nonlinearity ==
        is_berwald(fam::randers_x(), kDomain, 1e-7, 20, 3, Execution::parallel).max_nonlinearity);
}

TEST_CASE("indicatrix quadrature") {
  const Vector x = vec({0.1, -0.2});
  for (int n : {16, 64}) {
    const auto q = indicatrix_quadrature(fam::euclidean(), x, n);
    CHECK(q.total() == doctest::Approx(2 * M_PI).epsilon(1e-12));
    for (const auto& y : q.nodes) CHECK(std::abs(eval_F(fam::euclidean(), x, y) - 1) <= 1e-12);
  }
  // Ellipse with semi-axes 1 and 1/2.
  const double ellipse =
      4 * simpson([](double t) { return std::sqrt(std::sin(t) * std::sin(t) + 0.25 * std::cos(t) * std::cos(t)); },
                  0, M_PI / 2, 1e-14);
  CHECK(indicatrix_quadrature(fam::riemannian_diag14(), x, 128).total() == doctest::Approx(ellipse).epsilon(1e-10));
  CHECK(indicatrix_quadrature(fam::riemannian_diag14(), x, 128, IndicatrixMeasure::cone).total() ==
        doctest::Approx(M_PI / 2).epsilon(1e-12));

  const auto spec = fam::randers_const();
  const auto q1 = indicatrix_quadrature(spec, x, 64), q2 = indicatrix_quadrature(spec, x, 128);
  CHECK(std::abs(q1.total() - q2.total()) <= 1e-8);
  for (std::size_t k = 0; k < q1.nodes.size(); ++k) {
    CHECK(std::abs(eval_F(spec, x, q1.nodes[k]) - 1) <= 1e-10);
    CHECK(q1.weights[k] > 0);
  }
  CHECK_THROWS_AS(indicatrix_quadrature(spec, x, 8), Error);

  // Unit sphere area in three dimensions.
  CHECK(indicatrix_quadrature(fam::euclidean(3), vec({0, 0, 0}), 32).total() ==
        doctest::Approx(4 * M_PI).epsilon(1e-10));
}

TEST_CASE("averaged metric") {
  const Vector x = vec({0.3, -0.1});
  CHECK((averaged_metric(fam::euclidean(), 32)(x) - Matrix::Identity(2, 2)).norm() <= 1e-14);
  const auto warped = fam::riemannian_warped();
  const double w = 1 + 0.1 * x[0];
  CHECK((averaged_metric(warped, 32)(x) - fam::diag({1, w * w})).norm() <= 1e-9);
  CHECK((averaged_metric(warped, 32, IndicatrixMeasure::surface)(x) - fam::diag({1, w * w})).norm() <= 1e-9);

  const auto lm = fam::locally_minkowski();
  const Matrix h1 = averaged_metric(lm, 64)(x), h2 = averaged_metric(lm, 128)(x);
  CHECK((h1 - h2).norm() <= 1e-8);
  CHECK((averaged_metric(lm, 64)(vec({-0.4, 0.2})) - h1).norm() <= 1e-14);
  CHECK((h1 - h1.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(h1).eigenvalues().minCoeff() > 0);
  for (const auto& g : averaged_metric(lm, 64).gradient(x)) CHECK(g.norm() <= 1e-14);

  // Exact x-derivatives against central differences of the quadrature.
  const auto pb = averaged_metric(fam::pullback_flat(), 64);
  const auto grad = pb.gradient(x);
  for (int k = 0; k < 2; ++k) {
    Vector e = Vector::Zero(2);
    e[k] = 1e-5;
    CHECK((grad[k] - (pb(x + e) - pb(x - e)) / 2e-5).norm() <= 1e-8);
  }
}

TEST_CASE("Szabo check") {
  const auto r = szabo_check(fam::riemannian_warped(), 64, kDomain);
  CHECK(r.passed);
  CHECK(r.max_deviation <= 1e-10);
  CHECK(szabo_check(fam::locally_minkowski(), 64, kDomain).max_deviation <= 1e-12);

  const auto pb = szabo_check(fam::pullback_flat(), 64, kDomain);
  CHECK(pb.passed);
  CHECK(pb.max_deviation <= 1e-5);
  const auto surf = szabo_check(fam::pullback_flat(), 64, kDomain, 1e-5, 10, 1, IndicatrixMeasure::surface);
  // Arc-length weights are not equivariant under the non-conformal parallel transport.
  CHECK_FALSE(surf.passed);
  CHECK(surf.max_deviation > 1e-3);

  const Box cube3 = Box::cube(3, 0.5);
  CHECK(szabo_check(fam::pullback_flat(0.1, 3), 24, cube3, 1e-5, 3).passed);

  CHECK_THROWS_AS(szabo_check(fam::randers_nonparallel(), 64, kDomain), Error);
}

TEST_CASE("Ricci identity") {
  for (const auto& [name, spec] : std::vector<fam::Named>{{"euclidean", fam::euclidean()},
                                                          {"locally-minkowski", fam::locally_minkowski()},
                                                          {"pullback", fam::pullback_flat()}}) {
    CAPTURE(name);
    const auto r = ricci_identity_check(spec, 64, kDomain);
    CHECK(r.passed);
    CHECK(r.szabo_passed);
    CHECK(r.max_deviation <= 1e-6);
  }

  // Constant curvature: Ric(h) = h on the unit sphere surface.
  const auto sphere = fam::sphere();
  const auto r = ricci_identity_check(sphere, 64, kDomain);
  CHECK(r.passed);
  const auto h = averaged_metric(sphere, 64);
  Rng rng(31);
  for (int n = 0; n < 5; ++n) {
    const Vector x = rng.point_in(kDomain);
    CHECK((h.ricci(x) - h(x)).cwiseAbs().maxCoeff() <= 1e-6);
  }
  CHECK_THROWS_AS(ricci_identity_check(fam::randers_nonparallel(), 64, kDomain), Error);

  const auto h3 = averaged_metric(fam::sphere(3), 24);
  const Vector x3 = vec({0.2, -0.1, 0.3});
  CHECK((h3.ricci(x3) - 2 * h3(x3)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(ricci_identity_check(fam::sphere(3), 24, Box::cube(3, 0.5), 1e-6, 2).passed);
}
