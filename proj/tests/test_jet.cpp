#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "finsler/jet.hpp"
#include "finsler/small_linalg.hpp"

using finsler::ad::Jet;

TEST_CASE("polynomial partials are exact") {
  using J = Jet<double, 2, 4>;
  const J x = J::variable(0.7, 0);
  const J y = J::variable(-1.3, 1);
  const J f = x * x * x * y + 2.0 * y * y;  // x^3 y + 2 y^2
  CHECK(f.value() == doctest::Approx(0.343 * -1.3 + 2 * 1.69));
  CHECK(f.d(0) == doctest::Approx(3 * 0.49 * -1.3));
  CHECK(f.d(1) == doctest::Approx(0.343 + 4 * -1.3));
  CHECK(f.d(0, 0) == doctest::Approx(6 * 0.7 * -1.3));
  CHECK(f.d(0, 1) == doctest::Approx(3 * 0.49));
  CHECK(f.partial({3, 1}) == doctest::Approx(6.0));
  CHECK(f.partial({2, 2}) == doctest::Approx(0.0));
}

TEST_CASE("transcendental functions match closed-form derivatives") {
  using J = Jet<double, 2, 4>;
  const double a = 0.4, b = 0.9;
  const J x = J::variable(a, 0);
  const J y = J::variable(b, 1);
  const J f = exp(x) * sin(y);
  CHECK(f.partial({4, 0}) == doctest::Approx(std::exp(a) * std::sin(b)));
  CHECK(f.partial({1, 3}) == doctest::Approx(-std::exp(a) * std::cos(b)));
  CHECK(f.partial({2, 2}) == doctest::Approx(-std::exp(a) * std::sin(b)));

  const J g = sqrt(x * x + y * y);
  const double r = std::hypot(a, b);
  CHECK(g.d(0) == doctest::Approx(a / r));
  CHECK(g.d(0, 1) == doctest::Approx(-a * b / (r * r * r)));

  const J h = log(1.0 + x) / (2.0 + cos(y));
  const double eps = 1e-4;
  auto hf = [](double p, double q) { return std::log(1 + p) / (2 + std::cos(q)); };
  const double fd = (hf(a + eps, b + eps) - hf(a + eps, b - eps) - hf(a - eps, b + eps) + hf(a - eps, b - eps)) /
                    (4 * eps * eps);
  CHECK(h.d(0, 1) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("derivative lowers the order consistently") {
  using J = Jet<double, 2, 3>;
  const J x = J::variable(0.3, 0);
  const J y = J::variable(0.5, 1);
  const J f = sin(x * y) + x * x * x;
  const auto fx = finsler::ad::derivative(f, 0);
  CHECK(fx.value() == doctest::Approx(f.d(0)));
  CHECK(fx.d(1) == doctest::Approx(f.d(0, 1)));
  CHECK(fx.d(0, 0) == doctest::Approx(f.partial({3, 0})));
}

TEST_CASE("nested jets give mixed derivatives") {
  using In = Jet<double, 1, 2>;
  using Out = Jet<In, 1, 2>;
  const Out a = Out::variable(In(0.6), 0);
  const In p = In::variable(1.1, 0);
  const Out f = sin(a * Out(p));
  // d^2/da dp sin(a p) = cos(ap) - a p sin(ap)
  const double ap = 0.6 * 1.1;
  CHECK(f.d(0).d(0) == doctest::Approx(std::cos(ap) - ap * std::sin(ap)));
  CHECK(f.d(0, 0).value() == doctest::Approx(-1.1 * 1.1 * std::sin(ap)));
}

TEST_CASE("jet matrix inverse differentiates the inverse") {
  using J = Jet<double, 1, 1>;
  const J t = J::variable(0.2, 0);
  finsler::Mat<J, 2> a{{{J(2.0) + t, J(1.0)}, {J(1.0), J(3.0) * t + 1.0}}};
  const auto inv = finsler::inverse<J, 2>(a);
  // d(A^{-1}) = -A^{-1} dA A^{-1}
  Eigen::Matrix2d a0, da;
  a0 << 2.2, 1.0, 1.0, 1.6;
  da << 1.0, 0.0, 0.0, 3.0;
  const Eigen::Matrix2d expect = -a0.inverse() * da * a0.inverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(inv[i][j].d(0) == doctest::Approx(expect(i, j)));
}
