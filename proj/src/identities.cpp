#include "finsler/identities.hpp"

#include <Eigen/Eigenvalues>

#include "finsler/core.hpp"
#include "finsler/legendre.hpp"

namespace finsler {
namespace {

class Tracker {
 public:
  Tracker(std::string name, double tol, bool minimum = false) : minimum_(minimum) {
    c_.name = std::move(name);
    c_.tol = tol;
    c_.value = minimum ? INFINITY : 0.0;
  }

  void observe(double value, const Vector& x, const Vector& v) {
    if (std::isnan(c_.value)) return;
    const bool worse = minimum_ ? value < c_.value : value > c_.value;
    if (worse || c_.witness_x.size() == 0 || std::isnan(value)) {
      c_.value = value;
      c_.witness_x = x;
      c_.witness_v = v;
    }
  }

  IdentityCheck finish() {
    c_.passed = minimum_ ? c_.value > c_.tol : c_.value <= c_.tol;
    return c_;
  }

 private:
  IdentityCheck c_;
  bool minimum_;
};

Matrix fd_half_hessian(const MetricSpec& spec, const Vector& x, const Vector& v, double h) {
  const int m = static_cast<int>(v.size());
  const auto f2 = [&](const Vector& w) {
    const double f = eval_F(spec, x, w);
    return 0.5 * f * f;
  };
  Matrix g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Vector ei = Vector::Zero(m), ej = Vector::Zero(m);
      ei[i] = h;
      ej[j] = h;
      g(i, j) = (f2(v + ei + ej) - f2(v + ei - ej) - f2(v - ei + ej) + f2(v - ei - ej)) / (4 * h * h);
    }
  return g;
}

}  // namespace

CoreIdentityReport verify_core_identities(const MetricSpec& spec, const Box& domain, int samples,
                                          std::uint64_t seed) {
  if (domain.dimension() != spec.dimension())
    throw Error(ErrorCode::invalid_input, "domain dimension does not match the metric");
  if (samples < 1) throw Error(ErrorCode::invalid_input, "samples must be positive");
  const int m = spec.dimension();
  Tracker hom("homogeneity", 1e-10), tri("triangle", 1e-10), eig("min_eigenvalue", 0.0, true),
      euler("euler", 1e-10), zero_hom("g_homogeneity", 1e-10), fd("g_finite_difference", 1e-6),
      dual("dual_norm", 1e-9), round("legendre_roundtrip", 1e-9);
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Vector x = rng.point_in(domain);
    const Vector v = rng.direction(m) * rng.uniform(0.2, 3.0);
    const Vector w = rng.direction(m) * rng.uniform(0.2, 3.0);
    const double lambda = rng.uniform(0.0, 10.0);
    const double f = eval_F(spec, x, v);
    hom.observe(std::abs(eval_F(spec, x, lambda * v) - lambda * f) / f, x, v);
    tri.observe(eval_F(spec, x, v + w) - eval_F(spec, x, v) - eval_F(spec, x, w), x, v);
    const Matrix g = fundamental_tensor(spec, x, v).g;
    eig.observe(Eigen::SelfAdjointEigenSolver<Matrix>(g).eigenvalues().minCoeff(), x, v);
    const Vector l = legendre(spec, x, v);
    euler.observe(std::max((g * v - l).norm(), std::abs(v.dot(g * v) - f * f)) / (f * f), x, v);
    zero_hom.observe((fundamental_tensor(spec, x, (lambda + 0.1) * v).g - g).cwiseAbs().maxCoeff(), x, v);
    fd.observe((g - fd_half_hessian(spec, x, v, 1e-4)).cwiseAbs().maxCoeff(), x, v);
    dual.observe(std::abs(eval_F_star(spec, x, l) - f) / f, x, v);
    round.observe((legendre_inverse(spec, x, l).v - v).norm() / v.norm(), x, v);
  }
  CoreIdentityReport r;
  r.samples = samples;
  for (Tracker* t : {&hom, &tri, &eig, &euler, &zero_hom, &fd, &dual, &round}) r.checks.push_back(t->finish());
  r.passed = true;
  for (const auto& c : r.checks) r.passed = r.passed && c.passed;
  return r;
}

}  // namespace finsler
