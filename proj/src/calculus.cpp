#include "finsler/calculus.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "finsler/detail/calculus_fixed.hpp"
#include "finsler/detail/parallel.hpp"

namespace finsler {

VolumeForm VolumeForm::riemannian(const MetricSpec& spec) {
  if (const auto* r = std::get_if<MetricSpec::Riemannian>(&spec.kind())) return sqrt_det(r->a);
  if (const auto* r = std::get_if<MetricSpec::Randers>(&spec.kind())) return sqrt_det(r->a);
  if (std::holds_alternative<MetricSpec::Euclidean>(spec.kind())) return lebesgue();
  throw Error(ErrorCode::invalid_input, "sqrt(det A) volume needs a Riemannian or Randers metric");
}

VolumeForm VolumeForm::averaged(const MetricSpec& spec, int nodes, IndicatrixMeasure measure) {
  if (nodes < 16) throw Error(ErrorCode::invalid_input, "averaged volume needs at least 16 indicatrix nodes");
  return VolumeForm(SqrtDetAveraged{std::make_shared<const MetricSpec>(spec), nodes, measure});
}

std::string VolumeForm::name() const {
  return std::visit(overloaded{
                        [](const Lebesgue&) { return std::string("lebesgue"); },
                        [](const SqrtDet&) { return std::string("sqrt-det-riemannian"); },
                        [](const SqrtDetAveraged&) { return std::string("sqrt-det-averaged"); },
                    },
                    kind_);
}

double VolumeForm::density(const Vector& x) const {
  require_finite(x, "x");
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) {
    constexpr int M = decltype(m)::value;
    return detail::density<M, double>(*this, to_array<M>(x));
  });
}

Vector VolumeForm::density_gradient(const Vector& x) const {
  require_finite(x, "x");
  return detail::dispatch(static_cast<int>(x.size()), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::density_with_gradient<M>(*this, to_array<M>(x)).gradient);
  });
}

AMap::AMap(MetricSpec spec, VolumeForm mu, double scale) : spec_(std::move(spec)), mu_(std::move(mu)), scale_(scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::invalid_input, "A-map scale must be positive");
}

Vector AMap::operator()(const Vector& x, const Vector& omega) const {
  require_dimension(x, spec_.dimension(), "x");
  require_dimension(omega, spec_.dimension(), "omega");
  require_finite(x, "x");
  require_finite(omega, "omega");
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::amap_value<M>(spec_, mu_, scale_, to_array<M>(x), to_array<M>(omega)));
  });
}

AMap::Derivatives AMap::derivatives(const Vector& x, const Vector& omega) const {
  require_dimension(x, spec_.dimension(), "x");
  require_dimension(omega, spec_.dimension(), "omega");
  require_finite(x, "x");
  require_finite(omega, "omega");
  if (omega.isZero(0.0)) throw Error(ErrorCode::degenerate_direction, "A-map derivatives at omega = 0");
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Derivatives {
    constexpr int M = decltype(m)::value;
    const auto a = detail::amap<M>(spec_, mu_, scale_, to_array<M>(x), to_array<M>(omega));
    return {to_eigen<M>(a.value), to_eigen<M>(a.d_omega), to_eigen<M>(a.d_x)};
  });
}

namespace {

template <int M>
struct Differential {
  double value;
  Vec<double, M> d;
  Mat<double, M> hess;
};

template <int M>
Differential<M> differential(const ScalarFunction& f, const Vec<double, M>& x) {
  using J = ad::Jet<double, M, 2>;
  Vec<J, M> xj;
  for (int i = 0; i < M; ++i) xj[i] = J::variable(x[i], i);
  const J fj = f.evaluate<M, J>(xj);
  Differential<M> out;
  out.value = fj.value();
  for (int i = 0; i < M; ++i) {
    out.d[i] = fj.d(i);
    for (int j = 0; j < M; ++j) out.hess[i][j] = fj.d(i, j);
  }
  return out;
}

template <int M>
Vec<double, M> df_at(const ScalarFunction& f, const Vec<double, M>& x) {
  using J = ad::Jet<double, M, 1>;
  Vec<J, M> xj;
  for (int i = 0; i < M; ++i) xj[i] = J::variable(x[i], i);
  const J fj = f.evaluate<M, J>(xj);
  Vec<double, M> d;
  for (int i = 0; i < M; ++i) d[i] = fj.d(i);
  return d;
}

void check_inputs(const MetricSpec& spec, const Vector& x) {
  require_dimension(x, spec.dimension(), "x");
  require_finite(x, "x");
  spec.require_convex_at(x);
}

}  // namespace

Vector gradient(const MetricSpec& spec, const ScalarFunction& f, const Vector& x) {
  check_inputs(spec, x);
  return detail::dispatch(spec.dimension(), [&](auto m) -> Vector {
    constexpr int M = decltype(m)::value;
    const auto xa = to_array<M>(x);
    const auto d = df_at<M>(f, xa);
    if (detail::is_zero<M>(d)) return Vector::Zero(M);
    return to_eigen<M>(detail::legendre_inverse_fixed<M>(spec, xa, d).v);
  });
}

LaplacianValue laplacian(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f, const Vector& x,
                         double fallback_step) {
  check_inputs(spec, x);
  return detail::dispatch(spec.dimension(), [&](auto m) -> LaplacianValue {
    constexpr int M = decltype(m)::value;
    const auto xa = to_array<M>(x);
    const auto diff = differential<M>(f, xa);
    if (!std::isfinite(diff.value)) throw Error(ErrorCode::invalid_input, "test function is not finite at x");

    if (!detail::is_zero<M>(diff.d)) {
      const auto a = detail::amap<M>(spec, mu, 1.0, xa, diff.d);
      double div = 0.0;
      for (int i = 0; i < M; ++i) {
        div += a.d_x[i][i];
        for (int j = 0; j < M; ++j) div += a.d_omega[i][j] * diff.hess[j][i];
      }
      return {div / a.sigma, false};
    }

    // df(x) = 0: symmetric differences of x -> A(x, df(x)).
    const double h = fallback_step;
    double div = 0.0;
    for (int i = 0; i < M; ++i) {
      Vec<double, M> xp = xa, xm = xa;
      xp[i] += h;
      xm[i] -= h;
      const auto ap = detail::amap_value<M>(spec, mu, 1.0, xp, df_at<M>(f, xp));
      const auto am = detail::amap_value<M>(spec, mu, 1.0, xm, df_at<M>(f, xm));
      div += (ap[i] - am[i]) / (2 * h);
    }
    return {div / detail::density<M, double>(mu, xa), true};
  });
}

double laplacian_grid(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f, const Vector& x,
                      double h) {
  check_inputs(spec, x);
  if (!(h > 0.0)) throw Error(ErrorCode::invalid_input, "grid spacing must be positive");
  return detail::dispatch(spec.dimension(), [&](auto m) -> double {
    constexpr int M = decltype(m)::value;
    const auto xa = to_array<M>(x);
    auto node = [&](int i, int si, int j, int sj) {
      Vec<double, M> p = xa;
      if (i >= 0) p[i] += si * h;
      if (j >= 0) p[j] += sj * h;
      return f.evaluate<M, double>(p);
    };
    const double f0 = node(-1, 0, -1, 0);
    double div = 0.0;
    for (int i = 0; i < M; ++i) {
      for (int s : {1, -1}) {
        Vec<double, M> face = xa;
        face[i] += 0.5 * s * h;
        Vec<double, M> w;
        w[i] = s * (node(i, s, -1, 0) - f0) / h;
        for (int j = 0; j < M; ++j) {
          if (j == i) continue;
          const double here = (node(j, 1, -1, 0) - node(j, -1, -1, 0)) / (2 * h);
          const double there = (node(i, s, j, 1) - node(i, s, j, -1)) / (2 * h);
          w[j] = 0.5 * (here + there);
        }
        div += s * detail::amap_value<M>(spec, mu, 1.0, face, w)[i] / h;
      }
    }
    return div / detail::density<M, double>(mu, xa);
  });
}

EnergyEstimate dirichlet_energy(const MetricSpec& spec, const VolumeForm& mu, const ScalarFunction& f,
                                const Box& domain, int cells, Execution exec) {
  if (domain.dimension() != spec.dimension()) throw Error(ErrorCode::invalid_input, "domain dimension mismatch");
  if (cells < 1) throw Error(ErrorCode::invalid_input, "cells must be positive");
  return detail::dispatch(spec.dimension(), [&](auto m) -> EnergyEstimate {
    constexpr int M = decltype(m)::value;
    const detail::GaussRule gl = detail::gauss_legendre(3, 0.0, 1.0);

    auto integrate = [&](int n) {
      int total = 1;
      for (int k = 0; k < M; ++k) total *= n;
      std::vector<double> per_cell(total, 0.0);
      detail::parallel_for(total, exec, [&](int c) {
        std::array<int, M> idx;
        int rest = c;
        double vol = 1.0;
        Vec<double, M> lo, width;
        for (int k = 0; k < M; ++k) {
          idx[k] = rest % n;
          rest /= n;
          width[k] = (domain.hi[k] - domain.lo[k]) / n;
          lo[k] = domain.lo[k] + idx[k] * width[k];
          vol *= width[k];
        }
        double sum = 0.0;
        int q[M] = {};
        for (;;) {
          Vec<double, M> p;
          double w = vol;
          for (int k = 0; k < M; ++k) {
            p[k] = lo[k] + gl.nodes[q[k]] * width[k];
            w *= gl.weights[q[k]];
          }
          const auto d = df_at<M>(f, p);
          if (!detail::is_zero<M>(d)) {
            const auto v = detail::legendre_inverse_fixed<M>(spec, p, d).v;
            sum += w * 0.5 * dot<double, M>(d, v) * detail::density<M, double>(mu, p);
          }
          int k = 0;
          while (k < M && ++q[k] == 3) q[k++] = 0;
          if (k == M) break;
        }
        per_cell[c] = sum;
      });
      double e = 0.0;
      for (double v : per_cell) e += v;
      return e;
    };

    EnergyEstimate out;
    out.value = integrate(cells);
    out.refined = integrate(2 * cells);
    out.richardson = (64.0 * out.refined - out.value) / 63.0;
    out.error = std::abs(out.refined - out.value);
    return out;
  });
}

namespace {

template <int M>
double spectral_norm(const Mat<double, M>& a) {
  return Eigen::JacobiSVD<Matrix>(to_eigen<M>(a)).singularValues()(0);
}

template <int M>
double min_sym_eigenvalue(const Mat<double, M>& a) {
  Matrix s = to_eigen<M>(a);
  s = 0.5 * (s + s.transpose()).eval();
  return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

template <int M>
Vector as_vector(const Vec<double, M>& v) {
  return to_eigen<M>(v);
}

}  // namespace

StructureReport verify_structure_conditions(const MetricSpec& spec, const VolumeForm& mu, const Box& domain,
                                            int samples, std::uint64_t seed, Execution exec) {
  if (samples < 1) throw Error(ErrorCode::invalid_input, "samples must be at least 1");
  if (domain.dimension() != spec.dimension()) throw Error(ErrorCode::invalid_input, "domain dimension mismatch");
  return detail::dispatch(spec.dimension(), [&](auto m) -> StructureReport {
    constexpr int M = decltype(m)::value;

    enum class PairKind { general, antipodal, zero, close };
    struct Sample {
      Vec<double, M> x, w1, w2;
      PairKind kind;
    };
    Rng rng(seed);
    auto covector = [&]() {
      const Vector d = rng.direction(M);
      const double r = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
      return to_array<M>(Vector(d * r));
    };
    std::vector<Sample> plan(samples);
    for (int s = 0; s < samples; ++s) {
      Sample& p = plan[s];
      p.x = to_array<M>(rng.point_in(domain));
      p.kind = static_cast<PairKind>(s % 4);
      p.w1 = covector();
      switch (p.kind) {
        case PairKind::general: p.w2 = covector(); break;
        case PairKind::antipodal: {
          const double lambda = std::exp(rng.uniform(std::log(0.05), std::log(5.0)));
          for (int i = 0; i < M; ++i) p.w2[i] = -lambda * p.w1[i];
          break;
        }
        case PairKind::zero: p.w2 = zero_vec<double, M>(); break;
        case PairKind::close: {
          const auto d = covector();
          for (int i = 0; i < M; ++i) p.w2[i] = p.w1[i] + 1e-3 * d[i];
          break;
        }
      }
    }

    struct Result {
      double growth, ellipticity, monotonicity;
    };
    std::vector<Result> results(samples);
    detail::parallel_for(samples, exec, [&](int s) {
      const Sample& p = plan[s];
      const auto a = detail::amap<M>(spec, mu, 1.0, p.x, p.w1);
      const double wn = detail::norm2<M>(p.w1);
      const double growth =
          (detail::norm2<M>(a.value) + spectral_norm<M>(a.d_x) + wn * spectral_norm<M>(a.d_omega)) / wn;
      const auto a2 = detail::amap_value<M>(spec, mu, 1.0, p.x, p.w2);
      double num = 0.0, den = 0.0;
      for (int i = 0; i < M; ++i) {
        num += (a2[i] - a.value[i]) * (p.w2[i] - p.w1[i]);
        den += (p.w2[i] - p.w1[i]) * (p.w2[i] - p.w1[i]);
      }
      results[s] = {growth, min_sym_eigenvalue<M>(a.d_omega), num / den};
    });

    StructureReport rep;
    rep.pairs = samples;
    for (int s = 0; s < samples; ++s) {
      const Sample& p = plan[s];
      const Result& r = results[s];
      if (p.kind == PairKind::antipodal) ++rep.antipodal_pairs;
      if (p.kind == PairKind::zero) ++rep.zero_pairs;
      rep.max_growth_ratio = std::max(rep.max_growth_ratio, r.growth);
      rep.min_ellipticity = std::min(rep.min_ellipticity, r.ellipticity);
      rep.min_monotonicity = std::min(rep.min_monotonicity, r.monotonicity);
      if (!std::isfinite(r.growth))
        rep.violations.push_back({"growth", as_vector<M>(p.x), as_vector<M>(p.w1), as_vector<M>(p.w2), r.growth});
      if (!(r.ellipticity > 0.0))
        rep.violations.push_back({"ellipticity", as_vector<M>(p.x), as_vector<M>(p.w1), as_vector<M>(p.w2), r.ellipticity});
      if (!(r.monotonicity > 0.0))
        rep.violations.push_back({"monotonicity", as_vector<M>(p.x), as_vector<M>(p.w1), as_vector<M>(p.w2), r.monotonicity});
    }
    rep.c_growth = rep.max_growth_ratio;
    rep.c_ellipticity = rep.min_ellipticity > 0.0 ? 1.0 / rep.min_ellipticity : INFINITY;
    rep.c_monotonicity = rep.min_monotonicity > 0.0 ? 1.0 / rep.min_monotonicity : INFINITY;
    rep.c = std::max({rep.c_growth, rep.c_ellipticity, rep.c_monotonicity});
    return rep;
  });
}

}  // namespace finsler
