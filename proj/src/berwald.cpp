#include "finsler/berwald.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "finsler/detail/parallel.hpp"
#include "finsler/detail/spray_fixed.hpp"

namespace finsler {
namespace {

template <int M, int K>
using XJet = ad::Jet<double, M, K>;

template <int M, int K>
Mat<XJet<M, K>, M> h_jet(const MetricSpec& spec, const Vector& x, int n, IndicatrixMeasure measure) {
  using S = XJet<M, K>;
  Vec<S, M> xs;
  for (int i = 0; i < M; ++i) xs[i] = S::variable(x[i], i);
  return detail::averaged_metric_at<M, S>(spec, xs, n, measure);
}

/// Levi-Civita symbols of h as jets one order lower than h.
template <int M, int K>
std::array<Mat<XJet<M, K - 1>, M>, M> levi_civita(const Mat<XJet<M, K>, M>& h) {
  using L = XJet<M, K - 1>;
  Mat<L, M> low;
  std::array<Mat<L, M>, M> dh;  // dh[l][i][j] = d_l h_ij
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      low[i][j] = ad::truncate<K - 1>(h[i][j]);
      for (int l = 0; l < M; ++l) dh[l][i][j] = ad::derivative(h[i][j], l);
    }
  const Mat<L, M> hi = inverse<L, M>(low);
  std::array<Mat<L, M>, M> gam;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      for (int k = 0; k < M; ++k) {
        L s = L(0.0);
        for (int l = 0; l < M; ++l) s += hi[i][l] * (dh[j][l][k] + dh[k][l][j] - dh[l][j][k]);
        gam[i][j][k] = s * 0.5;
      }
  return gam;
}

void check_point(const MetricSpec& spec, const Vector& x, int n) {
  require_dimension(x, spec.dimension(), "x");
  require_finite(x, "x");
  if (n < 16) throw Error(ErrorCode::invalid_input, "indicatrix quadrature needs at least 16 nodes");
  spec.require_convex_at(x);
}

void check_domain(const MetricSpec& spec, const Box& domain, int points) {
  if (domain.dimension() != spec.dimension())
    throw Error(ErrorCode::invalid_input, "domain dimension does not match the metric");
  if (points < 1) throw Error(ErrorCode::invalid_input, "at least one sample point is required");
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------

BerwaldReport is_berwald(const MetricSpec& spec, const Box& domain, double tol, int points, std::uint64_t seed,
                         Execution exec) {
  if (!(tol > 0.0)) throw Error(ErrorCode::invalid_input, "tolerance must be positive");
  check_domain(spec, domain, points);
  const int m = spec.dimension();
  const int directions = 4 * m;

  struct Sample {
    Vector x;
    std::vector<Vector> ys;
  };
  Rng rng(seed);
  std::vector<Sample> plan(points);
  for (auto& s : plan) {
    s.x = rng.point_in(domain);
    for (int d = 0; d < directions; ++d) s.ys.push_back(rng.direction(m));
  }

  struct Outcome {
    double residual = 0.0;
    int worst = 0;
  };
  std::vector<Outcome> out(points);
  detail::parallel_for(points, exec, [&](int p) {
    const Sample& s = plan[p];
    Matrix y(directions, m);
    std::vector<Matrix> n;
    for (int d = 0; d < directions; ++d) {
      y.row(d) = s.ys[d].transpose();
      n.push_back(spray(spec, s.x, s.ys[d]).N);
    }
    const auto qr = y.colPivHouseholderQr();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Vector rhs(directions);
        for (int d = 0; d < directions; ++d) rhs[d] = n[d](i, j);
        const Vector fit = qr.solve(rhs);
        const Vector r = y * fit - rhs;
        int worst = 0;
        const double res = r.cwiseAbs().maxCoeff(&worst);
        if (res > out[p].residual) out[p] = {res, worst};
      }
  });

  BerwaldReport report;
  report.points = points;
  int worst = 0;
  for (int p = 0; p < points; ++p)
    if (out[p].residual > report.max_nonlinearity) {
      report.max_nonlinearity = out[p].residual;
      worst = p;
    }
  report.berwald = report.max_nonlinearity <= tol;
  report.witness_x = plan[worst].x;
  report.witness_y = plan[worst].ys[out[worst].worst];
  return report;
}

double IndicatrixQuadrature::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

IndicatrixQuadrature indicatrix_quadrature(const MetricSpec& spec, const Vector& x, int n,
                                           IndicatrixMeasure measure) {
  check_point(spec, x, n);
  return detail::dispatch(spec.dimension(), [&](auto m) -> IndicatrixQuadrature {
    constexpr int M = decltype(m)::value;
    IndicatrixQuadrature q{x, {}, {}, measure};
    const auto xa = to_array<M>(x);
    for (const auto& node : detail::angular_nodes<M>(n)) {
      const auto p = detail::indicatrix_point<M, double>(spec, xa, node, measure);
      q.nodes.push_back(to_eigen<M>(p.y));
      q.weights.push_back(p.weight);
    }
    return q;
  });
}

// ---------------------------------------------------------------------------

AveragedMetric::AveragedMetric(MetricSpec spec, int nodes, IndicatrixMeasure measure)
    : spec_(std::move(spec)), nodes_(nodes), measure_(measure) {
  if (nodes_ < 16) throw Error(ErrorCode::invalid_input, "indicatrix quadrature needs at least 16 nodes");
}

AveragedMetric averaged_metric(const MetricSpec& spec, int n, IndicatrixMeasure measure) {
  return AveragedMetric(spec, n, measure);
}

Matrix AveragedMetric::operator()(const Vector& x) const {
  check_point(spec_, x, nodes_);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Matrix {
    constexpr int M = decltype(m)::value;
    return to_eigen<M>(detail::averaged_metric_at<M, double>(spec_, to_array<M>(x), nodes_, measure_));
  });
}

std::vector<Matrix> AveragedMetric::gradient(const Vector& x) const {
  check_point(spec_, x, nodes_);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> std::vector<Matrix> {
    constexpr int M = decltype(m)::value;
    const auto h = h_jet<M, 1>(spec_, x, nodes_, measure_);
    std::vector<Matrix> out(M, Matrix(M, M));
    for (int k = 0; k < M; ++k)
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) out[k](i, j) = h[i][j].d(k);
    return out;
  });
}

Tensor3 AveragedMetric::christoffel(const Vector& x) const {
  check_point(spec_, x, nodes_);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Tensor3 {
    constexpr int M = decltype(m)::value;
    const auto gam = levi_civita<M, 1>(h_jet<M, 1>(spec_, x, nodes_, measure_));
    Tensor3 out(M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int k = 0; k < M; ++k) out(i, j, k) = gam[i][j][k].value();
    return out;
  });
}

Tensor4 AveragedMetric::riemann(const Vector& x) const {
  check_point(spec_, x, nodes_);
  return detail::dispatch(spec_.dimension(), [&](auto m) -> Tensor4 {
    constexpr int M = decltype(m)::value;
    const auto gam = levi_civita<M, 2>(h_jet<M, 2>(spec_, x, nodes_, measure_));
    Tensor4 r(M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        for (int k = 0; k < M; ++k)
          for (int l = 0; l < M; ++l) {
            double s = gam[i][j][l].d(k) - gam[i][j][k].d(l);
            for (int n = 0; n < M; ++n)
              s += gam[n][j][l].value() * gam[i][n][k].value() - gam[n][j][k].value() * gam[i][n][l].value();
            r(i, j, k, l) = s;
          }
    return r;
  });
}

Matrix AveragedMetric::ricci(const Vector& x) const {
  const Tensor4 r = riemann(x);
  Matrix out = Matrix::Zero(r.m, r.m);
  for (int j = 0; j < r.m; ++j)
    for (int l = 0; l < r.m; ++l)
      for (int i = 0; i < r.m; ++i) out(j, l) += r(i, j, i, l);
  return out;
}

// ---------------------------------------------------------------------------

SzaboReport szabo_check(const MetricSpec& spec, int n, const Box& domain, double tol, int points,
                        std::uint64_t seed, IndicatrixMeasure measure, Execution exec) {
  check_domain(spec, domain, points);
  const auto conn = Connection::berwald(spec);
  const AveragedMetric h(spec, n, measure);
  Rng rng(seed);
  std::vector<Vector> xs(points);
  for (auto& x : xs) x = rng.point_in(domain);

  std::vector<double> dev(points);
  detail::parallel_for(points, exec, [&](int p) {
    const Tensor3 a = h.christoffel(xs[p]);
    const Tensor3 b = conn.christoffel(xs[p]);
    double d = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) d = std::max(d, std::abs(a.data[k] - b.data[k]));
    dev[p] = d;
  });

  SzaboReport r;
  r.points = points;
  r.tol = tol;
  const auto worst = std::max_element(dev.begin(), dev.end()) - dev.begin();
  r.max_deviation = dev[worst];
  r.witness = xs[worst];
  r.passed = r.max_deviation <= tol;
  return r;
}

RicciIdentityReport ricci_identity_check(const MetricSpec& spec, int n, const Box& domain, double tol, int points,
                                         std::uint64_t seed, IndicatrixMeasure measure, Execution exec) {
  check_domain(spec, domain, points);
  const int m = spec.dimension();
  const auto conn = Connection::berwald(spec);
  const SzaboReport szabo = szabo_check(spec, n, domain, 1e-5, points, seed, measure, exec);
  const AveragedMetric h(spec, n, measure);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Vector> xs(points);
  std::vector<std::vector<Vector>> ys(points);
  for (int p = 0; p < points; ++p) {
    xs[p] = rng.point_in(domain);
    for (int d = 0; d < 4; ++d) ys[p].push_back(rng.direction(m) * rng.uniform(0.5, 2.0));
  }

  struct Outcome {
    double variation, hessian_vs_chern, chern_vs_h;
  };
  std::vector<Outcome> out(points);
  detail::parallel_for(points, exec, [&](int p) {
    const Vector& x = xs[p];
    const Matrix hess = ricci_scalar_hessian(spec, x, ys[p][0]);
    double variation = 0.0;
    for (std::size_t d = 1; d < ys[p].size(); ++d)
      variation = std::max(variation, max_abs_diff(ricci_scalar_hessian(spec, x, ys[p][d]), hess));
    const Tensor4 r4 = chern_from_berwald(conn, x);
    Matrix chern = Matrix::Zero(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int i = 0; i < m; ++i) chern(a, b) += r4(i, a, i, b);
    const double h_dev = szabo.passed ? max_abs_diff(chern, h.ricci(x)) : NAN;
    out[p] = {variation, max_abs_diff(hess, chern), h_dev};
  });

  RicciIdentityReport r;
  r.points = points;
  r.tol = tol;
  r.szabo_passed = szabo.passed;
  r.witness = xs[0];
  if (szabo.passed) r.chern_vs_h = 0.0;
  for (int p = 0; p < points; ++p) {
    const double worst = std::max({out[p].variation, out[p].hessian_vs_chern,
                                   szabo.passed ? out[p].chern_vs_h : 0.0});
    if (worst > r.max_deviation) {
      r.max_deviation = worst;
      r.witness = xs[p];
    }
    r.y_variation = std::max(r.y_variation, out[p].variation);
    r.hessian_vs_chern = std::max(r.hessian_vs_chern, out[p].hessian_vs_chern);
    if (szabo.passed) r.chern_vs_h = std::max(r.chern_vs_h, out[p].chern_vs_h);
  }
  r.passed = r.max_deviation <= tol;
  return r;
}

}  // namespace finsler
