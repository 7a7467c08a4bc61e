#include "finsler/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SVD>

#include "finsler/detail/kernels.hpp"

namespace finsler {
namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Stiffness matrix of sum_T |T| grad(phi_a) . W_T grad(phi_b) on the unknowns.
Sparse assemble_stiffness(const DirichletProblem& p, const std::vector<detail::CellFlux>* cells) {
  const auto& grid = p.grid();
  std::vector<Triplet> trip;
  const auto& geo = p.geometry();
  for (std::size_t c = 0; c < geo.size(); ++c) {
    const auto& t = geo[c];
    Mat<double, 2> w = identity_mat<double, 2>();
    double s = t.area;
    if (cells != nullptr) {
      w = (*cells)[c].d_omega;
      s = 1.0;
    }
    for (int a = 0; a < 3; ++a) {
      const int ra = grid.unknown(t.nodes[a]);
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int rb = grid.unknown(t.nodes[b]);
        if (rb < 0) continue;
        const Vec<double, 2> wb = matvec<double, double, 2>(w, t.grad[b]);
        trip.emplace_back(ra, rb, s * dot<double, 2>(t.grad[a], wb));
      }
    }
  }
  const int n = static_cast<int>(grid.interior().size());
  Sparse k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

class Evaluator {
 public:
  Evaluator(const DirichletProblem& p, Execution exec) : p_(p), exec_(exec) {}

  /// Energy and interior gradient (as an unknown-indexed vector).
  double eval(const std::vector<double>& u, Vector& g, bool hessian = false) {
    detail::cell_fluxes(p_, u, hessian, exec_, cells_, &warm_);
    detail::scatter_gradient(p_, cells_, full_);
    const auto& in = p_.grid().interior();
    g.resize(static_cast<int>(in.size()));
    for (std::size_t k = 0; k < in.size(); ++k) g[static_cast<int>(k)] = full_[in[k]];
    return detail::total_energy(cells_);
  }

  const std::vector<detail::CellFlux>& cells() const { return cells_; }
  int degenerate() const {
    int n = 0;
    for (const auto& c : cells_) n += c.degenerate;
    return n;
  }

 private:
  const DirichletProblem& p_;
  Execution exec_;
  std::vector<detail::CellFlux> cells_;
  std::vector<Vec<double, 2>> warm_;
  std::vector<double> full_;
};

void axpy(const Grid& grid, std::vector<double>& u, const std::vector<double>& base, double alpha, const Vector& d) {
  const auto& in = grid.interior();
  for (std::size_t k = 0; k < in.size(); ++k) u[in[k]] = base[in[k]] + alpha * d[static_cast<int>(k)];
}

}  // namespace

// ---------------------------------------------------------------------------

Grid::Grid(Shape shape, double radius, int n) : shape_(shape), radius_(radius), n_(n) {
  const int side = 2 * n + 1;
  points_.resize(side * side);
  unknown_.assign(side * side, -1);
  const double h = radius / n;
  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i) {
      Vector p(2);
      p << i * h, j * h;
      if (shape == Shape::ball && (i != 0 || j != 0))
        p *= std::max(std::abs(i), std::abs(j)) / std::sqrt(double(i * i + j * j));
      const int id = index(i, j);
      points_[id] = p;
      if (std::max(std::abs(i), std::abs(j)) == n) {
        boundary_.push_back(id);
      } else {
        unknown_[id] = static_cast<int>(interior_.size());
        interior_.push_back(id);
      }
    }
  for (int j = -n; j < n; ++j)
    for (int i = -n; i < n; ++i) {
      const int a = index(i, j), b = index(i + 1, j), c = index(i + 1, j + 1), d = index(i, j + 1);
      if ((i + 0.5) * (j + 0.5) > 0) {
        triangles_.push_back({a, b, c});
        triangles_.push_back({a, c, d});
      } else {
        triangles_.push_back({a, b, d});
        triangles_.push_back({b, c, d});
      }
    }
}

Grid Grid::ball(double radius, double h) {
  if (!(radius > 0.0) || !(h > 0.0) || h > radius) throw Error(ErrorCode::invalid_input, "grid needs 0 < h <= radius");
  return Grid(Shape::ball, radius, std::max(1, static_cast<int>(std::lround(radius / h))));
}

Grid Grid::square(double half_width, double h) {
  if (!(half_width > 0.0) || !(h > 0.0) || h > half_width)
    throw Error(ErrorCode::invalid_input, "grid needs 0 < h <= half width");
  return Grid(Shape::square, half_width, std::max(1, static_cast<int>(std::lround(half_width / h))));
}

// ---------------------------------------------------------------------------

DirichletProblem::DirichletProblem(MetricSpec spec, VolumeForm mu, Grid grid, double scale)
    : spec_(std::move(spec)), mu_(std::move(mu)), grid_(std::move(grid)), scale_(scale) {
  if (spec_.dimension() != 2) throw Error(ErrorCode::unsupported_dimension, "the Dirichlet solver is planar (m = 2)");
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw Error(ErrorCode::invalid_input, "scale must be positive");
  auto geo = std::make_shared<std::vector<Geometry>>();
  const auto& pts = grid_.points();
  for (const auto& tri : grid_.triangles()) {
    Geometry t;
    t.nodes = tri;
    const Vector& p0 = pts[tri[0]];
    const Vector& p1 = pts[tri[1]];
    const Vector& p2 = pts[tri[2]];
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    t.area = 0.5 * std::abs(det);
    // grad(phi_a) = rot90(opposite edge) / (2 signed area)
    for (int a = 0; a < 3; ++a) {
      const Vector& q1 = pts[tri[(a + 1) % 3]];
      const Vector& q2 = pts[tri[(a + 2) % 3]];
      t.grad[a] = {(q1[1] - q2[1]) / det, (q2[0] - q1[0]) / det};
    }
    t.centroid = {(p0[0] + p1[0] + p2[0]) / 3.0, (p0[1] + p1[1] + p2[1]) / 3.0};
    const Vec<double, 2> xs{scale_ * t.centroid[0], scale_ * t.centroid[1]};
    spec_.require_convex_at(to_eigen<2>(xs));
    t.sigma = detail::density<2, double>(mu_, xs);
    geo->push_back(t);
  }
  geometry_ = std::move(geo);
}

double DirichletProblem::energy(const std::vector<double>& u, Execution exec) const {
  std::vector<detail::CellFlux> cells;
  detail::cell_fluxes(*this, u, false, exec, cells);
  return detail::total_energy(cells);
}

std::vector<double> DirichletProblem::energy_gradient(const std::vector<double>& u, Execution exec) const {
  std::vector<detail::CellFlux> cells;
  detail::cell_fluxes(*this, u, false, exec, cells);
  std::vector<double> g;
  detail::scatter_gradient(*this, cells, g);
  return g;
}

double DirichletProblem::weak_form(const std::vector<double>& u, const std::vector<double>& eta,
                                   Execution exec) const {
  std::vector<detail::CellFlux> cells;
  detail::cell_fluxes(*this, u, false, exec, cells);
  double s = 0.0;
  const auto& geo = *geometry_;
  for (std::size_t c = 0; c < cells.size(); ++c)
    s += dot<double, 2>(cells[c].flux, detail::cell_gradient(geo[c], eta));
  return s;
}

double DirichletProblem::h1_norm(const std::vector<double>& eta) const {
  double s = 0.0;
  for (const auto& t : *geometry_) {
    const auto d = detail::cell_gradient(t, eta);
    double sum = 0.0, sq = 0.0;
    for (int a = 0; a < 3; ++a) {
      sum += eta[t.nodes[a]];
      sq += eta[t.nodes[a]] * eta[t.nodes[a]];
    }
    s += t.area * (dot<double, 2>(d, d) + (sq + sum * sum) / 12.0);
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

DirichletSolution solve_dirichlet(const DirichletProblem& problem, const ScalarFunction& boundary,
                                  const SolverOptions& options) {
  const Grid& grid = problem.grid();
  DirichletSolution sol;
  sol.u.assign(grid.node_count(), 0.0);
  for (int n = 0; n < grid.node_count(); ++n) {
    const double v = boundary(grid.points()[n]);
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "boundary data is not finite");
    // Interior nodes start from the same function; boundary values stay fixed.
    sol.u[n] = v;
  }
  const int n = static_cast<int>(grid.interior().size());
  if (n == 0) {
    sol.energy = problem.energy(sol.u, options.exec);
    return sol;
  }

  Evaluator ev(problem, options.exec);
  Vector g;
  double e = ev.eval(sol.u, g);
  const Eigen::SimplicialLDLT<Sparse> precond(assemble_stiffness(problem, nullptr));
  std::vector<double> base;

  // Preconditioned nonlinear CG (Polak-Ribiere+) with the Laplacian as preconditioner.
  auto ncg = [&](double stop) {
    Vector z = precond.solve(g);
    Vector d = -z;
    double gz = g.dot(z);
    double alpha = 1.0;
    while (g.cwiseAbs().maxCoeff() > stop && sol.ncg_iterations < options.max_ncg) {
      ++sol.ncg_iterations;
      if (g.dot(d) >= 0.0) d = -z;
      const double slope0 = g.dot(d);
      base = sol.u;
      // Secant search on the directional derivative, guarded by energy decrease.
      double a_prev = 0.0, s_prev = slope0, a = alpha;
      Vector g_new;
      double e_new = e;
      for (int it = 0; it < 12; ++it) {
        axpy(grid, sol.u, base, a, d);
        e_new = ev.eval(sol.u, g_new);
        const double s = g_new.dot(d);
        if (std::abs(s) <= 0.1 * std::abs(slope0) && e_new <= e) break;
        double next = (s_prev - s) != 0.0 ? a - s * (a - a_prev) / (s - s_prev) : 2.0 * a;
        if (!(next > 0.0) || !std::isfinite(next)) next = 0.5 * a;
        next = std::min(next, 10.0 * a);
        a_prev = a;
        s_prev = s;
        a = next;
      }
      if (!(e_new <= e)) {
        d = -z;
        a = 1.0;
        for (int it = 0; it < 40; ++it) {
          axpy(grid, sol.u, base, a, d);
          e_new = ev.eval(sol.u, g_new);
          if (e_new <= e + 1e-4 * a * g.dot(d)) break;
          a *= 0.5;
        }
      }
      alpha = a;
      const Vector z_new = precond.solve(g_new);
      const double gz_new = g_new.dot(z_new);
      const double beta = std::max(0.0, (gz_new - g_new.dot(z)) / gz);
      d = -z_new + beta * d;
      g = g_new;
      z = z_new;
      gz = gz_new;
      e = e_new;
    }
  };

  ncg(std::max(options.tol, options.ncg_handoff));

  // Newton with the exact Hessian sum_T |T| sigma g*, while no cell is degenerate.
  bool newton_ok = true;
  while (g.cwiseAbs().maxCoeff() > options.tol && sol.newton_iterations < options.max_newton) {
    e = ev.eval(sol.u, g, true);
    if (ev.degenerate() > 0) {
      newton_ok = false;
      break;
    }
    ++sol.newton_iterations;
    const Eigen::SimplicialLLT<Sparse> chol(assemble_stiffness(problem, &ev.cells()));
    if (chol.info() != Eigen::Success) {
      newton_ok = false;
      break;
    }
    const Vector step = -chol.solve(g);
    base = sol.u;
    const double g0 = g.cwiseAbs().maxCoeff();
    double a = 1.0;
    Vector g_new;
    double e_new = e;
    for (int it = 0; it < 30; ++it) {
      axpy(grid, sol.u, base, a, step);
      e_new = ev.eval(sol.u, g_new);
      // Near convergence energy differences drown in rounding; accept a gradient decrease.
      if (e_new <= e + 1e-4 * a * g.dot(step) || g_new.cwiseAbs().maxCoeff() < 0.5 * g0) break;
      a *= 0.5;
    }
    g = g_new;
    e = e_new;
  }
  if (!newton_ok) ncg(options.tol);

  e = ev.eval(sol.u, g);
  sol.energy = e;
  sol.gradient_norm = g.cwiseAbs().maxCoeff();
  sol.degenerate_cells = ev.degenerate();
  if (!(sol.gradient_norm <= options.tol)) {
    std::ostringstream os;
    os << "Dirichlet solver stopped with max |dE/du| = " << sol.gradient_norm << " after " << sol.ncg_iterations
       << " NCG and " << sol.newton_iterations << " Newton iterations";
    throw Error(ErrorCode::no_convergence, os.str(), sol.gradient_norm);
  }
  return sol;
}

// ---------------------------------------------------------------------------

HarmonicChart build_chart(const MetricSpec& spec, const VolumeForm& mu, const Grid& grid, double scale,
                          const SolverOptions& options, double delta_det) {
  const DirichletProblem problem(spec, mu, grid, scale);
  HarmonicChart chart{grid, scale, delta_det, {}, {}, {}, Matrix(), 0.0, 0.0, 0.0, 0.0, {}};
  for (int i = 0; i < 2; ++i) {
    chart.fields[i] = solve_dirichlet(problem, ScalarFunction::coordinate(i, 2), options);
    chart.residual[i] = chart.fields[i].gradient_norm;
  }

  const auto& pts = grid.points();
  const int nodes = grid.node_count();
  chart.jacobian.assign(nodes, Matrix());
  chart.det.assign(nodes, NAN);
  const int n = grid.half_cells();
  for (int j = -n + 1; j < n; ++j)
    for (int i = -n + 1; i < n; ++i) {
      const int c = grid.index(i, j);
      const int nb[4] = {grid.index(i + 1, j), grid.index(i - 1, j), grid.index(i, j + 1), grid.index(i, j - 1)};
      // Least-squares linear fit through the node and its axis neighbours;
      // centered differences wherever the neighbours are symmetric.
      Matrix a(4, 2), rhs(4, 2);
      for (int k = 0; k < 4; ++k) {
        a.row(k) = (pts[nb[k]] - pts[c]).transpose();
        for (int f = 0; f < 2; ++f) rhs(k, f) = chart.fields[f].u[nb[k]] - chart.fields[f].u[c];
      }
      const Matrix jt = (a.transpose() * a).ldlt().solve(a.transpose() * rhs);
      chart.jacobian[c] = jt.transpose();
      chart.det[c] = chart.jacobian[c].determinant();
    }

  chart.jacobian_center = chart.jacobian[grid.center()];
  const Matrix dev = chart.jacobian_center - Matrix::Identity(2, 2);
  chart.deviation_center = Eigen::JacobiSVD<Matrix>(dev).singularValues()[0];

  double area = 0.0, sq = 0.0;
  for (const auto& t : problem.geometry()) {
    Matrix d(2, 2);
    for (int f = 0; f < 2; ++f) {
      const auto g = detail::cell_gradient(t, chart.fields[f].u);
      d(f, 0) = g[0];
      d(f, 1) = g[1];
    }
    area += t.area;
    sq += t.area * (d - Matrix::Identity(2, 2)).squaredNorm();
  }
  chart.deviation_l2 = std::sqrt(sq / area);

  for (int k = 0; k < nodes; ++k)
    for (int f = 0; f < 2; ++f) chart.identity_error = std::max(chart.identity_error, std::abs(chart.fields[f].u[k] - pts[k][f]));

  if (!(std::abs(chart.det[grid.center()]) >= delta_det))
    throw Error(ErrorCode::chart_degenerate, "|det D Phi| < delta_det at the center", chart.det[grid.center()]);
  chart.certified_radius = grid.radius();
  for (int k : grid.interior())
    if (!(std::abs(chart.det[k]) >= delta_det)) chart.certified_radius = std::min(chart.certified_radius, pts[k].norm());
  return chart;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    const double lx = std::log(x[k]), ly = std::log(std::max(y[k], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RescalingTable rescaling_experiment(const MetricSpec& spec, const VolumeForm& mu, const std::vector<double>& eps,
                                    double h, const SolverOptions& options) {
  if (eps.empty()) throw Error(ErrorCode::invalid_input, "rescaling needs at least one epsilon");
  for (std::size_t k = 0; k < eps.size(); ++k)
    if (!(eps[k] > 0.0) || (k > 0 && !(eps[k] < eps[k - 1])))
      throw Error(ErrorCode::invalid_input, "epsilon values must be positive and decreasing");
  const Grid grid = Grid::ball(1.0, h);
  RescalingTable table;
  std::vector<double> dev, dev_l2;
  for (double e : eps) {
    const HarmonicChart c = build_chart(spec, mu, grid, e, options);
    table.rows.push_back({e, c.deviation_center, c.deviation_l2,
                          c.fields[0].newton_iterations + c.fields[1].newton_iterations});
    dev.push_back(c.deviation_center);
    dev_l2.push_back(c.deviation_l2);
  }
  table.strictly_decreasing = true;
  for (std::size_t k = 1; k < dev.size(); ++k)
    if (!(dev[k] < dev[k - 1])) table.strictly_decreasing = false;
  if (eps.size() >= 2) {
    table.slope = loglog_slope(eps, dev);
    table.slope_l2 = loglog_slope(eps, dev_l2);
  }
  return table;
}

WeakResidualReport weak_residual(const DirichletProblem& problem, const std::vector<double>& u, int tests,
                                 std::uint64_t seed) {
  Rng rng(seed);
  WeakResidualReport r;
  r.tests = tests;
  const Grid& grid = problem.grid();
  for (int t = 0; t < tests; ++t) {
    std::vector<double> eta(grid.node_count(), 0.0);
    for (int k : grid.interior()) eta[k] = rng.uniform(-1.0, 1.0);
    const double ratio = std::abs(problem.weak_form(u, eta)) / problem.h1_norm(eta);
    r.max_ratio = std::max(r.max_ratio, ratio);
  }
  return r;
}

}  // namespace finsler
