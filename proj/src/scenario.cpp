#include "finsler/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "finsler/berwald.hpp"
#include "finsler/core.hpp"
#include "finsler/harmonic.hpp"
#include "finsler/identities.hpp"
#include "finsler/spray.hpp"

namespace finsler {

std::string ScenarioError::located() const {
  if (line_ <= 0) return what();
  return fmt::format("{}:{}: {}", line_, column_, what());
}

const char* to_string(Task::Kind kind) {
  switch (kind) {
    case Task::Kind::verify_core: return "verify-core";
    case Task::Kind::structure_conditions: return "structure-conditions";
    case Task::Kind::harmonic_chart: return "harmonic-chart";
    case Task::Kind::rescaling: return "rescaling";
    case Task::Kind::curvature: return "curvature";
    case Task::Kind::berwald: return "berwald";
    case Task::Kind::szabo: return "szabo";
    case Task::Kind::ricci_identity: return "ricci-identity";
  }
  return "?";
}

namespace {

// ---------------------------------------------------------------------------
// Parsing

// Position of the innermost tagged node, for errors on implicit bodies.
thread_local YAML::Mark anchor = YAML::Mark::null_mark();

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
  const YAML::Mark m = n.Mark().is_null() ? anchor : n.Mark();
  throw ScenarioError(msg, m.line + 1, m.column + 1);
}

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) fail(n, "expected a mapping");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(kv.first, "unknown key '" + key + "'");
  }
}

YAML::Node require(const YAML::Node& parent, const char* key) {
  const YAML::Node n = parent[key];
  if (!n) fail(parent, std::string("missing key '") + key + "'");
  return n;
}

std::string text(const YAML::Node& n) {
  if (!n.IsScalar()) fail(n, "expected a scalar");
  return n.Scalar();
}

double number(const YAML::Node& n) {
  const std::string s = text(n);
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t a = 0, b = 0;
      const double num = std::stod(s.substr(0, slash), &a);
      const double den = std::stod(s.substr(slash + 1), &b);
      if (a != slash || b != s.size() - slash - 1 || den == 0.0) throw std::invalid_argument(s);
      return num / den;
    }
    return n.as<double>();
  } catch (const std::exception&) {
    fail(n, "expected a number, got '" + s + "'");
  }
}

double number_or(const YAML::Node& parent, const char* key, double fallback) {
  const YAML::Node n = parent[key];
  return n ? number(n) : fallback;
}

long integer(const YAML::Node& n) {
  try {
    return n.as<long>();
  } catch (const YAML::Exception&) {
    fail(n, "expected an integer, got '" + text(n) + "'");
  }
}

int positive_or(const YAML::Node& parent, const char* key, int fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  const long v = integer(n);
  if (v < 1 || v > 100000000) fail(n, std::string(key) + " must be a positive integer");
  return static_cast<int>(v);
}

double positive(const YAML::Node& n, const char* what) {
  const double v = number(n);
  if (!(v > 0.0) || !std::isfinite(v)) fail(n, std::string(what) + " must be positive");
  return v;
}

Vector vector_of(const YAML::Node& n, int m) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != m) fail(n, fmt::format("expected a list of {} numbers", m));
  Vector v(m);
  for (int i = 0; i < m; ++i) v[i] = number(n[i]);
  return v;
}

Matrix matrix_of(const YAML::Node& n, int m) {
  if (!n.IsSequence() || static_cast<int>(n.size()) != m) fail(n, fmt::format("expected a {0}x{0} matrix", m));
  Matrix a(m, m);
  for (int i = 0; i < m; ++i) a.row(i) = vector_of(n[i], m).transpose();
  return a;
}

// One-key mappings {name: body}, or a bare scalar name.
std::pair<std::string, YAML::Node> tagged(const YAML::Node& n) {
  anchor = n.Mark();
  if (n.IsScalar()) return {n.Scalar(), YAML::Node(YAML::NodeType::Map)};
  if (!n.IsMap() || n.size() != 1) fail(n, "expected a single-key mapping");
  const auto it = n.begin();
  return {it->first.as<std::string>(), it->second};
}

MatrixField matrix_field(const YAML::Node& n, int m) {
  if (n.IsSequence()) return MatrixField::constant(matrix_of(n, m));
  const auto [name, body] = tagged(n);
  if (name == "identity") return MatrixField::constant(Matrix::Identity(m, m));
  if (name == "constant") return MatrixField::constant(matrix_of(body, m));
  if (name == "affine") {
    check_keys(body, {"base", "slopes"});
    const YAML::Node slopes = require(body, "slopes");
    if (!slopes.IsSequence() || static_cast<int>(slopes.size()) != m)
      fail(slopes, fmt::format("expected {} slope matrices, one per coordinate", m));
    std::vector<Matrix> s;
    for (int k = 0; k < m; ++k) s.push_back(matrix_of(slopes[k], m));
    return MatrixField::affine(matrix_of(require(body, "base"), m), s);
  }
  if (name == "warped") {
    check_keys(body, {"rate"});
    return MatrixField::warped(number(require(body, "rate")));
  }
  if (name == "sphere") {
    check_keys(body, {"curvature"});
    return MatrixField::sphere(number_or(body, "curvature", 1.0));
  }
  fail(n, "unknown matrix field '" + name + "'");
}

CovectorField covector_field(const YAML::Node& n, int m) {
  if (n.IsSequence()) return CovectorField::constant(vector_of(n, m));
  const auto [name, body] = tagged(n);
  if (name == "constant") return CovectorField::constant(vector_of(body, m));
  if (name == "affine") {
    check_keys(body, {"base", "slope"});
    return CovectorField::affine(vector_of(require(body, "base"), m), matrix_of(require(body, "slope"), m));
  }
  fail(n, "unknown covector field '" + name + "'");
}

int axis(const YAML::Node& n, int m) {
  const long a = integer(n);
  if (a < 1 || a > m) fail(n, fmt::format("coordinate index must be in 1..{}", m));
  return static_cast<int>(a - 1);
}

DiffeoSpec diffeo(const YAML::Node& n, int m) {
  const auto [name, body] = tagged(n);
  if (name == "identity") return DiffeoSpec::identity();
  if (name == "affine") {
    check_keys(body, {"linear", "offset", "inverse"});
    const Matrix a = matrix_of(require(body, "linear"), m);
    const Vector c = body["offset"] ? vector_of(body["offset"], m) : Vector::Zero(m);
    if (body["inverse"]) return DiffeoSpec(DiffeoSpec::Affine{a, c, matrix_of(body["inverse"], m)});
    if (std::abs(a.determinant()) < 1e-14) fail(body, "affine map is singular");
    return DiffeoSpec::affine(a, c);
  }
  if (name == "quadratic-shear" || name == "sine-shear") {
    check_keys(body, {"target", "source", "c", "inverse_c"});
    const int t = axis(require(body, "target"), m), s = axis(require(body, "source"), m);
    if (t == s) fail(body, "shear target and source must differ");
    const double c = number(require(body, "c"));
    const double ic = number_or(body, "inverse_c", c);
    if (name == "quadratic-shear") return DiffeoSpec(DiffeoSpec::QuadraticShear{t, s, c, ic});
    return DiffeoSpec(DiffeoSpec::SineShear{t, s, c, ic});
  }
  fail(n, "unknown diffeomorphism '" + name + "'");
}

MetricSpec metric(const YAML::Node& n, int m) {
  if (!n.IsMap()) fail(n, "expected a metric mapping");
  const std::string kind = text(require(n, "kind"));
  if (kind == "euclidean") {
    check_keys(n, {"kind"});
    return MetricSpec::euclidean(m);
  }
  if (kind == "riemannian") {
    check_keys(n, {"kind", "A"});
    return MetricSpec::unchecked(m, MetricSpec::Riemannian{matrix_field(require(n, "A"), m)});
  }
  if (kind == "randers") {
    check_keys(n, {"kind", "A", "b"});
    return MetricSpec::unchecked(
        m, MetricSpec::Randers{matrix_field(require(n, "A"), m), covector_field(require(n, "b"), m)});
  }
  if (kind == "locally-minkowski") {
    check_keys(n, {"kind", "A", "b"});
    const Matrix a = n["A"] ? matrix_of(n["A"], m) : Matrix::Identity(m, m);
    const Vector b = n["b"] ? vector_of(n["b"], m) : Vector::Zero(m);
    return MetricSpec::unchecked(m, MetricSpec::LocallyMinkowski{a, b});
  }
  if (kind == "pullback") {
    check_keys(n, {"kind", "inner", "diffeo"});
    auto inner = std::make_shared<const MetricSpec>(metric(require(n, "inner"), m));
    return MetricSpec::unchecked(m, MetricSpec::Pullback{inner, diffeo(require(n, "diffeo"), m)});
  }
  fail(n["kind"], "unknown metric kind '" + kind + "'");
}

Box domain(const YAML::Node& n, int m) {
  if (!n) return Box::cube(m, 0.5);
  check_keys(n, {"half_width", "lo", "hi"});
  if (n["half_width"]) {
    if (n["lo"] || n["hi"]) fail(n, "give either half_width or lo/hi");
    return Box::cube(m, positive(n["half_width"], "half_width"));
  }
  Box b{vector_of(require(n, "lo"), m), vector_of(require(n, "hi"), m)};
  for (int i = 0; i < m; ++i)
    if (!(b.lo[i] < b.hi[i])) fail(n, "domain must have lo < hi on every axis");
  return b;
}

Task task(const YAML::Node& n, int m) {
  const auto [name, body] = tagged(n);
  Task t{};
  const auto expect_only = [&](std::initializer_list<const char*> keys) { check_keys(body, keys); };
  if (name == "verify-core") {
    expect_only({"samples"});
    t.kind = Task::Kind::verify_core;
    t.samples = positive_or(body, "samples", 100);
  } else if (name == "structure-conditions") {
    expect_only({"samples"});
    t.kind = Task::Kind::structure_conditions;
    t.samples = positive_or(body, "samples", 10000);
  } else if (name == "harmonic-chart" || name == "rescaling") {
    if (m != 2) fail(n, name + " requires dimension 2");
    t.h = body["h"] ? positive(body["h"], "h") : 1.0 / 32;
    if (t.h > 0.5) fail(body["h"], "h must be at most 1/2");
    if (name == "harmonic-chart") {
      expect_only({"epsilon", "h"});
      t.kind = Task::Kind::harmonic_chart;
      t.epsilon = body["epsilon"] ? positive(body["epsilon"], "epsilon") : 1.0;
    } else {
      expect_only({"epsilons", "h"});
      t.kind = Task::Kind::rescaling;
      const YAML::Node eps = require(body, "epsilons");
      if (!eps.IsSequence() || eps.size() < 2) fail(eps, "epsilons must list at least two values");
      for (const auto& e : eps) {
        t.epsilons.push_back(positive(e, "epsilon"));
        if (t.epsilons.size() > 1 && !(t.epsilons.back() < t.epsilons[t.epsilons.size() - 2]))
          fail(e, "epsilons must be strictly decreasing");
      }
    }
  } else if (name == "curvature") {
    expect_only({"samples", "expect", "flat", "tol"});
    t.kind = Task::Kind::curvature;
    t.samples = positive_or(body, "samples", 50);
    if (body["expect"]) t.expect = number(body["expect"]);
    if (body["flat"]) t.flat = body["flat"].as<bool>();
    if (t.flat && t.expect) fail(body, "give either expect or flat");
    t.tol = body["tol"] ? positive(body["tol"], "tol") : (t.flat ? 1e-7 : 1e-6);
  } else if (name == "berwald") {
    expect_only({"points", "tol", "expect"});
    t.kind = Task::Kind::berwald;
    t.samples = positive_or(body, "points", 20);
    t.tol = body["tol"] ? positive(body["tol"], "tol") : 1e-7;
    if (body["expect"]) t.expect_berwald = body["expect"].as<bool>();
  } else if (name == "szabo" || name == "ricci-identity") {
    expect_only({"nodes", "points", "tol"});
    const bool szabo = name == "szabo";
    t.kind = szabo ? Task::Kind::szabo : Task::Kind::ricci_identity;
    t.nodes = positive_or(body, "nodes", 64);
    if (t.nodes < 16) fail(body["nodes"], "nodes must be at least 16");
    t.samples = positive_or(body, "points", szabo ? 10 : 5);
    t.tol = body["tol"] ? positive(body["tol"], "tol") : (szabo ? 1e-5 : 1e-6);
  } else {
    fail(n, "unknown task '" + name + "'");
  }
  return t;
}

Scenario parse(const YAML::Node& root) {
  if (!root.IsMap()) fail(root, "scenario must be a mapping");
  check_keys(root, {"dimension", "metric", "volume", "domain", "tasks", "output", "seed"});
  Scenario s;
  if (root["dimension"]) {
    const long m = integer(root["dimension"]);
    if (m != 2 && m != 3) fail(root["dimension"], "dimension must be 2 or 3");
    s.dimension = static_cast<int>(m);
  }
  const int m = s.dimension;
  s.metric = metric(require(root, "metric"), m);
  s.domain = domain(root["domain"], m);
  if (root["volume"]) {
    s.volume_name = text(root["volume"]);
    try {
      if (s.volume_name == "lebesgue")
        s.volume = VolumeForm::lebesgue();
      else if (s.volume_name == "sqrt-det-riemannian")
        s.volume = VolumeForm::riemannian(s.metric);
      else if (s.volume_name == "sqrt-det-averaged")
        s.volume = VolumeForm::averaged(s.metric);
      else
        fail(root["volume"], "unknown volume '" + s.volume_name + "'");
    } catch (const Error& e) {
      fail(root["volume"], e.what());
    }
  }
  if (root["seed"]) {
    const long seed = integer(root["seed"]);
    if (seed < 0) fail(root["seed"], "seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (root["output"]) s.output = text(root["output"]);
  const YAML::Node tasks = require(root, "tasks");
  if (!tasks.IsSequence() || tasks.size() == 0) fail(tasks, "tasks must be a nonempty list");
  for (const auto& t : tasks) s.tasks.push_back(task(t, m));
  return s;
}

// ---------------------------------------------------------------------------
// Reports

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string vec(const Vector& v) {
  std::string s = "[";
  for (int i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

struct Table {
  std::string suffix;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string status = "pass";
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<Table> tables;
  bool no_convergence = false;

  void add(const std::string& key, const std::string& value) { fields.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, num(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, const Vector& value) { add(key, vec(value)); }
  void check(bool ok) {
    if (!ok && status == "pass") status = "fail";
  }
};

void write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < t.header.size(); ++i) out << (i ? "," : "") << t.header[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Tasks

struct Context {
  const Scenario& s;
  std::uint64_t seed;
};

void verify_core(const Context& c, const Task& t, Report& r) {
  const auto v = verify_core_identities(c.s.metric, c.s.domain, t.samples, c.seed);
  r.add("samples", v.samples);
  for (const auto& check : v.checks) {
    r.add(check.name, check.value);
    r.add(check.name + "_tol", check.tol);
    if (!check.passed) {
      r.add(check.name + "_witness_x", check.witness_x);
      r.add(check.name + "_witness_v", check.witness_v);
    }
  }
  r.check(v.passed);
}

void structure_conditions(const Context& c, const Task& t, Report& r) {
  const auto v = verify_structure_conditions(c.s.metric, c.s.volume, c.s.domain, t.samples, c.seed);
  r.add("pairs", v.pairs);
  r.add("antipodal_pairs", v.antipodal_pairs);
  r.add("zero_pairs", v.zero_pairs);
  r.add("max_growth_ratio", v.max_growth_ratio);
  r.add("min_ellipticity", v.min_ellipticity);
  r.add("min_monotonicity", v.min_monotonicity);
  r.add("c_growth", v.c_growth);
  r.add("c_ellipticity", v.c_ellipticity);
  r.add("c_monotonicity", v.c_monotonicity);
  r.add("c", v.c);
  r.add("violations", static_cast<int>(v.violations.size()));
  if (!v.violations.empty()) {
    const auto& w = v.violations.front();
    r.add("witness_condition", w.condition);
    r.add("witness_x", w.x);
    r.add("witness_omega1", w.omega1);
    r.add("witness_omega2", w.omega2);
    r.add("witness_value", w.value);
  }
  r.check(v.violations.empty());
}

void grid_table(Report& r, const std::string& suffix, const Grid& g, const std::function<double(int)>& value,
                bool interior_only) {
  Table t{suffix, {"x", "y", "value"}, {}};
  for (int k = 0; k < g.node_count(); ++k) {
    if (interior_only && g.unknown(k) < 0) continue;
    t.rows.push_back({g.points()[k][0], g.points()[k][1], value(k)});
  }
  r.tables.push_back(std::move(t));
}

void harmonic_chart(const Context& c, const Task& t, Report& r) {
  const Grid grid = Grid::ball(1.0, t.h);
  const SolverOptions options;
  const HarmonicChart chart = build_chart(c.s.metric, c.s.volume, grid, t.epsilon, options);
  const DirichletProblem problem(c.s.metric, c.s.volume, grid, t.epsilon);
  double weak = 0.0;
  for (const auto& f : chart.fields) weak = std::max(weak, weak_residual(problem, f.u, 20, c.seed).max_ratio);
  r.add("epsilon", t.epsilon);
  r.add("h", t.h);
  r.add("nodes", grid.node_count());
  r.add("deviation_center", chart.deviation_center);
  r.add("deviation_l2", chart.deviation_l2);
  r.add("identity_error", chart.identity_error);
  r.add("det_center", chart.det[grid.center()]);
  r.add("certified_radius", chart.certified_radius);
  r.add("delta_det", chart.delta_det);
  for (int f = 0; f < 2; ++f) {
    r.add(fmt::format("gradient_norm_u{}", f + 1), chart.residual[f]);
    r.add(fmt::format("newton_iterations_u{}", f + 1), chart.fields[f].newton_iterations);
  }
  r.add("weak_residual", weak);
  r.add("weak_residual_tol", 1e-6);
  const bool ok = chart.certified_radius > 0.0 && weak <= 1e-6;
  if (!ok) {
    r.add("witness_x", grid.points()[grid.center()]);
    r.add("witness_test_seed", static_cast<int>(c.seed));
  }
  r.check(ok);
  grid_table(r, "u1", grid, [&](int k) { return chart.fields[0].u[k]; }, false);
  grid_table(r, "u2", grid, [&](int k) { return chart.fields[1].u[k]; }, false);
  grid_table(r, "det", grid, [&](int k) { return chart.det[k]; }, true);
}

void rescaling(const Context& c, const Task& t, Report& r) {
  const auto table = rescaling_experiment(c.s.metric, c.s.volume, t.epsilons, t.h);
  constexpr double noise = 1e-9;
  bool monotone = true;
  Table csv{"table", {"epsilon", "deviation", "deviation_l2", "newton_iterations"}, {}};
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    csv.rows.push_back({row.epsilon, row.deviation, row.deviation_l2, static_cast<double>(row.newton_iterations)});
    if (k > 0 && row.deviation > table.rows[k - 1].deviation + noise && monotone) {
      monotone = false;
      r.add("witness_epsilon", row.epsilon);
      r.add("witness_previous_epsilon", table.rows[k - 1].epsilon);
    }
  }
  r.add("h", t.h);
  r.add("rows", static_cast<int>(table.rows.size()));
  r.add("slope", table.slope);
  r.add("slope_l2", table.slope_l2);
  r.add("strictly_decreasing", table.strictly_decreasing);
  r.add("monotone", monotone);
  r.add("noise", noise);
  r.tables.push_back(std::move(csv));
  r.check(monotone);
}

void curvature(const Context& c, const Task& t, Report& r) {
  const int m = c.s.dimension;
  Table csv{"table", {}, {}};
  for (int i = 0; i < m; ++i) csv.header.push_back(fmt::format("x{}", i + 1));
  for (int i = 0; i < m; ++i) csv.header.push_back(fmt::format("y{}", i + 1));
  for (const char* h : {"ricci_scalar", "F2", "ratio", "max_abs_Rk"}) csv.header.emplace_back(h);
  Rng rng(c.seed);
  double max_rk = 0.0, lo = INFINITY, hi = -INFINITY, worst = -1.0;
  Vector wx, wy;
  for (int k = 0; k < t.samples; ++k) {
    const Vector x = rng.point_in(c.s.domain);
    const Vector y = rng.direction(m);
    const auto cd = riemann_curvature(c.s.metric, x, y);
    const double f = eval_F(c.s.metric, x, y);
    const double ratio = cd.ricci_scalar / (f * f);
    const double rk = cd.Rk.cwiseAbs().maxCoeff() / (f * f);
    max_rk = std::max(max_rk, rk);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    const double err = t.flat ? rk : t.expect ? std::abs(ratio - *t.expect) : 0.0;
    if (err > worst) {
      worst = err;
      wx = x;
      wy = y;
    }
    std::vector<double> row(x.data(), x.data() + m);
    row.insert(row.end(), y.data(), y.data() + m);
    row.insert(row.end(), {cd.ricci_scalar, f * f, ratio, rk});
    csv.rows.push_back(std::move(row));
  }
  r.add("samples", t.samples);
  r.add("max_abs_Rk_over_F2", max_rk);
  r.add("min_ratio", lo);
  r.add("max_ratio", hi);
  if (t.flat || t.expect) {
    if (t.expect) r.add("expect", *t.expect);
    if (t.flat) r.add("flat", true);
    r.add("max_error", worst);
    r.add("tol", t.tol);
    if (!(worst <= t.tol)) {
      r.add("witness_x", wx);
      r.add("witness_y", wy);
    }
    r.check(worst <= t.tol);
  }
  r.tables.push_back(std::move(csv));
}

void berwald(const Context& c, const Task& t, Report& r) {
  const auto b = is_berwald(c.s.metric, c.s.domain, t.tol, t.samples, c.seed);
  r.add("berwald", b.berwald);
  r.add("max_nonlinearity", b.max_nonlinearity);
  r.add("tol", t.tol);
  r.add("points", b.points);
  const bool expected = t.expect_berwald.value_or(true);
  r.add("expect", expected);
  if (!b.berwald) {
    r.add("witness_x", b.witness_x);
    r.add("witness_y", b.witness_y);
  }
  r.check(b.berwald == expected);
}

void szabo(const Context& c, const Task& t, Report& r) {
  const auto s = szabo_check(c.s.metric, t.nodes, c.s.domain, t.tol, t.samples, c.seed);
  r.add("nodes", t.nodes);
  r.add("points", s.points);
  r.add("max_deviation", s.max_deviation);
  r.add("tol", s.tol);
  r.add("witness_x", s.witness);
  r.check(s.passed);
}

void ricci_identity(const Context& c, const Task& t, Report& r) {
  const auto s = ricci_identity_check(c.s.metric, t.nodes, c.s.domain, t.tol, t.samples, c.seed);
  r.add("nodes", t.nodes);
  r.add("points", s.points);
  r.add("y_variation", s.y_variation);
  r.add("hessian_vs_chern", s.hessian_vs_chern);
  r.add("chern_vs_h", s.chern_vs_h);
  r.add("szabo_passed", s.szabo_passed);
  r.add("max_deviation", s.max_deviation);
  r.add("tol", s.tol);
  r.add("witness_x", s.witness);
  r.check(s.passed);
}

bool degenerate(ErrorCode code) {
  switch (code) {
    case ErrorCode::degenerate_direction:
    case ErrorCode::conditioning:
    case ErrorCode::pullback_degenerate:
    case ErrorCode::not_berwald:
    case ErrorCode::chart_degenerate:
      return true;
    default:
      return false;
  }
}

Report run_task(const Context& c, const Task& t) {
  Report r;
  try {
    switch (t.kind) {
      case Task::Kind::verify_core: verify_core(c, t, r); break;
      case Task::Kind::structure_conditions: structure_conditions(c, t, r); break;
      case Task::Kind::harmonic_chart: harmonic_chart(c, t, r); break;
      case Task::Kind::rescaling: rescaling(c, t, r); break;
      case Task::Kind::curvature: curvature(c, t, r); break;
      case Task::Kind::berwald: berwald(c, t, r); break;
      case Task::Kind::szabo: szabo(c, t, r); break;
      case Task::Kind::ricci_identity: ricci_identity(c, t, r); break;
    }
  } catch (const Error& e) {
    r.status = degenerate(e.code()) ? "degenerate" : "fail";
    r.no_convergence = e.code() == ErrorCode::no_convergence;
    r.add("error_code", std::string(to_string(e.code())));
    r.add("error", std::string(e.what()));
    if (r.no_convergence) r.add("error_residual", e.residual());
    r.tables.clear();
  }
  return r;
}

std::filesystem::path output_dir(const Scenario& s, const RunOptions& options) {
  if (options.out) return *options.out;
  if (!s.output.empty()) return s.output;
  if (const char* env = std::getenv(kOutputDirVariable); env != nullptr && *env != '\0') return env;
  return "finsler-out";
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  try {
    return parse(root);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open " + path, 0, 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::string> validate_scenario(const std::string& path) {
  Scenario s;
  try {
    s = load_scenario(path);
  } catch (const ScenarioError& e) {
    return {e.located()};
  }
  return s.metric.audit(SampleGrid{s.domain, 9});
}

int run_scenario(const std::string& path, const RunOptions& options, std::ostream& log) {
  Scenario s;
  try {
    s = load_scenario(path);
  } catch (const ScenarioError& e) {
    log << path << ":" << e.located() << '\n';
    return exit_parse_error;
  }
  const auto diagnostics = s.metric.audit(SampleGrid{s.domain, 9});
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) log << path << ": invalid metric: " << d << '\n';
    return exit_parse_error;
  }
  if (options.jobs > 0) set_thread_count(options.jobs);
  const Context c{s, options.seed.value_or(s.seed)};
  const auto dir = output_dir(s, options);
  std::filesystem::create_directories(dir);

  bool failed = false, no_convergence = false;
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    const Task& t = s.tasks[i];
    const Report r = run_task(c, t);
    const std::string stem = fmt::format("{:02d}-{}", i + 1, to_string(t.kind));
    std::ofstream out(dir / (stem + ".report"));
    out << "task: " << to_string(t.kind) << '\n';
    out << "status: " << r.status << '\n';
    out << "metric: " << s.metric.name() << '\n';
    out << "volume: " << s.volume_name << '\n';
    out << "seed: " << c.seed << '\n';
    for (const auto& [k, v] : r.fields) out << k << ": " << v << '\n';
    out.close();
    if (!out) throw std::runtime_error("cannot write report in " + dir.string());
    for (const auto& table : r.tables) write_table(dir / (stem + "-" + table.suffix + ".csv"), table);
    log << stem << ": " << r.status << '\n';
    failed = failed || r.status != "pass";
    no_convergence = no_convergence || r.no_convergence;
  }
  if (no_convergence) return exit_no_convergence;
  return failed ? exit_task_failed : exit_ok;
}

}  // namespace finsler
