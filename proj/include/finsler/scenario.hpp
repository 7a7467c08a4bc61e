#pragma once

// Batch scenarios: a YAML file naming a metric, a volume form and a list of
// tasks. Running a scenario writes one key-value report per task and CSV
// tables into an output directory.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "finsler/calculus.hpp"
#include "finsler/metric.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Malformed scenario file, with a 1-based source position.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }
  std::string located() const;

 private:
  int line_;
  int column_;
};

struct Task {
  enum class Kind {
    verify_core,
    structure_conditions,
    harmonic_chart,
    rescaling,
    curvature,
    berwald,
    szabo,
    ricci_identity,
  };
  Kind kind;
  int samples = 0;  // verify-core, structure-conditions, curvature; berwald points
  double epsilon = 1.0;
  double h = 1.0 / 32;
  std::vector<double> epsilons;
  int nodes = 64;  // indicatrix quadrature nodes
  double tol = 0.0;
  std::optional<double> expect;        // curvature: expected R / F^2
  bool flat = false;                   // curvature: expect R^i_k = 0
  std::optional<bool> expect_berwald;  // berwald: expected classification
};

const char* to_string(Task::Kind kind);

struct Scenario {
  int dimension = 2;
  MetricSpec metric;  // not audited
  std::string volume_name = "lebesgue";
  VolumeForm volume;
  Box domain;  // sampling box for the pointwise tasks
  std::vector<Task> tasks;
  std::string output;  // empty when not given
  std::uint64_t seed = 1;
};

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text);

/// Diagnostics for a scenario file: parse errors with their position, then
/// the metric audit on a 9-point-per-axis grid over the domain. Empty when sound.
std::vector<std::string> validate_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;  // 0 keeps the OpenMP default
};

/// Exit codes of run_scenario.
enum ExitCode : int { exit_ok = 0, exit_task_failed = 1, exit_parse_error = 2, exit_no_convergence = 3 };

/// Environment variable naming the output directory when neither --out nor
/// the scenario gives one.
inline constexpr const char* kOutputDirVariable = "FINSLER_OUTPUT_DIR";

/// Runs every task in order, writes reports and a summary line per task to `log`.
int run_scenario(const std::string& path, const RunOptions& options, std::ostream& log);

}  // namespace finsler
