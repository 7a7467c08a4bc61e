#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "finsler/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finsler metric computations driven by scenario files"};
  app.require_subcommand(1);

  std::string run_file, out;
  std::uint64_t seed = 0;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "Run every task of a scenario and write reports");
  run->add_option("file", run_file, "Scenario file")->required();
  auto* out_opt = run->add_option("--out", out, "Output directory (default: scenario output, then $" +
                                                    std::string(finsler::kOutputDirVariable) + ", then finsler-out)");
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--jobs", jobs, "Number of OpenMP threads")->check(CLI::PositiveNumber);

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
  validate->add_option("file", validate_file, "Scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      finsler::RunOptions options;
      if (*out_opt) options.out = out;
      if (*seed_opt) options.seed = seed;
      options.jobs = jobs;
      return finsler::run_scenario(run_file, options, std::cout);
    }
    const auto diagnostics = finsler::validate_scenario(validate_file);
    for (const auto& d : diagnostics) std::cout << validate_file << ": " << d << '\n';
    if (diagnostics.empty()) std::cout << validate_file << ": ok\n";
    return diagnostics.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
