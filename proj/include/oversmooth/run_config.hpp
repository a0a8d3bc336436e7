#pragma once

// JSON run configuration shared by the command-line subcommands.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oversmooth/experiments.hpp"

namespace oversmooth {

enum class RuleId {
  balancing_first,
  balancing_standard,
  balancing_third,
  discrepancy,
  quasi_optimality,
  oracle
};

std::string to_string(RuleId id);
RuleId rule_id_from_string(const std::string& s);

struct RuleSettings {
  std::optional<RuleId> id;
  std::optional<double> c_bp;
  double c_dp = 1.1;
  double beta = 3.0;
  double gamma = 1.0;

  bool operator==(const RuleSettings&) const = default;
};

struct NoiseSettings {
  std::vector<double> deltas = default_delta_sweep();
  std::uint64_t seed = 1;
  std::size_t repetitions = 1;

  bool operator==(const NoiseSettings&) const = default;
};

struct RunConfig {
  std::string problem = "exp_growth";
  std::size_t n = 1000;
  double a = 1.0;
  // Parameter grid, see ExperimentConfig.
  std::optional<double> alpha0;
  std::size_t count = 0;
  double q = 1.1;
  double c_e = 1.0;
  double alpha_max = 1e-2;
  /// Single regularization parameter for `solve`; the whole grid otherwise.
  std::optional<double> alpha;
  /// Exact solution used to synthesize data and to measure errors.
  std::optional<ExactSolution> x_dag;
  /// CSV with columns t,y replacing synthesized data.
  std::optional<std::string> data_file;
  RuleSettings rule;
  NoiseSettings noise;
  SolverMethod method = SolverMethod::gauss_newton;
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-9;
  int lbfgs_memory = 12;
  LineSearch line_search;
  std::string output_dir = "out";
  std::size_t jobs = 1;

  SolverConfig solver() const;
  ExperimentConfig experiment() const;
  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

nlohmann::json to_json(const RunConfig& c);
/// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace oversmooth
