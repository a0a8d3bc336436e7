#pragma once

// Noise generation, power-law regressions and the scripted case studies for
// the exponential growth model with x_dag = 1 (oversmoothing) and
// x_dag = t - t^2 (penalty not oversmoothing).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oversmooth/parameter_choice.hpp"
#include "oversmooth/tikhonov_solver.hpp"

namespace oversmooth {

struct NoiseModel {
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// y + delta xi/||xi|| with xi i.i.d. standard normal per node.
GridFunction make_noisy_data(const GridFunction& y, const NoiseModel& model);

struct RateFit {
  double c = 0.0;
  double kappa = 0.0;
  double residual = 0.0;  // RMS of the log-log residuals
  std::vector<std::pair<double, double>> samples;
};

/// Least-squares line log(value) = log(c) + kappa log(delta).
RateFit fit_rate(std::vector<std::pair<double, double>> samples);

/// Discrete total variation sum |x_{i+1} - x_i|.
double total_variation(const GridFunction& x);

enum class ExactSolution { constant_one, parabola };

std::string to_string(ExactSolution s);
ExactSolution exact_solution_from_string(const std::string& s);
GridFunction exact_solution(const Grid& grid, ExactSolution which);

/// Knobs shared by every case study.
struct ExperimentConfig {
  std::string problem = "exp_growth";
  std::size_t n = 1000;
  double a = 1.0;
  ExactSolution solution = ExactSolution::constant_one;
  // With alpha0 set the grid is alpha0 q^j, j < count. Otherwise it starts at
  // c_e delta^{1/b} and ends at the first point >= alpha_max.
  std::optional<double> alpha0;
  std::size_t count = 0;
  double q = 1.1;
  double c_e = 1.0;
  double alpha_max = 1e-2;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  SolverConfig solver;

  ParameterGrid parameter_grid(double delta) const;
  NoiseAmplification noise_amplification() const { return {a / (2.0 * a + 2.0), 1.0}; }
};

/// Noisy data and the full reconstruction path for one (delta, seed).
struct PathRun {
  double delta = 0.0;
  std::uint64_t seed = 0;
  GridFunction x_dag;
  GridFunction y_delta;
  std::vector<Reconstruction> path;
};

PathRun compute_path(const ExperimentConfig& config, double delta, std::uint64_t seed);

/// Seed of the noise realization for the i-th noise level and r-th repetition.
std::uint64_t cell_seed(std::uint64_t base, std::size_t delta_index, std::size_t repetition);

/// Runs fn(0..count-1) on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

std::vector<double> default_delta_sweep();

struct Table1Cell {
  double c_bp = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double error = 0.0;
  bool ok = false;
  std::string failure;
};

struct Table1Row {
  double c_bp = 0.0;
  RateFit error_fit;
  RateFit alpha_fit;
};

struct Table1 {
  std::vector<Table1Row> rows;
  std::vector<Table1Cell> cells;
};

Table1 run_table1(const std::vector<double>& c_bp_list, const std::vector<double>& delta_list,
                  std::size_t seeds, const ExperimentConfig& config);

struct RuleSpec {
  enum class Kind { balancing, discrepancy, quasi_optimality, oracle };
  Kind kind = Kind::balancing;
  double constant = 0.0;  // C_BP or C_DP
  std::string label() const;
};

std::vector<RuleSpec> default_rule_set();

struct RuleMarker {
  std::string rule;
  bool ok = false;
  std::size_t index = 0;
  double alpha = 0.0;
  double error = 0.0;
  std::string failure;
};

struct RuleComparison {
  double delta = 0.0;
  std::vector<double> alphas;
  std::vector<double> consecutive_diff;  // ||x_{k+1} - x_k||, NaN at the last point
  std::vector<double> errors;
  std::vector<double> residuals;
  std::vector<RuleMarker> markers;
};

RuleComparison run_rule_comparison(double delta, const std::vector<RuleSpec>& rules,
                                   const ExperimentConfig& config);

struct ContrastEntry {
  ExactSolution solution = ExactSolution::constant_one;
  double alpha = 0.0;
  Reconstruction reconstruction;
  GridFunction x_dag;
  double error = 0.0;
  double total_variation = 0.0;
  double exact_total_variation = 0.0;
};

std::vector<double> default_contrast_alphas();

std::vector<ContrastEntry> run_oversmoothing_contrast(double delta, const std::vector<double>& alphas,
                                                      const ExperimentConfig& config);

/// Linear problem diagonal in the cosine basis: forward singular values
/// sigma_k^a, penalty ||B(x - x_bar)|| with x_bar = 0, and
/// x_dag_k = sigma_k^p w_k (Hoelder) or K log^{-mu}(1/sigma_k^{2a+2}) w_k.
/// For this model ||x_alpha^delta - x_dag|| <= ||w|| psi(alpha) + delta/alpha^b.
class SpectralSurrogate {
 public:
  SpectralSurrogate(const HilbertScale& scale, const SourceCondition& source,
                    std::vector<double> w);

  const std::vector<double>& x_dag() const noexcept { return x_dag_; }
  double w_norm() const noexcept { return w_norm_; }
  double psi(double alpha) const { return source_.psi(alpha, a_); }

  /// Exact data plus noise of norm exactly delta.
  std::vector<double> noisy_data(double delta, std::uint64_t seed) const;
  std::vector<double> reconstruct(std::span<const double> data, double alpha) const;
  double error(std::span<const double> coefficients) const;

 private:
  double a_;
  SourceCondition source_;
  std::vector<double> forward_sv_;
  std::vector<double> b_;
  std::vector<double> x_dag_;
  double w_norm_;
};

struct DecompositionSample {
  double delta = 0.0;
  double alpha = 0.0;
  double error = 0.0;
  double psi = 0.0;
  double noise_term = 0.0;  // delta / lambda(alpha)
  double bound = 0.0;       // c1 psi + noise_term with the fitted c1
};

struct DecompositionScan {
  double c1 = 0.0;                                    // smallest c1 over the whole mesh
  std::vector<std::pair<double, double>> c1_by_delta;  // per noise level
  std::vector<DecompositionSample> samples;
};

DecompositionScan error_decomposition_scan(const SourceCondition& source,
                                           const NoiseAmplification& na,
                                           const std::vector<double>& deltas,
                                           const ExperimentConfig& config);

// CSV writers ('.' decimal point, header row, full double precision).
void write_table1_csv(std::ostream& os, const Table1& table);
void write_table1_cells_csv(std::ostream& os, const Table1& table);
void write_rule_curves_csv(std::ostream& os, const RuleComparison& report);
void write_rule_markers_csv(std::ostream& os, const RuleComparison& report);
void write_reconstruction_csv(std::ostream& os, const GridFunction& x, const GridFunction* x_dag);
void write_contrast_summary_csv(std::ostream& os, const std::vector<ContrastEntry>& entries);
void write_decomposition_csv(std::ostream& os, const DecompositionScan& scan);

}  // namespace oversmooth
