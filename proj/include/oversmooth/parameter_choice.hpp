#pragma once

// Regularization parameter choice on a geometric grid alpha_j = q^j alpha_0:
// the three balancing principles, the discrepancy principle, the heuristic
// minimizing consecutive differences, the error-minimizing oracle, a priori
// rules and the error-constant calculus for quasi-optimality.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "oversmooth/hilbert_scale.hpp"
#include "oversmooth/tikhonov_solver.hpp"

namespace oversmooth {

/// lambda(alpha) = alpha^b / kappa, the noise amplification is delta/lambda.
struct NoiseAmplification {
  double b = 0.25;
  double kappa = 1.0;

  /// b = a/(2a+2), kappa = max{1, 2/c_a}.
  static NoiseAmplification for_degree(double a, double c_a);
  double lambda(double alpha) const;
};

double lambda_fn(double alpha, const NoiseAmplification& na);

/// Smallest admissible balancing constant (exclusive): 1 + q^{-b}.
double beta_min(double q, double b);

class ParameterGrid {
 public:
  ParameterGrid(double alpha0, double q, std::size_t count);
  /// Geometric grid from `lo` with spacing q whose last point is >= hi.
  static ParameterGrid covering(double lo, double hi, double q);

  double alpha0() const noexcept { return alpha0_; }
  double q() const noexcept { return q_; }
  std::size_t count() const noexcept { return alphas_.size(); }
  double operator[](std::size_t j) const noexcept { return alphas_[j]; }
  double back() const noexcept { return alphas_.back(); }
  std::span<const double> alphas() const noexcept { return alphas_; }

  /// alpha_0 <= c_e delta^{1/b} and c_f <= alpha_N <= c_g.
  bool endpoints_ok(double delta, double b, double c_e, double c_f, double c_g) const;

 private:
  double alpha0_;
  double q_;
  std::vector<double> alphas_;
};

enum class BalancingVariant { first, standard, third };

std::string to_string(BalancingVariant v);
BalancingVariant balancing_variant_from_string(const std::string& s);

struct BalancingConfig {
  double beta = 3.0;
  double gamma = 1.0;
  BalancingVariant variant = BalancingVariant::first;
  /// When set, thresholds read c_bp delta / alpha^b and beta/kappa are unused.
  std::optional<double> c_bp;

  /// Checks beta > 1 + q^{-b} (unless c_bp is active) and 0 < gamma <= 1.
  void validate(double q, double b) const;
};

/// A family of candidates x_{alpha_0}, ..., x_{alpha_N} seen only through
/// pairwise distances. `distance` may compute lazily.
struct PathView {
  std::span<const double> alphas;
  std::function<double(std::size_t, std::size_t)> distance;
};

/// L2 distances between reconstructions, memoized per pair.
class ReconstructionPath {
 public:
  explicit ReconstructionPath(const std::vector<Reconstruction>& path);
  PathView view() const;
  std::span<const double> alphas() const noexcept { return alphas_; }
  std::span<const double> residuals() const noexcept { return residuals_; }
  double distance(std::size_t i, std::size_t j) const;
  /// ||x_{alpha_k} - x_dag|| for every k.
  std::vector<double> errors(const GridFunction& x_dag) const;

 private:
  const std::vector<Reconstruction>* path_;
  std::vector<double> alphas_;
  std::vector<double> residuals_;
  mutable std::vector<double> cache_;
};

struct Comparison {
  std::size_t i = 0;  // reference index (threshold evaluated at alpha_i)
  std::size_t j = 0;  // compared index
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
};

struct SelectionResult {
  std::string rule;
  std::size_t index = 0;
  double alpha_star = 0.0;
  std::vector<double> alphas;
  std::vector<Comparison> trace;
  bool terminated_at_N = false;
};

nlohmann::json to_json(const SelectionResult& s);

using IndexFunction = std::function<double(double)>;

/// Indices of M_delta = {alpha_j : phi(alpha_j) <= gamma delta / lambda(alpha_j)}.
std::vector<std::size_t> oracle_set(const IndexFunction& phi, double delta,
                                    std::span<const double> alphas, double gamma,
                                    const NoiseAmplification& na);

/// max H_delta: consecutive differences against the threshold at the smaller alpha.
SelectionResult balancing_first(const PathView& path, double delta, const BalancingConfig& config,
                                const NoiseAmplification& na);
/// max of the standard set: x_k compared with every x_j, j < k; searched from the top.
SelectionResult balancing_standard(const PathView& path, double delta,
                                   const BalancingConfig& config, const NoiseAmplification& na);
/// max of the all-pairs lower set; searched from alpha_0 upwards.
SelectionResult balancing_third(const PathView& path, double delta, const BalancingConfig& config,
                                const NoiseAmplification& na);
/// Dispatches on config.variant.
SelectionResult balancing(const PathView& path, double delta, const BalancingConfig& config,
                          const NoiseAmplification& na);

/// Grid element with the largest residual not exceeding c_dp delta.
SelectionResult discrepancy_principle(std::span<const double> alphas,
                                      std::span<const double> residuals, double delta,
                                      double c_dp);

/// argmin_k ||x_{alpha_{k+1}} - x_{alpha_k}||, ties towards larger alpha.
SelectionResult quasi_optimality_heuristic(const PathView& path);

/// argmin_k errors[k], ties towards larger alpha.
SelectionResult oracle_alpha(std::span<const double> alphas, std::span<const double> errors);

/// Hoelder: delta^{(2a+2)/(a+p)}; logarithmic: delta.
double a_priori_alpha(double delta, double a, const SourceCondition& source);

struct ErrorConstant {
  double tau_opt = 0.0;  // (gamma+1)(1+q^{-b})
  double c_h = 0.0;
  double c2 = 0.0;       // q^b (gamma + c_h)/gamma
};

ErrorConstant error_constant(BalancingVariant variant, double q, double b, double gamma);

/// inf over [lo, hi] of phi(alpha) + delta/lambda(alpha): 200 log-spaced
/// samples per decade, then golden-section refinement to 1e-3 relative.
struct Infimum {
  double value = 0.0;
  double argmin = 0.0;
};
Infimum error_bound_infimum(const IndexFunction& phi, double delta, const NoiseAmplification& na,
                            double lo = 1e-40, double hi = 1e10);

struct QuasiOptimalityCheck {
  bool passed = false;
  double error = 0.0;
  double infimum = 0.0;
  double bound = 0.0;  // c2 * infimum
};

QuasiOptimalityCheck quasi_optimality_check(double selection_error, const IndexFunction& phi,
                                            double delta, const NoiseAmplification& na, double c2,
                                            double lo = 1e-40, double hi = 1e10);

}  // namespace oversmooth
