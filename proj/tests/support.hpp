#pragma once

// Independent reference implementations and randomized property suites
// shared by the unit tests and the acceptance runner.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "oversmooth/experiments.hpp"
#include "oversmooth/parameter_choice.hpp"

namespace oversmooth::testing {

/// Cumulative trapezoid matrix acting on all n+1 nodal values.
Eigen::MatrixXd dense_integration(const Grid& grid);

/// Minimizer of ||Jx - y||^2 + alpha (||x||^2 + ||x'||^2) with x(1) = 0 and
/// x_bar = 0, from the normal equations.
GridFunction dense_linear_tikhonov(const GridFunction& y, double alpha);

/// Candidates as points of R^d; distances are Euclidean.
struct PointPath {
  std::vector<double> alphas;
  std::vector<Eigen::VectorXd> points;

  double distance(std::size_t i, std::size_t j) const { return (points[i] - points[j]).norm(); }
  PathView view() const;
};

double brute_threshold(double alpha, double delta, const BalancingConfig& c,
                       const NoiseAmplification& na);
std::vector<std::size_t> brute_first_set(const PointPath& p, double delta,
                                         const BalancingConfig& c, const NoiseAmplification& na);
std::vector<std::size_t> brute_standard_set(const PointPath& p, double delta,
                                            const BalancingConfig& c, const NoiseAmplification& na);
std::vector<std::size_t> brute_third_set(const PointPath& p, double delta,
                                         const BalancingConfig& c, const NoiseAmplification& na);

struct Tally {
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what);
  bool passed() const { return trials > 0 && failures == 0; }
};

/// Each balancing variant against its exhaustively computed set.
Tally balancing_brute_force(std::size_t paths, std::uint64_t seed);
/// M ⊆ H~ ⊆ H and H~ ⊆ H̄ on paths obeying the error bound.
Tally set_inclusions(std::size_t paths, std::uint64_t seed);
/// Every variant on the spectral surrogate against c2 inf(phi + delta/lambda).
Tally surrogate_quasi_optimality(const std::vector<double>& deltas, std::uint64_t seed);
/// Taylor-remainder inequality and the two-sided chain for exp growth.
Tally tangential_cone(std::size_t samples, std::uint64_t seed);
/// Image gap and norm growth of the explosion sequence.
Tally explosion(const std::vector<std::size_t>& ns, double delta);
/// Directional derivatives of the functional against central differences.
Tally gradient_vs_differences(std::size_t points, std::uint64_t seed, double tolerance);

GridFunction random_function(const Grid& grid, std::mt19937_64& rng, double amplitude);

}  // namespace oversmooth::testing
