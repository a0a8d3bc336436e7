#pragma once

// Minimization of the Tikhonov functional
//   T(x) = ||F(x) - y_delta||^2 + alpha ||x - x_bar||_{H1}^2
// over grid functions with the boundary condition x(1) = 0. The last nodal
// value is eliminated, so gradients live on the n free values x_0..x_{n-1}.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oversmooth/forward_model.hpp"
#include "oversmooth/hilbert_scale.hpp"

namespace oversmooth {

enum class SolverMethod { gauss_newton, lbfgs };

struct LineSearch {
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_steps = 60;
};

struct SolverConfig {
  int max_iterations = 200;
  /// Bound on the sup-norm of the gradient w.r.t. the free nodal values.
  double gradient_tolerance = 1e-8;
  /// Gauss-Newton also requires ||step|| <= step_tolerance (1 + ||x||).
  double step_tolerance = 1e-9;
  std::optional<GridFunction> initial_guess;  // defaults to x_bar
  LineSearch line_search;
  SolverMethod method = SolverMethod::gauss_newton;
  int lbfgs_memory = 12;

  void validate() const;
};

struct Reconstruction {
  GridFunction x;
  double alpha = 0.0;
  double residual_norm = 0.0;     // ||F(x) - y_delta||
  double penalty_norm = 0.0;      // ||x - x_bar||_{H1}
  double functional_value = 0.0;  // residual^2 + alpha penalty^2
  double gradient_norm = 0.0;     // sup-norm over free values
  int iterations = 0;
  bool converged = false;
  std::string failure;                // empty unless the solve aborted
  std::vector<double> value_history;  // T at every accepted iterate
};

class TikhonovProblem {
 public:
  TikhonovProblem(std::shared_ptr<const ForwardOperator> op, GridFunction y_delta,
                  GridFunction x_bar);

  const Grid& grid() const noexcept { return y_delta_.grid(); }
  const GridFunction& data() const noexcept { return y_delta_; }
  const GridFunction& x_bar() const noexcept { return x_bar_; }
  const ForwardOperator& op() const noexcept { return *op_; }

  double value(const GridFunction& x, double alpha) const;
  /// Partial derivatives of value() w.r.t. x_0..x_{n-1}.
  std::vector<double> gradient(const GridFunction& x, double alpha) const;

  Reconstruction minimize(double alpha, const SolverConfig& config) const;

  /// One reconstruction per alpha (ascending input), solved from the largest
  /// alpha downwards, each warm-started from its predecessor.
  std::vector<Reconstruction> solve_path(std::span<const double> alphas,
                                         const SolverConfig& config) const;

 private:
  Reconstruction finish(GridFunction x, double alpha) const;
  Reconstruction run_gauss_newton(GridFunction x, double alpha, const SolverConfig& c) const;
  Reconstruction run_lbfgs(GridFunction x, double alpha, const SolverConfig& c) const;

  std::shared_ptr<const ForwardOperator> op_;
  GridFunction y_delta_;
  GridFunction x_bar_;
};

// Free-function forms over the exponential growth model.
double functional_value(const GridFunction& x, const GridFunction& y_delta, double alpha,
                        const GridFunction& x_bar);
std::vector<double> functional_gradient(const GridFunction& x, const GridFunction& y_delta,
                                        double alpha, const GridFunction& x_bar);
Reconstruction minimize(const GridFunction& y_delta, double alpha, const GridFunction& x_bar,
                        const SolverConfig& config);

}  // namespace oversmooth
