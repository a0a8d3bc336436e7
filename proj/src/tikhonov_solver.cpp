#include "oversmooth/tikhonov_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "oversmooth/errors.hpp"

namespace oversmooth {

namespace {

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// x + t * step on the free values; x(1) stays 0.
GridFunction shifted(const GridFunction& x, double t, std::span<const double> step) {
  GridFunction out = x;
  for (std::size_t i = 0; i < step.size(); ++i) out[i] += t * step[i];
  return out;
}

double value_or_inf(const TikhonovProblem& p, const GridFunction& x, double alpha) {
  try {
    const double v = p.value(x, alpha);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const OverflowError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  bool accepted = false;
};

LineSearchResult backtrack(const TikhonovProblem& p, const GridFunction& x, double alpha,
                           double current, std::span<const double> direction, double slope,
                           const LineSearch& ls, double initial_step = 1.0) {
  double t = initial_step;
  for (int k = 0; k < ls.max_steps; ++k, t *= ls.shrink) {
    const double trial = value_or_inf(p, shifted(x, t, direction), alpha);
    if (trial <= current + ls.sufficient_decrease * t * slope) return {t, trial, true};
  }
  return {};
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations < 1) throw Error("solver: max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw Error("solver: gradient_tolerance must be positive");
  if (!(step_tolerance > 0.0)) throw Error("solver: step_tolerance must be positive");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw Error("solver: line search shrink must lie in (0,1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw Error("solver: sufficient decrease must lie in (0,1)");
  }
  if (line_search.max_steps < 1) throw Error("solver: line search needs at least one step");
  if (lbfgs_memory < 1) throw Error("solver: lbfgs_memory must be >= 1");
}

TikhonovProblem::TikhonovProblem(std::shared_ptr<const ForwardOperator> op, GridFunction y_delta,
                                 GridFunction x_bar)
    : op_(std::move(op)), y_delta_(std::move(y_delta)), x_bar_(std::move(x_bar)) {
  if (!op_) throw Error("TikhonovProblem: null operator");
  require_same_grid(y_delta_.grid(), x_bar_.grid());
}

double TikhonovProblem::value(const GridFunction& x, double alpha) const {
  const auto residual = op_->apply(x) - y_delta_;
  const double penalty = h1_penalty_norm(x - x_bar_);
  return inner(residual, residual) + alpha * penalty * penalty;
}

std::vector<double> TikhonovProblem::gradient(const GridFunction& x, double alpha) const {
  const Grid& g = grid();
  const std::size_t n = g.intervals();
  const double h = g.spacing();
  const auto& w = g.weights();

  const auto fx = op_->apply(x);
  const auto m = op_->derivative_multiplier(x);
  std::vector<double> weighted(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = w[i] * (fx[i] - y_delta_[i]) * m[i];
  auto data_part = apply_J_transpose(g, weighted);

  const auto d = x - x_bar_;
  std::vector<double> grad(n);
  for (std::size_t p = 0; p < n; ++p) {
    double pen = w[p] * d[p];
    if (p >= 1) pen += (d[p] - d[p - 1]) / h;
    pen -= (d[p + 1] - d[p]) / h;
    grad[p] = 2.0 * data_part[p] + 2.0 * alpha * pen;
  }
  return grad;
}

Reconstruction TikhonovProblem::finish(GridFunction x, double alpha) const {
  Reconstruction r{.x = std::move(x)};
  r.alpha = alpha;
  r.residual_norm = l2_norm(op_->apply(r.x) - y_delta_);
  r.penalty_norm = h1_penalty_norm(r.x - x_bar_);
  r.functional_value = r.residual_norm * r.residual_norm + alpha * r.penalty_norm * r.penalty_norm;
  return r;
}

Reconstruction TikhonovProblem::minimize(double alpha, const SolverConfig& config) const {
  if (!(alpha > 0.0)) throw Error("minimize: alpha must be positive");
  config.validate();
  GridFunction x = config.initial_guess.value_or(x_bar_);
  require_same_grid(x.grid(), grid());
  x[x.size() - 1] = 0.0;
  if (config.method == SolverMethod::lbfgs) return run_lbfgs(std::move(x), alpha, config);
  return run_gauss_newton(std::move(x), alpha, config);
}

Reconstruction TikhonovProblem::run_gauss_newton(GridFunction x, double alpha,
                                                 const SolverConfig& c) const {
  const Grid& g = grid();
  const std::size_t n = g.intervals();
  const double h = g.spacing();
  const auto& w = g.weights();

  std::vector<double> history;
  double current = value(x, alpha);
  history.push_back(current);
  auto grad = gradient(x, alpha);
  int iter = 0;
  bool converged = false;

  Eigen::MatrixXd hessian(n, n);
  Eigen::VectorXd rhs(n);
  std::vector<double> column(g.size());

  while (!converged && iter < c.max_iterations) {
    // Gauss-Newton matrix J^T diag(w m^2) J + alpha P on the free values.
    const auto m = op_->derivative_multiplier(x);
    std::vector<double> scale(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) scale[i] = w[i] * m[i] * m[i];
    for (std::size_t q = 0; q < n; ++q) {
      // Column q of J: h/2 at row q (q >= 1), then h (or h/2 for q = 0) below.
      std::fill(column.begin(), column.end(), 0.0);
      if (q >= 1) column[q] = 0.5 * h * scale[q];
      const double tail = q == 0 ? 0.5 * h : h;
      for (std::size_t i = q + 1; i < g.size(); ++i) column[i] = tail * scale[i];
      const auto jt = apply_J_transpose(g, column);
      for (std::size_t p = 0; p < n; ++p) hessian(p, q) = jt[p];
    }
    for (std::size_t p = 0; p < n; ++p) {
      hessian(p, p) += alpha * (w[p] + (p >= 1 ? 2.0 : 1.0) / h);
      if (p + 1 < n) {
        hessian(p, p + 1) -= alpha / h;
        hessian(p + 1, p) -= alpha / h;
      }
      rhs(p) = -0.5 * grad[p];
    }

    Eigen::VectorXd step;
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(rhs);
    } else {
      step = hessian.ldlt().solve(rhs);
    }
    // A small gradient alone says little here since J^T damps the high
    // frequencies; the Gauss-Newton step measures the distance to the minimizer.
    double step_norm = 0.0, x_norm = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      step_norm += w[p] * step(p) * step(p);
      x_norm += w[p] * x[p] * x[p];
    }
    if (std::sqrt(step_norm) <= c.step_tolerance * (1.0 + std::sqrt(x_norm)) &&
        sup_abs(grad) <= c.gradient_tolerance) {
      GridFunction trial = shifted(x, 1.0, std::span<const double>(step.data(), n));
      const double v = value(trial, alpha);
      if (v <= current) {
        x = std::move(trial);
        current = v;
        history.push_back(current);
        grad = gradient(x, alpha);
        ++iter;
      }
      converged = sup_abs(grad) <= c.gradient_tolerance;
      if (converged) break;
    }
    std::span<const double> dir(step.data(), n);
    double slope = dot(grad, dir);
    std::vector<double> steepest;
    if (!(slope < 0.0) || !std::isfinite(slope)) {
      steepest.resize(n);
      for (std::size_t p = 0; p < n; ++p) steepest[p] = -grad[p];
      dir = steepest;
      slope = dot(grad, dir);
    }

    const auto ls = backtrack(*this, x, alpha, current, dir, slope, c.line_search);
    if (!ls.accepted) break;
    x = shifted(x, ls.step, dir);
    const double decrease = current - ls.value;
    current = ls.value;
    history.push_back(current);
    ++iter;
    grad = gradient(x, alpha);
    // Stagnation at rounding level counts as converged.
    if (decrease <= 1e-14 * std::abs(current) && sup_abs(grad) <= c.gradient_tolerance) {
      converged = true;
    }
  }

  auto r = finish(std::move(x), alpha);
  r.iterations = iter;
  r.gradient_norm = sup_abs(grad);
  r.converged = converged;
  r.value_history = std::move(history);
  return r;
}

Reconstruction TikhonovProblem::run_lbfgs(GridFunction x, double alpha,
                                          const SolverConfig& c) const {
  const std::size_t n = grid().intervals();
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;

  std::vector<double> history;
  double current = value(x, alpha);
  history.push_back(current);
  auto grad = gradient(x, alpha);
  int iter = 0;
  bool converged = sup_abs(grad) <= c.gradient_tolerance;
  std::vector<double> dir(n), coeff;

  while (!converged && iter < c.max_iterations) {
    // Two-loop recursion.
    for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
    coeff.assign(memory.size(), 0.0);
    for (std::size_t k = memory.size(); k-- > 0;) {
      coeff[k] = memory[k].rho * dot(memory[k].s, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= coeff[k] * memory[k].y[i];
    }
    double initial_step = 1.0;
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : dir) v *= gamma;
    } else {
      initial_step = 1.0 / std::max(1.0, sup_abs(grad));
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const double beta = memory[k].rho * dot(memory[k].y, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (coeff[k] - beta) * memory[k].s[i];
    }
    double slope = dot(grad, dir);
    if (!(slope < 0.0)) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i];
      slope = dot(grad, dir);
      initial_step = 1.0 / std::max(1.0, sup_abs(grad));
    }

    const auto ls = backtrack(*this, x, alpha, current, dir, slope, c.line_search, initial_step);
    if (!ls.accepted) break;
    GridFunction next = shifted(x, ls.step, dir);
    auto next_grad = gradient(next, alpha);

    Pair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = next[i] - x[i];
      pair.y[i] = next_grad[i] - grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-300) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (memory.size() > static_cast<std::size_t>(c.lbfgs_memory)) memory.pop_front();
    }

    x = std::move(next);
    grad = std::move(next_grad);
    current = ls.value;
    history.push_back(current);
    ++iter;
    converged = sup_abs(grad) <= c.gradient_tolerance;
  }

  auto r = finish(std::move(x), alpha);
  r.iterations = iter;
  r.gradient_norm = sup_abs(grad);
  r.converged = converged;
  r.value_history = std::move(history);
  return r;
}

std::vector<Reconstruction> TikhonovProblem::solve_path(std::span<const double> alphas,
                                                        const SolverConfig& config) const {
  if (alphas.empty()) throw Error("solve_path: empty parameter grid");
  for (std::size_t k = 1; k < alphas.size(); ++k) {
    if (!(alphas[k] > alphas[k - 1])) throw Error("solve_path: alphas must be increasing");
  }
  std::vector<Reconstruction> path(alphas.size(), Reconstruction{.x = GridFunction(grid())});
  SolverConfig warm = config;
  for (std::size_t k = alphas.size(); k-- > 0;) {
    try {
      path[k] = minimize(alphas[k], warm);
      warm.initial_guess = path[k].x;
    } catch (const Error& e) {
      GridFunction start = warm.initial_guess.value_or(x_bar_);
      start[start.size() - 1] = 0.0;
      Reconstruction failed{.x = std::move(start)};
      failed.alpha = alphas[k];
      failed.failure = e.what();
      failed.functional_value = std::numeric_limits<double>::infinity();
      failed.residual_norm = std::numeric_limits<double>::infinity();
      path[k] = std::move(failed);
    }
  }
  return path;
}

double functional_value(const GridFunction& x, const GridFunction& y_delta, double alpha,
                        const GridFunction& x_bar) {
  return TikhonovProblem(std::make_shared<ExpGrowthOperator>(), y_delta, x_bar).value(x, alpha);
}

std::vector<double> functional_gradient(const GridFunction& x, const GridFunction& y_delta,
                                        double alpha, const GridFunction& x_bar) {
  return TikhonovProblem(std::make_shared<ExpGrowthOperator>(), y_delta, x_bar)
      .gradient(x, alpha);
}

Reconstruction minimize(const GridFunction& y_delta, double alpha, const GridFunction& x_bar,
                        const SolverConfig& config) {
  return TikhonovProblem(std::make_shared<ExpGrowthOperator>(), y_delta, x_bar)
      .minimize(alpha, config);
}

}  // namespace oversmooth
