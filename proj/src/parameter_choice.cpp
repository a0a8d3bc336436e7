#include "oversmooth/parameter_choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oversmooth/errors.hpp"

namespace oversmooth {

NoiseAmplification NoiseAmplification::for_degree(double a, double c_a) {
  if (!(a > 0.0)) throw Error("noise amplification: a must be positive");
  if (!(c_a > 0.0)) throw Error("noise amplification: c_a must be positive");
  return {a / (2.0 * a + 2.0), std::max(1.0, 2.0 / c_a)};
}

double NoiseAmplification::lambda(double alpha) const { return std::pow(alpha, b) / kappa; }

double lambda_fn(double alpha, const NoiseAmplification& na) {
  if (!(alpha > 0.0)) throw Error("lambda: alpha must be positive");
  return na.lambda(alpha);
}

double beta_min(double q, double b) {
  if (!(q > 1.0) || !(b > 0.0)) throw Error("beta_min needs q > 1 and b > 0");
  return 1.0 + std::pow(q, -b);
}

ParameterGrid::ParameterGrid(double alpha0, double q, std::size_t count) : alpha0_(alpha0), q_(q) {
  if (!(alpha0 > 0.0)) throw Error("parameter grid: alpha0 must be positive");
  if (!(q > 1.0)) throw Error("parameter grid: spacing q must exceed 1");
  if (count == 0) throw Error("parameter grid: needs at least one point");
  alphas_.resize(count);
  for (std::size_t j = 0; j < count; ++j) alphas_[j] = alpha0 * std::pow(q, static_cast<double>(j));
}

ParameterGrid ParameterGrid::covering(double lo, double hi, double q) {
  if (!(hi >= lo)) throw Error("parameter grid: hi must not be below lo");
  if (!(q > 1.0)) throw Error("parameter grid: spacing q must exceed 1");
  const double steps = std::ceil(std::log(hi / lo) / std::log(q) - 1e-9);
  return ParameterGrid(lo, q, static_cast<std::size_t>(std::max(0.0, steps)) + 1);
}

bool ParameterGrid::endpoints_ok(double delta, double b, double c_e, double c_f,
                                 double c_g) const {
  return alphas_.front() <= c_e * std::pow(delta, 1.0 / b) && c_f <= alphas_.back() &&
         alphas_.back() <= c_g;
}

std::string to_string(BalancingVariant v) {
  switch (v) {
    case BalancingVariant::first:
      return "first";
    case BalancingVariant::standard:
      return "standard";
    case BalancingVariant::third:
      return "third";
  }
  return "unknown";
}

BalancingVariant balancing_variant_from_string(const std::string& s) {
  if (s == "first") return BalancingVariant::first;
  if (s == "standard") return BalancingVariant::standard;
  if (s == "third") return BalancingVariant::third;
  throw Error("unknown balancing variant '" + s + "'");
}

void BalancingConfig::validate(double q, double b) const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("balancing: gamma must lie in (0,1]");
  if (c_bp) {
    if (!(*c_bp > 0.0)) throw Error("balancing: C_BP must be positive");
    return;
  }
  if (!(beta > beta_min(q, b))) throw Error("balancing: beta must exceed 1 + q^{-b}");
}

ReconstructionPath::ReconstructionPath(const std::vector<Reconstruction>& path) : path_(&path) {
  if (path.empty()) throw SelectionError("empty reconstruction path");
  for (const auto& r : path) {
    alphas_.push_back(r.alpha);
    residuals_.push_back(r.residual_norm);
  }
  cache_.assign(path.size() * path.size(), -1.0);
}

double ReconstructionPath::distance(std::size_t i, std::size_t j) const {
  const std::size_t m = alphas_.size();
  double& slot = cache_[std::min(i, j) * m + std::max(i, j)];
  if (slot < 0.0) slot = l2_norm((*path_)[i].x - (*path_)[j].x);
  return slot;
}

PathView ReconstructionPath::view() const {
  return {alphas_, [this](std::size_t i, std::size_t j) { return distance(i, j); }};
}

std::vector<double> ReconstructionPath::errors(const GridFunction& x_dag) const {
  std::vector<double> e;
  e.reserve(path_->size());
  for (const auto& r : *path_) e.push_back(l2_norm(r.x - x_dag));
  return e;
}

nlohmann::json to_json(const SelectionResult& s) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& c : s.trace) {
    trace.push_back({{"i", c.i}, {"j", c.j}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"passed", c.passed}});
  }
  return {{"rule", s.rule},
          {"index", s.index},
          {"alpha_star", s.alpha_star},
          {"alphas", s.alphas},
          {"terminated_at_N", s.terminated_at_N},
          {"trace", trace}};
}

std::vector<std::size_t> oracle_set(const IndexFunction& phi, double delta,
                                    std::span<const double> alphas, double gamma,
                                    const NoiseAmplification& na) {
  std::vector<std::size_t> members;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (phi(alphas[j]) <= gamma * delta / na.lambda(alphas[j])) members.push_back(j);
  }
  return members;
}

namespace {

void require_nonempty(const PathView& path) {
  if (path.alphas.empty()) throw SelectionError("empty reconstruction path");
}

double threshold(double alpha, double delta, const BalancingConfig& config,
                 const NoiseAmplification& na) {
  if (config.c_bp) return *config.c_bp * delta / std::pow(alpha, na.b);
  return config.beta * delta / na.lambda(alpha);
}

SelectionResult start(std::string rule, std::span<const double> alphas) {
  SelectionResult r;
  r.rule = std::move(rule);
  r.alphas.assign(alphas.begin(), alphas.end());
  return r;
}

void select(SelectionResult& r, std::size_t k) {
  r.index = k;
  r.alpha_star = r.alphas[k];
  r.terminated_at_N = k + 1 == r.alphas.size();
}

std::string balancing_name(const BalancingConfig& c) {
  return "balancing_" + to_string(c.variant);
}

}  // namespace

SelectionResult balancing_first(const PathView& path, double delta, const BalancingConfig& config,
                                const NoiseAmplification& na) {
  require_nonempty(path);
  auto r = start(balancing_name(config), path.alphas);
  const std::size_t last = path.alphas.size() - 1;
  std::size_t k = 0;
  for (; k < last; ++k) {
    const double lhs = path.distance(k + 1, k);
    const double rhs = threshold(path.alphas[k], delta, config, na);
    const bool ok = lhs <= rhs;
    r.trace.push_back({k, k + 1, lhs, rhs, ok});
    if (!ok) break;
  }
  select(r, k);
  return r;
}

SelectionResult balancing_standard(const PathView& path, double delta,
                                   const BalancingConfig& config, const NoiseAmplification& na) {
  require_nonempty(path);
  auto r = start(balancing_name(config), path.alphas);
  for (std::size_t k = path.alphas.size(); k-- > 0;) {
    bool all = true;
    for (std::size_t j = 0; j < k; ++j) {
      const double lhs = path.distance(k, j);
      const double rhs = threshold(path.alphas[j], delta, config, na);
      const bool ok = lhs <= rhs;
      r.trace.push_back({j, k, lhs, rhs, ok});
      if (!ok) {
        all = false;
        break;
      }
    }
    if (all) {
      select(r, k);
      return r;
    }
  }
  select(r, 0);
  return r;
}

SelectionResult balancing_third(const PathView& path, double delta, const BalancingConfig& config,
                                const NoiseAmplification& na) {
  require_nonempty(path);
  auto r = start(balancing_name(config), path.alphas);
  const std::size_t last = path.alphas.size() - 1;
  std::size_t k = 0;
  for (; k < last; ++k) {
    bool all = true;
    for (std::size_t j = 0; j <= k; ++j) {
      const double lhs = path.distance(k + 1, j);
      const double rhs = threshold(path.alphas[j], delta, config, na);
      const bool ok = lhs <= rhs;
      r.trace.push_back({j, k + 1, lhs, rhs, ok});
      if (!ok) {
        all = false;
        break;
      }
    }
    if (!all) break;
  }
  select(r, k);
  return r;
}

SelectionResult balancing(const PathView& path, double delta, const BalancingConfig& config,
                          const NoiseAmplification& na) {
  switch (config.variant) {
    case BalancingVariant::first:
      return balancing_first(path, delta, config, na);
    case BalancingVariant::standard:
      return balancing_standard(path, delta, config, na);
    case BalancingVariant::third:
      return balancing_third(path, delta, config, na);
  }
  throw Error("unknown balancing variant");
}

SelectionResult discrepancy_principle(std::span<const double> alphas,
                                      std::span<const double> residuals, double delta,
                                      double c_dp) {
  if (alphas.empty()) throw SelectionError("empty reconstruction path");
  if (alphas.size() != residuals.size()) throw SelectionError("residual count mismatch");
  if (!(c_dp > 0.0)) throw SelectionError("discrepancy: C_DP must be positive");
  auto r = start("discrepancy", alphas);
  const double target = c_dp * delta;
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const bool ok = residuals[k] <= target;
    r.trace.push_back({k, k, residuals[k], target, ok});
    if (ok && (!best || residuals[k] >= residuals[*best])) best = k;
  }
  if (!best) {
    throw SelectionError("residual target unreachable: every residual exceeds C_DP*delta = " +
                         std::to_string(target));
  }
  select(r, *best);
  return r;
}

SelectionResult quasi_optimality_heuristic(const PathView& path) {
  if (path.alphas.size() < 2) {
    throw SelectionError("quasi-optimality heuristic needs at least two reconstructions");
  }
  auto r = start("quasi_optimality", path.alphas);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < path.alphas.size(); ++k) {
    const double d = path.distance(k + 1, k);
    const bool improves = d <= best_value;
    r.trace.push_back({k, k + 1, d, best_value, improves});
    if (improves) {
      best = k;
      best_value = d;
    }
  }
  select(r, best);
  return r;
}

SelectionResult oracle_alpha(std::span<const double> alphas, std::span<const double> errors) {
  if (alphas.empty()) throw SelectionError("empty reconstruction path");
  if (alphas.size() != errors.size()) throw SelectionError("error count mismatch");
  auto r = start("oracle", alphas);
  std::size_t best = 0;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    const bool improves = errors[k] <= errors[best];
    r.trace.push_back({k, k, errors[k], errors[best], improves});
    if (improves) best = k;
  }
  select(r, best);
  return r;
}

double a_priori_alpha(double delta, double a, const SourceCondition& source) {
  if (!(delta > 0.0)) throw Error("a priori choice needs delta > 0");
  switch (source.kind) {
    case SourceCondition::Kind::holder:
      return std::pow(delta, (2.0 * a + 2.0) / (a + source.p));
    case SourceCondition::Kind::logarithmic:
      return delta;
    case SourceCondition::Kind::none:
      break;
  }
  throw Error("a priori choice needs a source condition");
}

ErrorConstant error_constant(BalancingVariant variant, double q, double b, double gamma) {
  if (!(q > 1.0) || !(b > 0.0)) throw Error("error constant needs q > 1 and b > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error("error constant needs 0 < gamma <= 1");
  const double qb = std::pow(q, b);
  ErrorConstant c;
  c.tau_opt = (gamma + 1.0) * (1.0 + 1.0 / qb);
  c.c_h = variant == BalancingVariant::first ? 1.0 + c.tau_opt / (1.0 - 1.0 / qb)
                                             : 1.0 + c.tau_opt;
  c.c2 = qb * (gamma + c.c_h) / gamma;
  return c;
}

Infimum error_bound_infimum(const IndexFunction& phi, double delta, const NoiseAmplification& na,
                            double lo, double hi) {
  if (!(lo > 0.0 && hi >= lo)) throw Error("infimum: invalid interval");
  auto f = [&](double log_alpha) {
    const double alpha = std::exp(log_alpha);
    return phi(alpha) + delta / na.lambda(alpha);
  };
  const double a = std::log(lo), b = std::log(hi);
  const double decades = (b - a) / std::log(10.0);
  const std::size_t samples = std::max<std::size_t>(2, static_cast<std::size_t>(200 * decades) + 1);
  const double step = (b - a) / static_cast<double>(samples - 1);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const double v = f(a + step * static_cast<double>(s));
    if (v < best_value) {
      best_value = v;
      best = s;
    }
  }
  // Golden section on the bracketing cell pair.
  double left = std::max(a, a + step * (static_cast<double>(best) - 1.0));
  double right = std::min(b, a + step * (static_cast<double>(best) + 1.0));
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1 = right - ratio * (right - left), c2 = left + ratio * (right - left);
  double f1 = f(c1), f2 = f(c2);
  // Width in log(alpha); 1e-4 is far below the 1e-3 relative target.
  while (right - left > 1e-4) {
    if (f1 <= f2) {
      right = c2;
      c2 = c1;
      f2 = f1;
      c1 = right - ratio * (right - left);
      f1 = f(c1);
    } else {
      left = c1;
      c1 = c2;
      f1 = f2;
      c2 = left + ratio * (right - left);
      f2 = f(c2);
    }
  }
  Infimum out{best_value, std::exp(a + step * static_cast<double>(best))};
  for (double x : {c1, c2, left, right}) {
    const double v = f(x);
    if (v < out.value) out = {v, std::exp(x)};
  }
  return out;
}

QuasiOptimalityCheck quasi_optimality_check(double selection_error, const IndexFunction& phi,
                                            double delta, const NoiseAmplification& na, double c2,
                                            double lo, double hi) {
  const auto inf = error_bound_infimum(phi, delta, na, lo, hi);
  QuasiOptimalityCheck r;
  r.error = selection_error;
  r.infimum = inf.value;
  r.bound = c2 * inf.value;
  r.passed = selection_error <= r.bound;
  return r;
}

}  // namespace oversmooth
