#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "oversmooth/forward_model.hpp"
#include "oversmooth/tikhonov_solver.hpp"

namespace oversmooth::testing {

Eigen::MatrixXd dense_integration(const Grid& grid) {
  const std::size_t m = grid.size();
  const double h = grid.spacing();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t j = 1; j <= i; ++j) {
      J(i, j - 1) += 0.5 * h;
      J(i, j) += 0.5 * h;
    }
  }
  return J;
}

GridFunction dense_linear_tikhonov(const GridFunction& y, double alpha) {
  const Grid& grid = y.grid();
  const std::size_t n = grid.intervals();
  const double h = grid.spacing();
  const Eigen::MatrixXd J = dense_integration(grid).leftCols(n);
  Eigen::VectorXd w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) w(i) = (i == 0 || i == n) ? 0.5 * h : h;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    D(i, i) = -1.0;
    if (i + 1 < n) D(i, i + 1) = 1.0;
  }
  Eigen::MatrixXd A = J.transpose() * w.asDiagonal() * J + alpha * (D.transpose() * D) / h;
  for (std::size_t i = 0; i < n; ++i) A(i, i) += alpha * w(i);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.values().data(), grid.size());
  const Eigen::VectorXd rhs = J.transpose() * w.asDiagonal() * yv;
  const Eigen::VectorXd x = A.ldlt().solve(rhs);
  GridFunction out(grid, 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = x(i);
  return out;
}

PathView PointPath::view() const {
  return {alphas, [this](std::size_t i, std::size_t j) { return distance(i, j); }};
}

double brute_threshold(double alpha, double delta, const BalancingConfig& c,
                       const NoiseAmplification& na) {
  const double scale = delta / std::pow(alpha, na.b);
  return c.c_bp ? *c.c_bp * scale : c.beta * na.kappa * scale;
}

std::vector<std::size_t> brute_first_set(const PointPath& p, double delta,
                                         const BalancingConfig& c, const NoiseAmplification& na) {
  std::vector<std::size_t> set;
  for (std::size_t k = 0; k < p.alphas.size(); ++k) {
    bool in = true;
    for (std::size_t j = 1; j <= k; ++j) {
      in = in && p.distance(j, j - 1) <= brute_threshold(p.alphas[j - 1], delta, c, na);
    }
    if (in) set.push_back(k);
  }
  return set;
}

std::vector<std::size_t> brute_standard_set(const PointPath& p, double delta,
                                            const BalancingConfig& c, const NoiseAmplification& na) {
  std::vector<std::size_t> set;
  for (std::size_t k = 0; k < p.alphas.size(); ++k) {
    bool in = true;
    for (std::size_t j = 0; j < k; ++j) {
      in = in && p.distance(k, j) <= brute_threshold(p.alphas[j], delta, c, na);
    }
    if (in) set.push_back(k);
  }
  return set;
}

std::vector<std::size_t> brute_third_set(const PointPath& p, double delta,
                                         const BalancingConfig& c, const NoiseAmplification& na) {
  std::vector<std::size_t> set;
  for (std::size_t k = 0; k < p.alphas.size(); ++k) {
    bool in = true;
    for (std::size_t j = 1; j <= k; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        in = in && p.distance(j, i) <= brute_threshold(p.alphas[i], delta, c, na);
      }
    }
    if (in) set.push_back(k);
  }
  return set;
}

void Tally::record(bool ok, const std::string& what) {
  ++trials;
  if (!ok) {
    if (failures == 0) first_failure = what;
    ++failures;
  }
}

GridFunction random_function(const Grid& grid, std::mt19937_64& rng, double amplitude) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> normal;
  double c[6], phase[6];
  for (int k = 0; k < 6; ++k) {
    c[k] = u(rng) / (1.0 + k);
    phase[k] = u(rng) * std::numbers::pi;
  }
  const double roughness = 0.1 * std::abs(u(rng));
  auto f = GridFunction::sample(grid, [&](double t) {
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += c[k] * std::cos(k * std::numbers::pi * t + phase[k]);
    return v;
  });
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += roughness * normal(rng);
  const double norm = l2_norm(f);
  if (norm > 0.0) f *= amplitude / norm;
  return f;
}

namespace {

Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v / v.norm();
}

std::string describe(const char* what, std::size_t trial) {
  std::ostringstream os;
  os << what << " (trial " << trial << ")";
  return os.str();
}

}  // namespace

Tally balancing_brute_force(std::size_t paths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally tally;
  for (std::size_t t = 0; t < paths; ++t) {
    const std::size_t count = 1 + static_cast<std::size_t>(u(rng) * 30.0);
    const double q = 1.1 + 3.0 * u(rng);
    const double alpha0 = std::pow(10.0, -12.0 + 10.0 * u(rng));
    const double delta = std::pow(10.0, -4.0 + 3.0 * u(rng));
    NoiseAmplification na{u(rng) < 0.5 ? 0.25 : 0.05 + 0.4 * u(rng), 1.0 + 2.0 * u(rng)};
    BalancingConfig cfg;
    if (u(rng) < 0.3) {
      cfg.c_bp = 0.01 + u(rng);
    } else {
      cfg.beta = beta_min(q, na.b) + 3.0 * u(rng) + 1e-9;
    }

    PointPath path;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    for (std::size_t j = 0; j < count; ++j) {
      path.alphas.push_back(alpha0 * std::pow(q, static_cast<double>(j)));
      if (j > 0) {
        // Steps straddle the threshold so that both outcomes occur.
        const double thr = brute_threshold(path.alphas[j - 1], delta, cfg, na);
        x += random_unit(rng, 3) * thr * 1.3 * u(rng) * (u(rng) < 0.05 ? 3.0 : 1.0);
      }
      path.points.push_back(x);
    }

    const auto view = path.view();
    const struct {
      BalancingVariant variant;
      std::vector<std::size_t> set;
    } cases[] = {{BalancingVariant::first, brute_first_set(path, delta, cfg, na)},
                 {BalancingVariant::standard, brute_standard_set(path, delta, cfg, na)},
                 {BalancingVariant::third, brute_third_set(path, delta, cfg, na)}};
    for (const auto& c : cases) {
      BalancingConfig v = cfg;
      v.variant = c.variant;
      const auto sel = balancing(view, delta, v, na);
      const bool ok = !c.set.empty() && sel.index == c.set.back() &&
                      sel.alpha_star == path.alphas[c.set.back()];
      tally.record(ok, describe(("balancing_" + to_string(c.variant)).c_str(), t));
    }
  }
  return tally;
}

Tally set_inclusions(std::size_t paths, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally tally;
  for (std::size_t t = 0; t < paths; ++t) {
    const std::size_t count = 2 + static_cast<std::size_t>(u(rng) * 29.0);
    const double q = 1.1 + 3.0 * u(rng);
    const double delta = std::pow(10.0, -5.0 + 4.0 * u(rng));
    const NoiseAmplification na{0.25, 1.0 + u(rng)};
    const double alpha0 = std::pow(delta, 1.0 / na.b) * std::pow(10.0, -2.0 * u(rng));
    const double c = std::pow(10.0, -1.0 + 2.0 * u(rng));
    const double expo = 0.05 + 0.45 * u(rng);
    const auto phi = [c, expo](double alpha) { return c * std::pow(alpha, expo); };
    BalancingConfig cfg;
    cfg.gamma = 0.05 + 0.95 * u(rng);
    cfg.beta = (cfg.gamma + 1.0) * (1.0 + std::pow(q, -na.b)) * (1.0 + 0.5 * u(rng));

    // Candidates x_j with ||x_j - x_dag|| <= phi(alpha_j) + delta/lambda(alpha_j), x_dag = 0.
    PointPath path;
    for (std::size_t j = 0; j < count; ++j) {
      const double alpha = alpha0 * std::pow(q, static_cast<double>(j));
      path.alphas.push_back(alpha);
      path.points.push_back(random_unit(rng, 4) * u(rng) *
                            (phi(alpha) + delta / na.lambda(alpha)));
    }

    const auto m = oracle_set(phi, delta, path.alphas, cfg.gamma, na);
    const auto h = brute_first_set(path, delta, cfg, na);
    const auto hbar = brute_standard_set(path, delta, cfg, na);
    const auto htilde = brute_third_set(path, delta, cfg, na);
    const auto subset = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
      return std::includes(b.begin(), b.end(), a.begin(), a.end());
    };
    tally.record(subset(m, htilde), describe("M not in H~", t));
    tally.record(subset(htilde, h), describe("H~ not in H", t));
    tally.record(subset(htilde, hbar), describe("H~ not in H-bar", t));
  }
  return tally;
}

Tally surrogate_quasi_optimality(const std::vector<double>& deltas, std::uint64_t seed) {
  const HilbertScale scale(Grid(1000), 1.0);
  const NoiseAmplification na{0.25, 1.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Tally tally;
  std::size_t trial = 0;
  for (double p : {0.25, 0.5, 1.0}) {
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<double> w(scale.modes());
      double ww = 0.0;
      for (double& v : w) {
        v = normal(rng);
        ww += v * v;
      }
      for (double& v : w) v /= std::sqrt(ww);
      const SpectralSurrogate model(scale, SourceCondition::holder(p), w);
      const auto phi = [&](double alpha) { return model.w_norm() * model.psi(alpha); };
      const auto& x_dag = model.x_dag();
      for (double delta : deltas) {
        const auto y = model.noisy_data(delta, rng());
        for (double q : {1.5, 2.0, 16.0}) {
          const auto grid = ParameterGrid::covering(1e-2 * std::pow(delta, 1.0 / na.b), 1e2, q);
          PointPath path;
          path.alphas.assign(grid.alphas().begin(), grid.alphas().end());
          for (double alpha : path.alphas) {
            const auto x = model.reconstruct(y, alpha);
            path.points.push_back(Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()));
          }
          const Eigen::VectorXd dag = Eigen::Map<const Eigen::VectorXd>(x_dag.data(), x_dag.size());
          for (auto variant :
               {BalancingVariant::first, BalancingVariant::standard, BalancingVariant::third}) {
            const auto ec = error_constant(variant, q, na.b, 1.0);
            BalancingConfig cfg;
            cfg.variant = variant;
            cfg.gamma = 1.0;
            cfg.beta = ec.tau_opt;
            const auto sel = balancing(path.view(), delta, cfg, na);
            const double error = (path.points[sel.index] - dag).norm();
            const auto check = quasi_optimality_check(error, phi, delta, na, ec.c2);
            std::ostringstream what;
            what << to_string(variant) << " p=" << p << " q=" << q << " delta=" << delta
                 << " error=" << error << " bound=" << check.bound;
            tally.record(check.passed, what.str());
            ++trial;
          }
        }
      }
    }
  }
  return tally;
}

Tally tangential_cone(std::size_t samples, std::uint64_t seed) {
  const Grid grid(1000);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally tally;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x_dag = random_function(grid, rng, 3.0 * u(rng));
    // Arbitrary pair for the remainder estimate.
    const auto x = random_function(grid, rng, std::pow(10.0, -3.0 + 4.0 * u(rng))) + x_dag;
    const auto profile = NonlinearityProfile::for_solution(x_dag, 0.5);
    const auto far = tcc_report(x, x_dag, profile);
    tally.record(far.lhs <= far.mid + 1e-10, describe("remainder exceeds product", s));

    // x inside the ball of radius r for the two-sided chain.
    const auto near_x = x_dag + random_function(grid, rng, 0.5 * u(rng));
    const auto near = tcc_report(near_x, x_dag, profile);
    tally.record(near.rhs_lower <= near.image_gap + 1e-10 && near.image_gap <= near.rhs_upper + 1e-10,
                 describe("two-sided chain", s));
  }
  return tally;
}

Tally explosion(const std::vector<std::size_t>& ns, double delta) {
  // Fine enough that the trapezoid integral of cos(nt)-type integrands is accurate.
  const Grid grid(200000);
  const ExpGrowthOperator op;
  const auto f_dag = op.apply(GridFunction(grid, 1.0));
  Tally tally;
  for (std::size_t n : ns) {
    const auto x = explosion_sequence(grid, n, delta);
    const double gap = l2_norm(op.apply(x) - f_dag);
    const double lower = static_cast<double>(n) * delta / (2.0 * std::numbers::e * (1.0 + delta));
    std::ostringstream what;
    what << "n=" << n << " gap=" << gap << " norm=" << l2_norm(x) << " lower=" << lower;
    tally.record(gap <= delta && l2_norm(x) >= lower, what.str());
  }
  return tally;
}

Tally gradient_vs_differences(std::size_t points, std::uint64_t seed, double tolerance) {
  const Grid grid(1000);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  const std::shared_ptr<const ForwardOperator> op = make_operator("exp_growth");
  Tally tally;
  for (std::size_t s = 0; s < points; ++s) {
    auto y = op->apply(random_function(grid, rng, 1.0));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.01 * normal(rng);
    const TikhonovProblem problem(op, y, random_function(grid, rng, 0.5));
    auto x = random_function(grid, rng, 1.0 + u(rng));
    x[x.size() - 1] = 0.0;
    const double alpha = std::pow(10.0, -6.0 + 6.0 * u(rng));
    const auto g = problem.gradient(x, alpha);

    GridFunction v(grid, 0.0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) v[i] = normal(rng);
    double directional = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) directional += g[i] * v[i];
    const double eps = 1e-6;
    const double fd =
        (problem.value(x + eps * v, alpha) - problem.value(x - eps * v, alpha)) / (2.0 * eps);
    const double rel = std::abs(directional - fd) / std::max(std::abs(fd), 1e-300);
    std::ostringstream what;
    what << "point " << s << " relative error " << rel;
    tally.record(rel < tolerance, what.str());
  }
  return tally;
}

}  // namespace oversmooth::testing
