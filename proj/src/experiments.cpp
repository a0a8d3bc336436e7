#include "oversmooth/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include "oversmooth/errors.hpp"

namespace oversmooth {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<double> gaussian_vector(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xi(size);
  for (double& v : xi) v = normal(rng);
  return xi;
}

}  // namespace

GridFunction make_noisy_data(const GridFunction& y, const NoiseModel& model) {
  if (!(model.delta >= 0.0)) throw Error("noise level must be non-negative");
  if (model.delta == 0.0) return y;
  for (std::uint64_t attempt = 0;; ++attempt) {
    GridFunction xi(y.grid(), gaussian_vector(y.size(), model.seed + attempt));
    const double norm = l2_norm(xi);
    if (norm > 0.0) return y + (model.delta / norm) * xi;
  }
}

RateFit fit_rate(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 3) throw DegenerateFit("fit_rate needs at least three samples");
  for (const auto& [d, v] : samples) {
    if (!(d > 0.0) || !(v > 0.0)) throw DegenerateFit("fit_rate needs positive samples");
  }
  const double m = static_cast<double>(samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [d, v] : samples) {
    mx += std::log(d);
    my += std::log(v);
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [d, v] : samples) {
    sxx += (std::log(d) - mx) * (std::log(d) - mx);
    sxy += (std::log(d) - mx) * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("fit_rate needs at least two distinct noise levels");
  RateFit fit;
  fit.kappa = sxy / sxx;
  const double intercept = my - fit.kappa * mx;
  fit.c = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [d, v] : samples) {
    const double r = std::log(v) - intercept - fit.kappa * std::log(d);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.samples = std::move(samples);
  return fit;
}

double total_variation(const GridFunction& x) {
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) tv += std::abs(x[i + 1] - x[i]);
  return tv;
}

std::string to_string(ExactSolution s) {
  return s == ExactSolution::constant_one ? "constant_one" : "parabola";
}

ExactSolution exact_solution_from_string(const std::string& s) {
  if (s == "constant_one") return ExactSolution::constant_one;
  if (s == "parabola") return ExactSolution::parabola;
  throw Error("unknown exact solution '" + s + "'");
}

GridFunction exact_solution(const Grid& grid, ExactSolution which) {
  if (which == ExactSolution::constant_one) return GridFunction(grid, 1.0);
  return GridFunction::sample(grid, [](double t) { return t - t * t; });
}

ParameterGrid ExperimentConfig::parameter_grid(double delta) const {
  if (alpha0) return ParameterGrid(*alpha0, q, count);
  if (!(delta > 0.0)) throw Error("parameter grid: alpha0 is required when delta = 0");
  const double b = noise_amplification().b;
  const double lo = c_e * std::pow(delta, 1.0 / b);
  return ParameterGrid::covering(lo, std::max(alpha_max, lo * q), q);
}

PathRun compute_path(const ExperimentConfig& config, double delta, std::uint64_t seed) {
  const Grid grid(config.n);
  std::shared_ptr<const ForwardOperator> op = make_operator(config.problem);
  PathRun run{.delta = delta,
              .seed = seed,
              .x_dag = exact_solution(grid, config.solution),
              .y_delta = GridFunction(grid),
              .path = {}};
  run.y_delta = make_noisy_data(op->apply(run.x_dag), {delta, seed});
  const TikhonovProblem problem(op, run.y_delta, GridFunction(grid, 0.0));
  const auto alphas = config.parameter_grid(delta);
  run.path = problem.solve_path(alphas.alphas(), config.solver);
  return run;
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t delta_index, std::size_t repetition) {
  // splitmix64 of the cell coordinates keeps neighbouring cells uncorrelated.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + delta_index) +
                    0xbf58476d1ce4e5b9ULL * repetition;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> default_delta_sweep() {
  std::vector<double> deltas;
  for (int i = 0; i < 8; ++i) deltas.push_back(0.0179 * std::ldexp(1.0, -i));
  return deltas;
}

Table1 run_table1(const std::vector<double>& c_bp_list, const std::vector<double>& delta_list,
                  std::size_t seeds, const ExperimentConfig& config) {
  if (c_bp_list.empty() || delta_list.empty() || seeds == 0) {
    throw Error("run_table1 needs nonempty C_BP, delta and seed lists");
  }
  const std::size_t runs = delta_list.size() * seeds;
  std::vector<Table1Cell> cells(runs * c_bp_list.size());
  const NoiseAmplification na = config.noise_amplification();

  parallel_for(runs, config.jobs, [&](std::size_t run_index) {
    const std::size_t di = run_index / seeds, rep = run_index % seeds;
    const double delta = delta_list[di];
    const std::uint64_t seed = cell_seed(config.seed, di, rep);
    std::string failure;
    std::optional<PathRun> run;
    try {
      run = compute_path(config, delta, seed);
    } catch (const Error& e) {
      failure = e.what();
    }
    for (std::size_t c = 0; c < c_bp_list.size(); ++c) {
      Table1Cell& cell = cells[run_index * c_bp_list.size() + c];
      cell.c_bp = c_bp_list[c];
      cell.delta = delta;
      cell.seed = seed;
      cell.failure = failure;
      if (!run) continue;
      const ReconstructionPath path(run->path);
      BalancingConfig bc;
      bc.c_bp = c_bp_list[c];
      const auto sel = balancing_first(path.view(), delta, bc, na);
      const auto& chosen = run->path[sel.index];
      cell.alpha = sel.alpha_star;
      cell.error = l2_norm(chosen.x - run->x_dag);
      cell.failure = chosen.failure;
      cell.ok = chosen.failure.empty();
    }
  });

  Table1 table;
  table.cells = std::move(cells);
  for (double c_bp : c_bp_list) {
    std::vector<std::pair<double, double>> err, alpha;
    for (const auto& cell : table.cells) {
      if (cell.c_bp != c_bp || !cell.ok) continue;
      err.emplace_back(cell.delta, cell.error);
      alpha.emplace_back(cell.delta, cell.alpha);
    }
    table.rows.push_back({c_bp, fit_rate(err), fit_rate(alpha)});
  }
  return table;
}

std::string RuleSpec::label() const {
  switch (kind) {
    case Kind::balancing:
      return "balancing(C_BP=" + short_num(constant) + ")";
    case Kind::discrepancy:
      return "discrepancy(C_DP=" + short_num(constant) + ")";
    case Kind::quasi_optimality:
      return "quasi_optimality";
    case Kind::oracle:
      return "oracle";
  }
  return "unknown";
}

std::vector<RuleSpec> default_rule_set() {
  using K = RuleSpec::Kind;
  return {{K::balancing, 0.02},  {K::balancing, 0.1},       {K::discrepancy, 1.0},
          {K::discrepancy, 1.1}, {K::quasi_optimality, 0.0}, {K::oracle, 0.0}};
}

RuleComparison run_rule_comparison(double delta, const std::vector<RuleSpec>& rules,
                                   const ExperimentConfig& config) {
  if (!(delta > 0.0)) throw Error("rule comparison needs delta > 0");
  const auto run = compute_path(config, delta, cell_seed(config.seed, 0, 0));
  const ReconstructionPath path(run.path);
  const NoiseAmplification na = config.noise_amplification();

  RuleComparison report;
  report.delta = delta;
  report.alphas.assign(path.alphas().begin(), path.alphas().end());
  report.residuals.assign(path.residuals().begin(), path.residuals().end());
  report.errors = path.errors(run.x_dag);
  for (std::size_t k = 0; k < run.path.size(); ++k) {
    report.consecutive_diff.push_back(k + 1 < run.path.size()
                                          ? path.distance(k, k + 1)
                                          : std::numeric_limits<double>::quiet_NaN());
  }

  for (const auto& rule : rules) {
    RuleMarker marker{.rule = rule.label()};
    try {
      SelectionResult sel;
      switch (rule.kind) {
        case RuleSpec::Kind::balancing: {
          BalancingConfig bc;
          bc.c_bp = rule.constant;
          sel = balancing_first(path.view(), delta, bc, na);
          break;
        }
        case RuleSpec::Kind::discrepancy:
          sel = discrepancy_principle(path.alphas(), path.residuals(), delta, rule.constant);
          break;
        case RuleSpec::Kind::quasi_optimality:
          sel = quasi_optimality_heuristic(path.view());
          break;
        case RuleSpec::Kind::oracle:
          sel = oracle_alpha(path.alphas(), report.errors);
          break;
      }
      marker.ok = true;
      marker.index = sel.index;
      marker.alpha = sel.alpha_star;
      marker.error = report.errors[sel.index];
    } catch (const SelectionError& e) {
      marker.failure = e.what();
    }
    report.markers.push_back(std::move(marker));
  }
  return report;
}

std::vector<double> default_contrast_alphas() { return {9.52e-9, 2.44e-7, 2.12e-5, 1.60e-4}; }

std::vector<ContrastEntry> run_oversmoothing_contrast(double delta, const std::vector<double>& alphas,
                                                      const ExperimentConfig& config) {
  if (alphas.empty()) throw Error("contrast needs at least one alpha");
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  const Grid grid(config.n);
  std::shared_ptr<const ForwardOperator> op = make_operator(config.problem);

  std::vector<ContrastEntry> entries;
  for (ExactSolution which : {ExactSolution::constant_one, ExactSolution::parabola}) {
    const auto x_dag = exact_solution(grid, which);
    const auto y_delta = make_noisy_data(op->apply(x_dag), {delta, cell_seed(config.seed, 0, 0)});
    const TikhonovProblem problem(op, y_delta, GridFunction(grid, 0.0));
    const auto path = problem.solve_path(sorted, config.solver);
    for (const auto& r : path) {
      ContrastEntry e{.solution = which,
                      .alpha = r.alpha,
                      .reconstruction = r,
                      .x_dag = x_dag,
                      .error = l2_norm(r.x - x_dag),
                      .total_variation = total_variation(r.x),
                      .exact_total_variation = total_variation(x_dag)};
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

SpectralSurrogate::SpectralSurrogate(const HilbertScale& scale, const SourceCondition& source,
                                     std::vector<double> w)
    : a_(scale.degree()), source_(source) {
  if (w.size() != scale.modes()) throw Error("spectral surrogate: w has wrong length");
  if (source.kind == SourceCondition::Kind::none) {
    throw Error("spectral surrogate needs a source condition");
  }
  const auto& sigma = scale.singular_values();
  double ww = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    forward_sv_.push_back(std::pow(sigma[k], a_));
    b_.push_back(1.0 / sigma[k]);
    x_dag_.push_back(source.psi(scale.g_eigenvalue(k), a_) * w[k]);
    ww += w[k] * w[k];
  }
  w_norm_ = std::sqrt(ww);
}

std::vector<double> SpectralSurrogate::noisy_data(double delta, std::uint64_t seed) const {
  auto noise = gaussian_vector(x_dag_.size(), seed);
  double nn = 0.0;
  for (double v : noise) nn += v * v;
  const double scale = nn > 0.0 ? delta / std::sqrt(nn) : 0.0;
  std::vector<double> y(x_dag_.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = forward_sv_[k] * x_dag_[k] + scale * noise[k];
  return y;
}

std::vector<double> SpectralSurrogate::reconstruct(std::span<const double> data,
                                                   double alpha) const {
  std::vector<double> x(data.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double s = forward_sv_[k];
    x[k] = s * data[k] / (s * s + alpha * b_[k] * b_[k]);
  }
  return x;
}

double SpectralSurrogate::error(std::span<const double> coefficients) const {
  double e = 0.0;
  for (std::size_t k = 0; k < x_dag_.size(); ++k) {
    e += (coefficients[k] - x_dag_[k]) * (coefficients[k] - x_dag_[k]);
  }
  return std::sqrt(e);
}

DecompositionScan error_decomposition_scan(const SourceCondition& source,
                                           const NoiseAmplification& na,
                                           const std::vector<double>& deltas,
                                           const ExperimentConfig& config) {
  if (deltas.empty()) throw Error("decomposition scan needs noise levels");
  const HilbertScale scale(Grid(config.n), config.a);
  std::vector<double> w(scale.modes());
  auto xi = gaussian_vector(w.size(), config.seed);
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = xi[k] / std::sqrt(static_cast<double>(w.size()));
  const SpectralSurrogate model(scale, source, std::move(w));
  const auto alphas =
      config.alpha0 ? config.parameter_grid(0.0) : ParameterGrid::covering(1e-14, 1.0, 2.0);

  DecompositionScan scan;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    const auto y = model.noisy_data(delta, cell_seed(config.seed, di, 0));
    double c1 = 0.0;
    for (double alpha : alphas.alphas()) {
      DecompositionSample s;
      s.delta = delta;
      s.alpha = alpha;
      s.error = model.error(model.reconstruct(y, alpha));
      s.psi = model.psi(alpha);
      s.noise_term = delta / na.lambda(alpha);
      c1 = std::max(c1, (s.error - s.noise_term) / s.psi);
      scan.samples.push_back(s);
    }
    scan.c1_by_delta.emplace_back(delta, c1);
    scan.c1 = std::max(scan.c1, c1);
  }
  for (auto& s : scan.samples) s.bound = scan.c1 * s.psi + s.noise_term;
  return scan;
}

void write_table1_csv(std::ostream& os, const Table1& table) {
  os << "C_BP,c_x,kappa_x,c_alpha,kappa_alpha,samples\n";
  for (const auto& r : table.rows) {
    os << num(r.c_bp) << ',' << num(r.error_fit.c) << ',' << num(r.error_fit.kappa) << ','
       << num(r.alpha_fit.c) << ',' << num(r.alpha_fit.kappa) << ',' << r.error_fit.samples.size()
       << '\n';
  }
}

void write_table1_cells_csv(std::ostream& os, const Table1& table) {
  os << "C_BP,delta,seed,alpha,error,ok,failure\n";
  for (const auto& c : table.cells) {
    os << num(c.c_bp) << ',' << num(c.delta) << ',' << c.seed << ',' << num(c.alpha) << ','
       << num(c.error) << ',' << (c.ok ? 1 : 0) << ",\"" << c.failure << "\"\n";
  }
}

void write_rule_curves_csv(std::ostream& os, const RuleComparison& report) {
  os << "alpha,consecutive_diff,error,residual\n";
  for (std::size_t k = 0; k < report.alphas.size(); ++k) {
    os << num(report.alphas[k]) << ',' << num(report.consecutive_diff[k]) << ','
       << num(report.errors[k]) << ',' << num(report.residuals[k]) << '\n';
  }
}

void write_rule_markers_csv(std::ostream& os, const RuleComparison& report) {
  os << "rule,ok,index,alpha,error,failure\n";
  for (const auto& m : report.markers) {
    os << '"' << m.rule << "\"," << (m.ok ? 1 : 0) << ',' << m.index << ',' << num(m.alpha) << ','
       << num(m.error) << ",\"" << m.failure << "\"\n";
  }
}

void write_reconstruction_csv(std::ostream& os, const GridFunction& x, const GridFunction* x_dag) {
  os << (x_dag ? "t,x,x_dag\n" : "t,x\n");
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << num(x.grid().node(i)) << ',' << num(x[i]);
    if (x_dag) os << ',' << num((*x_dag)[i]);
    os << '\n';
  }
}

void write_contrast_summary_csv(std::ostream& os, const std::vector<ContrastEntry>& entries) {
  os << "solution,alpha,error,total_variation,exact_total_variation,converged\n";
  for (const auto& e : entries) {
    os << to_string(e.solution) << ',' << num(e.alpha) << ',' << num(e.error) << ','
       << num(e.total_variation) << ',' << num(e.exact_total_variation) << ','
       << (e.reconstruction.converged ? 1 : 0) << '\n';
  }
}

void write_decomposition_csv(std::ostream& os, const DecompositionScan& scan) {
  os << "delta,alpha,error,psi,noise_term,bound\n";
  for (const auto& s : scan.samples) {
    os << num(s.delta) << ',' << num(s.alpha) << ',' << num(s.error) << ',' << num(s.psi) << ','
       << num(s.noise_term) << ',' << num(s.bound) << '\n';
  }
}

}  // namespace oversmooth
