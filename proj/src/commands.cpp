#include "oversmooth/commands.hpp"

#include <Eigen/Core>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "oversmooth/errors.hpp"

namespace oversmooth {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Artifacts {
 public:
  Artifacts(const RunConfig& config, std::string name) : dir_(config.output_dir), name_(std::move(name)) {
    manifest_["tool"] = "oversmooth";
    manifest_["version"] = version_string;
    manifest_["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    manifest_["command"] = name_;
    manifest_["config"] = to_json(config);
    manifest_["artifacts"] = json::array();
    manifest_["seeds"] = json::array();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("output_dir", "cannot create '" + dir_.string() + "': " + ec.message());
  }

  template <class Writer>
  void write(const std::string& file, Writer&& writer) {
    const fs::path path = dir_ / file;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
    writer(os);
    paths_.push_back(path.string());
    manifest_["artifacts"].push_back(file);
  }

  void seed(std::uint64_t s) { manifest_["seeds"].push_back(s); }
  json& results() { return manifest_["results"]; }

  void finish(std::ostream& out) {
    write(name_ + "_manifest.json", [&](std::ostream& os) { os << manifest_.dump(2) << '\n'; });
    for (const auto& p : paths_) out << p << '\n';
  }

 private:
  fs::path dir_;
  std::string name_;
  json manifest_;
  std::vector<std::string> paths_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double single_delta(const RunConfig& c) {
  if (c.noise.deltas.size() != 1) {
    throw ConfigError("noise.deltas", "this command needs exactly one noise level");
  }
  return c.noise.deltas.front();
}

void require_grid(const RunConfig& c, double delta) {
  if (!c.alpha0 && !(delta > 0.0)) throw ConfigError("grid.alpha0", "required when delta = 0");
}

struct Data {
  std::shared_ptr<const ForwardOperator> op;
  std::optional<GridFunction> x_dag;
  GridFunction y_delta;
  double delta;
  std::uint64_t seed;
};

Data prepare_data(const RunConfig& c) {
  if (!c.x_dag && !c.data_file) throw ConfigError("x_dag", "required unless data_file is given");
  const Grid grid(c.n);
  Data d{make_operator(c.problem), std::nullopt, GridFunction(grid), single_delta(c),
         cell_seed(c.noise.seed, 0, 0)};
  if (c.x_dag) d.x_dag = exact_solution(grid, *c.x_dag);
  if (c.data_file) {
    d.y_delta = read_data_csv(*c.data_file, grid);
  } else {
    d.y_delta = make_noisy_data(d.op->apply(*d.x_dag), {d.delta, d.seed});
  }
  return d;
}

void write_path_csv(std::ostream& os, const std::vector<Reconstruction>& path,
                    const std::optional<GridFunction>& x_dag) {
  os << "alpha,residual,penalty,functional,error,iterations,converged,failure\n";
  for (const auto& r : path) {
    const double error = x_dag && r.failure.empty() ? l2_norm(r.x - *x_dag)
                                                    : std::numeric_limits<double>::quiet_NaN();
    os << num(r.alpha) << ',' << num(r.residual_norm) << ',' << num(r.penalty_norm) << ','
       << num(r.functional_value) << ',' << num(error) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ",\"" << r.failure << "\"\n";
  }
}

json reconstruction_summary(const Reconstruction& r, const std::optional<GridFunction>& x_dag) {
  json j = {{"alpha", r.alpha},
            {"residual", r.residual_norm},
            {"penalty", r.penalty_norm},
            {"gradient_norm", r.gradient_norm},
            {"iterations", r.iterations},
            {"converged", r.converged}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  if (x_dag && r.failure.empty()) j["error"] = l2_norm(r.x - *x_dag);
  return j;
}

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_run_failure;
  }
}

SelectionResult apply_rule(const RunConfig& c, const ReconstructionPath& path, double delta,
                           const std::optional<GridFunction>& x_dag) {
  const NoiseAmplification na = c.experiment().noise_amplification();
  BalancingConfig bc;
  bc.beta = c.rule.beta;
  bc.gamma = c.rule.gamma;
  bc.c_bp = c.rule.c_bp;
  switch (*c.rule.id) {
    case RuleId::balancing_first:
    case RuleId::balancing_standard:
    case RuleId::balancing_third:
      bc.variant = static_cast<BalancingVariant>(static_cast<int>(*c.rule.id));
      return balancing(path.view(), delta, bc, na);
    case RuleId::discrepancy:
      return discrepancy_principle(path.alphas(), path.residuals(), delta, c.rule.c_dp);
    case RuleId::quasi_optimality:
      return quasi_optimality_heuristic(path.view());
    case RuleId::oracle:
      return oracle_alpha(path.alphas(), path.errors(*x_dag));
  }
  throw Error("unhandled rule");
}

}  // namespace

GridFunction read_data_csv(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("data_file", "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double t = 0.0, y = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> y) || comma != ',') {
      throw ConfigError("data_file", "malformed row '" + line + "'");
    }
    if (values.size() >= grid.size() || std::abs(t - grid.node(values.size())) > 1e-9) {
      throw ConfigError("data_file", "nodes do not match a grid with n = " +
                                         std::to_string(grid.intervals()));
    }
    values.push_back(y);
  }
  if (values.size() != grid.size()) {
    throw ConfigError("data_file", "expected " + std::to_string(grid.size()) + " rows");
  }
  return GridFunction(grid, std::move(values));
}

int command_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    const Data d = prepare_data(config);
    const TikhonovProblem problem(d.op, d.y_delta, GridFunction(d.y_delta.grid(), 0.0));
    Artifacts art(config, "solve");
    art.seed(d.seed);
    bool failed = false;
    if (config.alpha) {
      const auto r = problem.minimize(*config.alpha, config.solver());
      failed = !r.failure.empty();
      const GridFunction* xd = d.x_dag ? &*d.x_dag : nullptr;
      art.write("reconstruction.csv", [&](std::ostream& os) { write_reconstruction_csv(os, r.x, xd); });
      art.results() = reconstruction_summary(r, d.x_dag);
      if (failed) err << "solver failure at alpha = " << r.alpha << ": " << r.failure << '\n';
    } else {
      require_grid(config, d.delta);
      const auto path = problem.solve_path(config.experiment().parameter_grid(d.delta).alphas(),
                                           config.solver());
      art.write("path.csv", [&](std::ostream& os) { write_path_csv(os, path, d.x_dag); });
      for (const auto& r : path) {
        if (!r.failure.empty()) {
          failed = true;
          err << "solver failure at alpha = " << r.alpha << ": " << r.failure << '\n';
        }
      }
    }
    art.finish(out);
    return failed ? exit_run_failure : exit_ok;
  });
}

int command_select(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    if (!config.rule.id) throw ConfigError("rule.id", "required for select");
    if (*config.rule.id == RuleId::oracle && !config.x_dag) {
      throw ConfigError("x_dag", "the oracle rule needs the exact solution");
    }
    const Data d = prepare_data(config);
    require_grid(config, d.delta);
    const TikhonovProblem problem(d.op, d.y_delta, GridFunction(d.y_delta.grid(), 0.0));
    const auto runs = problem.solve_path(config.experiment().parameter_grid(d.delta).alphas(),
                                         config.solver());
    const ReconstructionPath path(runs);
    const auto sel = apply_rule(config, path, d.delta, d.x_dag);
    const auto& chosen = runs[sel.index];

    Artifacts art(config, "select");
    art.seed(d.seed);
    art.write("selection.json", [&](std::ostream& os) { os << to_json(sel).dump(2) << '\n'; });
    const GridFunction* xd = d.x_dag ? &*d.x_dag : nullptr;
    art.write("reconstruction.csv",
              [&](std::ostream& os) { write_reconstruction_csv(os, chosen.x, xd); });
    art.results() = reconstruction_summary(chosen, d.x_dag);
    art.results()["rule"] = sel.rule;
    art.results()["index"] = sel.index;
    art.finish(out);
    if (!chosen.failure.empty()) {
      err << "selected reconstruction failed: " << chosen.failure << '\n';
      return exit_run_failure;
    }
    return exit_ok;
  });
}

int command_reproduce(const std::string& target, const RunConfig& config, std::ostream& out,
                      std::ostream& err) {
  return guarded(err, [&] {
    if (target != "table1" && target != "figure1" && target != "figure2" && target != "figure3") {
      throw ConfigError("target", "must be table1, figure1, figure2 or figure3");
    }
    config.validate();
    const ExperimentConfig ex = config.experiment();
    Artifacts art(config, target);
    if (target == "table1" || target == "figure1") {
      const std::vector<double> c_bp = target == "table1"
                                           ? std::vector<double>{0.02, 0.05, 0.1}
                                           : std::vector<double>{config.rule.c_bp.value_or(0.1)};
      const auto table = run_table1(c_bp, config.noise.deltas, config.noise.repetitions, ex);
      for (const auto& cell : table.cells) {
        if (cell.c_bp == c_bp.front()) art.seed(cell.seed);
        if (!cell.ok) err << "cell delta = " << cell.delta << " failed: " << cell.failure << '\n';
      }
      json rows = json::array();
      for (const auto& r : table.rows) {
        rows.push_back({{"c_bp", r.c_bp},
                        {"c_x", r.error_fit.c},
                        {"kappa_x", r.error_fit.kappa},
                        {"c_alpha", r.alpha_fit.c},
                        {"kappa_alpha", r.alpha_fit.kappa}});
      }
      art.results() = rows;
      if (target == "table1") {
        art.write("table1.csv", [&](std::ostream& os) { write_table1_csv(os, table); });
        art.write("table1_cells.csv", [&](std::ostream& os) { write_table1_cells_csv(os, table); });
      } else {
        const auto& row = table.rows.front();
        art.write("figure1.csv", [&](std::ostream& os) {
          os << "delta,alpha,error,alpha_fit,error_fit\n";
          for (const auto& cell : table.cells) {
            if (!cell.ok) continue;
            os << num(cell.delta) << ',' << num(cell.alpha) << ',' << num(cell.error) << ','
               << num(row.alpha_fit.c * std::pow(cell.delta, row.alpha_fit.kappa)) << ','
               << num(row.error_fit.c * std::pow(cell.delta, row.error_fit.kappa)) << '\n';
          }
        });
      }
    } else if (target == "figure2") {
      const double delta = config.noise.deltas.front();
      art.seed(cell_seed(config.noise.seed, 0, 0));
      const auto report = run_rule_comparison(delta, default_rule_set(), ex);
      json markers = json::array();
      for (const auto& m : report.markers) {
        markers.push_back({{"rule", m.rule}, {"ok", m.ok}, {"alpha", m.alpha}, {"error", m.error}});
        if (!m.ok) err << m.rule << ": " << m.failure << '\n';
      }
      art.results() = {{"delta", delta}, {"markers", markers}};
      art.write("figure2_curves.csv", [&](std::ostream& os) { write_rule_curves_csv(os, report); });
      art.write("figure2_markers.csv", [&](std::ostream& os) { write_rule_markers_csv(os, report); });
    } else {
      const double delta = config.noise.deltas.front();
      art.seed(cell_seed(config.noise.seed, 0, 0));
      const auto entries = run_oversmoothing_contrast(delta, default_contrast_alphas(), ex);
      for (const auto& e : entries) {
        if (!e.reconstruction.failure.empty()) {
          err << to_string(e.solution) << " alpha = " << e.alpha << ": "
              << e.reconstruction.failure << '\n';
        }
        art.write("figure3_" + to_string(e.solution) + "_alpha_" + short_num(e.alpha) + ".csv",
                  [&](std::ostream& os) {
                    write_reconstruction_csv(os, e.reconstruction.x, &e.x_dag);
                  });
      }
      art.write("figure3_summary.csv",
                [&](std::ostream& os) { write_contrast_summary_csv(os, entries); });
      art.results() = {{"delta", delta}};
    }
    art.finish(out);
    return exit_ok;
  });
}

}  // namespace oversmooth
