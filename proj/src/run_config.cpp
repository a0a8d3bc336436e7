#include "oversmooth/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "oversmooth/errors.hpp"

namespace oversmooth {

using nlohmann::json;

namespace {

const char* const rule_names[] = {"balancing_first", "balancing_standard", "balancing_third",
                                  "discrepancy",     "quasi_optimality",   "oracle"};

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const json& obj, const std::string& prefix, std::set<std::string> known) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) throw ConfigError(join(prefix, key), "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& prefix, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& obj, const std::string& key, const std::string& prefix,
                     std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(prefix, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::size_t count_field(const json& obj, const std::string& key, const std::string& prefix,
                        std::size_t fallback) {
  const auto v = integer(obj, key, prefix, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError(join(prefix, key), "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::string text(const json& obj, const std::string& key, const std::string& prefix,
                 const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "expected a string");
  return v.get<std::string>();
}

template <class F>
auto parse_enum(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

std::string method_name(SolverMethod m) {
  return m == SolverMethod::gauss_newton ? "gauss_newton" : "lbfgs";
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be a positive finite number");
}

}  // namespace

std::string to_string(RuleId id) { return rule_names[static_cast<int>(id)]; }

RuleId rule_id_from_string(const std::string& s) {
  for (int i = 0; i < 6; ++i) {
    if (s == rule_names[i]) return static_cast<RuleId>(i);
  }
  throw Error("unknown rule '" + s + "'");
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.method = method;
  s.max_iterations = max_iterations;
  s.gradient_tolerance = gradient_tolerance;
  s.step_tolerance = step_tolerance;
  s.lbfgs_memory = lbfgs_memory;
  s.line_search = line_search;
  return s;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.problem = problem;
  e.n = n;
  e.a = a;
  e.solution = x_dag.value_or(ExactSolution::constant_one);
  e.alpha0 = alpha0;
  e.count = count;
  e.q = q;
  e.c_e = c_e;
  e.alpha_max = alpha_max;
  e.seed = noise.seed;
  e.jobs = jobs;
  e.solver = solver();
  return e;
}

void RunConfig::validate() const {
  if (problem != "exp_growth" && problem != "linear_surrogate") {
    throw ConfigError("problem", "must be exp_growth or linear_surrogate");
  }
  if (n < 10) throw ConfigError("n", "need at least 10 intervals");
  positive(a, "a");
  if (!(q > 1.0) || !std::isfinite(q)) throw ConfigError("grid.q", "must exceed 1");
  if (alpha0) {
    positive(*alpha0, "grid.alpha0");
    if (count < 2) throw ConfigError("grid.count", "need at least 2 grid points with alpha0");
    if (!std::isfinite(*alpha0 * std::pow(q, static_cast<double>(count - 1)))) {
      throw ConfigError("grid.count", "largest alpha overflows");
    }
  } else {
    positive(c_e, "grid.c_e");
    positive(alpha_max, "grid.alpha_max");
  }
  if (alpha) positive(*alpha, "alpha");
  if (noise.deltas.empty()) throw ConfigError("noise.deltas", "must not be empty");
  for (double d : noise.deltas) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("noise.deltas", "must be >= 0");
  }
  if (noise.repetitions < 1) throw ConfigError("noise.repetitions", "must be at least 1");
  if (rule.c_bp) positive(*rule.c_bp, "rule.c_bp");
  positive(rule.c_dp, "rule.c_dp");
  if (!(rule.gamma > 0.0 && rule.gamma <= 1.0)) throw ConfigError("rule.gamma", "must be in (0, 1]");
  if (!rule.c_bp) {
    const double b = a / (2.0 * a + 2.0);
    if (!(rule.beta > beta_min(q, b))) {
      throw ConfigError("rule.beta", "must exceed 1 + q^(-b) = " + std::to_string(beta_min(q, b)));
    }
  }
  if (max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
  positive(gradient_tolerance, "solver.gradient_tolerance");
  positive(step_tolerance, "solver.step_tolerance");
  if (lbfgs_memory < 1) throw ConfigError("solver.lbfgs_memory", "must be at least 1");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw ConfigError("solver.line_search.shrink", "must be in (0, 1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw ConfigError("solver.line_search.sufficient_decrease", "must be in (0, 1)");
  }
  if (line_search.max_steps < 1) throw ConfigError("solver.line_search.max_steps", "must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
  if (jobs < 1) throw ConfigError("jobs", "must be at least 1");
}

bool operator==(const RunConfig& x, const RunConfig& y) {
  const auto ls = [](const LineSearch& l) {
    return std::tuple(l.shrink, l.sufficient_decrease, l.max_steps);
  };
  return x.problem == y.problem && x.n == y.n && x.a == y.a && x.alpha0 == y.alpha0 &&
         x.count == y.count && x.q == y.q && x.c_e == y.c_e && x.alpha_max == y.alpha_max && x.alpha == y.alpha && x.x_dag == y.x_dag &&
         x.data_file == y.data_file && x.rule == y.rule && x.noise == y.noise &&
         x.method == y.method && x.max_iterations == y.max_iterations &&
         x.gradient_tolerance == y.gradient_tolerance && x.step_tolerance == y.step_tolerance && x.lbfgs_memory == y.lbfgs_memory &&
         ls(x.line_search) == ls(y.line_search) && x.output_dir == y.output_dir &&
         x.jobs == y.jobs;
}

json to_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["n"] = c.n;
  j["a"] = c.a;
  j["grid"] = {{"q", c.q}, {"c_e", c.c_e}, {"alpha_max", c.alpha_max}};
  if (c.alpha0) {
    j["grid"]["alpha0"] = *c.alpha0;
    j["grid"]["count"] = c.count;
  }
  if (c.alpha) j["alpha"] = *c.alpha;
  if (c.x_dag) j["x_dag"] = to_string(*c.x_dag);
  if (c.data_file) j["data_file"] = *c.data_file;
  json rule = {{"c_dp", c.rule.c_dp}, {"beta", c.rule.beta}, {"gamma", c.rule.gamma}};
  if (c.rule.id) rule["id"] = to_string(*c.rule.id);
  if (c.rule.c_bp) rule["c_bp"] = *c.rule.c_bp;
  j["rule"] = rule;
  j["noise"] = {{"deltas", c.noise.deltas},
                {"seed", c.noise.seed},
                {"repetitions", c.noise.repetitions}};
  j["solver"] = {{"method", method_name(c.method)},
                 {"max_iterations", c.max_iterations},
                 {"gradient_tolerance", c.gradient_tolerance},
                 {"step_tolerance", c.step_tolerance},
                 {"lbfgs_memory", c.lbfgs_memory},
                 {"line_search",
                  {{"shrink", c.line_search.shrink},
                   {"sufficient_decrease", c.line_search.sufficient_decrease},
                   {"max_steps", c.line_search.max_steps}}}};
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, "", {"problem", "n", "a", "grid", "alpha", "x_dag", "data_file", "rule",
                         "noise", "solver", "output_dir", "jobs"});
  c.problem = text(j, "problem", "", c.problem);
  c.n = count_field(j, "n", "", c.n);
  c.a = number(j, "a", "", c.a);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, "grid", {"alpha0", "count", "q", "c_e", "alpha_max"});
    if (g.contains("alpha0")) c.alpha0 = number(g, "alpha0", "grid", 0.0);
    c.count = count_field(g, "count", "grid", c.count);
    c.q = number(g, "q", "grid", c.q);
    c.c_e = number(g, "c_e", "grid", c.c_e);
    c.alpha_max = number(g, "alpha_max", "grid", c.alpha_max);
  }
  if (j.contains("alpha")) c.alpha = number(j, "alpha", "", 0.0);
  if (j.contains("x_dag")) {
    const auto name = text(j, "x_dag", "", "");
    c.x_dag = parse_enum("x_dag", [&] { return exact_solution_from_string(name); });
  }
  if (j.contains("data_file")) c.data_file = text(j, "data_file", "", "");
  if (j.contains("rule")) {
    const auto& r = j.at("rule");
    reject_unknown(r, "rule", {"id", "c_bp", "c_dp", "beta", "gamma"});
    if (r.contains("id")) {
      const auto name = text(r, "id", "rule", "");
      c.rule.id = parse_enum("rule.id", [&] { return rule_id_from_string(name); });
    }
    if (r.contains("c_bp")) c.rule.c_bp = number(r, "c_bp", "rule", 0.0);
    c.rule.c_dp = number(r, "c_dp", "rule", c.rule.c_dp);
    c.rule.beta = number(r, "beta", "rule", c.rule.beta);
    c.rule.gamma = number(r, "gamma", "rule", c.rule.gamma);
  }
  if (j.contains("noise")) {
    const auto& nz = j.at("noise");
    reject_unknown(nz, "noise", {"deltas", "seed", "repetitions"});
    if (nz.contains("deltas")) {
      const auto& d = nz.at("deltas");
      if (!d.is_array()) throw ConfigError("noise.deltas", "expected an array of numbers");
      c.noise.deltas.clear();
      for (const auto& v : d) {
        if (!v.is_number()) throw ConfigError("noise.deltas", "expected an array of numbers");
        c.noise.deltas.push_back(v.get<double>());
      }
    }
    if (nz.contains("seed")) {
      if (!nz.at("seed").is_number_unsigned()) {
        throw ConfigError("noise.seed", "expected a non-negative integer");
      }
      c.noise.seed = nz.at("seed").get<std::uint64_t>();
    }
    c.noise.repetitions = count_field(nz, "repetitions", "noise", c.noise.repetitions);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    reject_unknown(s, "solver",
                   {"method", "max_iterations", "gradient_tolerance", "step_tolerance", "lbfgs_memory",
                    "line_search"});
    const auto m = text(s, "method", "solver", method_name(c.method));
    if (m == "gauss_newton") {
      c.method = SolverMethod::gauss_newton;
    } else if (m == "lbfgs") {
      c.method = SolverMethod::lbfgs;
    } else {
      throw ConfigError("solver.method", "must be gauss_newton or lbfgs");
    }
    c.max_iterations = static_cast<int>(integer(s, "max_iterations", "solver", c.max_iterations));
    c.gradient_tolerance = number(s, "gradient_tolerance", "solver", c.gradient_tolerance);
    c.step_tolerance = number(s, "step_tolerance", "solver", c.step_tolerance);
    c.lbfgs_memory = static_cast<int>(integer(s, "lbfgs_memory", "solver", c.lbfgs_memory));
    if (s.contains("line_search")) {
      const auto& l = s.at("line_search");
      const std::string p = "solver.line_search";
      reject_unknown(l, p, {"shrink", "sufficient_decrease", "max_steps"});
      c.line_search.shrink = number(l, "shrink", p, c.line_search.shrink);
      c.line_search.sufficient_decrease =
          number(l, "sufficient_decrease", p, c.line_search.sufficient_decrease);
      c.line_search.max_steps = static_cast<int>(integer(l, "max_steps", p, c.line_search.max_steps));
    }
  }
  c.output_dir = text(j, "output_dir", "", c.output_dir);
  c.jobs = count_field(j, "jobs", "", c.jobs);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace oversmooth
