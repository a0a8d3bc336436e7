#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oversmooth/commands.hpp"
#include "oversmooth/errors.hpp"
#include "oversmooth/run_config.hpp"

using namespace oversmooth;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("oversmooth_test_" + name);
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_run(const std::string& name) {
  RunConfig c;
  c.n = 200;
  c.alpha0 = 1e-9;
  c.count = 20;
  c.q = 2.0;
  c.x_dag = ExactSolution::constant_one;
  c.noise.deltas = {0.0179};
  c.output_dir = scratch(name).string();
  return c;
}

std::string config_field_error(const nlohmann::json& j) {
  try {
    config_from_json(j).validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("config round trip through json") {
  RunConfig c = small_run("roundtrip");
  c.rule.id = RuleId::balancing_third;
  c.rule.c_bp = 0.05;
  c.method = SolverMethod::lbfgs;
  c.data_file = "data.csv";
  c.alpha = 1e-4;
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(to_json(RunConfig{})) == RunConfig{});
  CHECK(config_from_json(nlohmann::json::object()) == RunConfig{});
}

TEST_CASE("config errors name the field") {
  CHECK(config_field_error({{"grid", {{"q", 0.5}}}}) == "grid.q");
  CHECK(config_field_error({{"grid", {{"qq", 2.0}}}}) == "grid.qq");
  CHECK(config_field_error({{"rule", {{"id", "lepskii"}}}}) == "rule.id");
  CHECK(config_field_error({{"n", "many"}}) == "n");
  CHECK(config_field_error({{"noise", {{"deltas", nlohmann::json::array()}}}}) == "noise.deltas");
  CHECK(config_field_error({{"rule", {{"beta", 1.1}}}}) == "rule.beta");
  CHECK(config_field_error({{"solver", {{"line_search", {{"shrink", 2.0}}}}}}) ==
        "solver.line_search.shrink");
  CHECK(config_field_error({{"unknown", 1}}) == "unknown");
  CHECK(config_field_error({{"x_dag", "parabola"}}).empty());
}

TEST_CASE("load_config accepts comments") {
  const auto dir = scratch("load");
  fs::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << "{\n  // fine grid\n  \"n\": 300\n}\n";
  CHECK(load_config(path.string()).n == 300);
  std::ofstream(path) << "{ \"n\": 300,, }";
  CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}

TEST_CASE("solve without noise recovers the constant away from t = 1") {
  RunConfig c = small_run("solve");
  c.n = 1000;
  c.noise.deltas = {0.0};
  c.alpha = 1e-4;
  std::ostringstream out, err;
  REQUIRE(command_solve(c, out, err) == exit_ok);
  std::istringstream csv(read_text(fs::path(c.output_dir) / "reconstruction.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,x,x_dag");
  double worst = 0.0;
  while (std::getline(csv, line)) {
    double t, x, xd;
    char comma;
    std::istringstream row(line);
    row >> t >> comma >> x >> comma >> xd;
    if (t < 0.9) worst = std::max(worst, std::abs(x - xd));
  }
  CHECK(worst < 0.2);

  // The manifest carries the configuration it was run with.
  const auto manifest = read_json(fs::path(c.output_dir) / "solve_manifest.json");
  CHECK(config_from_json(manifest.at("config")) == c);
  CHECK(out.str().find("reconstruction.csv") != std::string::npos);
}

TEST_CASE("solve along the grid") {
  RunConfig c = small_run("path");
  std::ostringstream out, err;
  REQUIRE(command_solve(c, out, err) == exit_ok);
  const auto text = read_text(fs::path(c.output_dir) / "path.csv");
  CHECK(text.rfind("alpha,residual,penalty,functional,error,iterations,converged,failure\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 21);
}

TEST_CASE("exit codes") {
  std::ostringstream out, err;
  RunConfig missing = small_run("missing");
  missing.x_dag.reset();
  CHECK(command_solve(missing, out, err) == exit_config_error);
  CHECK(err.str().find("x_dag") != std::string::npos);

  RunConfig oracle = small_run("oracle");
  oracle.x_dag.reset();
  oracle.data_file = "nowhere.csv";
  oracle.rule.id = RuleId::oracle;
  CHECK(command_select(oracle, out, err) == exit_config_error);

  RunConfig dp = small_run("dp");
  dp.rule.id = RuleId::discrepancy;
  dp.rule.c_dp = 1e-6;
  err.str("");
  CHECK(command_select(dp, out, err) == exit_run_failure);
  CHECK(err.str().find("residual target unreachable") != std::string::npos);

  CHECK(command_reproduce("figure9", small_run("bad"), out, err) == exit_config_error);
}

TEST_CASE("select writes a trace") {
  RunConfig c = small_run("select");
  c.rule.id = RuleId::balancing_first;
  c.rule.c_bp = 0.1;
  std::ostringstream out, err;
  REQUIRE(command_select(c, out, err) == exit_ok);
  const auto sel = read_json(fs::path(c.output_dir) / "selection.json");
  const auto& trace = sel.at("trace");
  REQUIRE(!trace.empty());
  for (std::size_t k = 1; k < trace.size(); ++k) {
    CHECK(trace[k].at("j").get<std::size_t>() > trace[k - 1].at("j").get<std::size_t>());
  }
  CHECK(fs::exists(fs::path(c.output_dir) / "reconstruction.csv"));
}

TEST_CASE("data file replaces synthesized data") {
  const auto dir = scratch("datafile");
  fs::create_directories(dir);
  const Grid grid(200);
  const auto y = forward(GridFunction(grid, 1.0));
  {
    std::ofstream os(dir / "y.csv");
    os << "t,y\n";
    os.precision(17);
    for (std::size_t i = 0; i < grid.size(); ++i) os << grid.node(i) << ',' << y[i] << '\n';
  }
  CHECK(read_data_csv((dir / "y.csv").string(), grid) == y);
  CHECK_THROWS_AS(read_data_csv((dir / "y.csv").string(), Grid(100)), Error);
}

TEST_CASE("reproduce writes the documented files") {
  RunConfig c = small_run("figure2");
  std::ostringstream out, err;
  REQUIRE(command_reproduce("figure2", c, out, err) == exit_ok);
  const auto markers = read_text(fs::path(c.output_dir) / "figure2_markers.csv");
  CHECK(std::count(markers.begin(), markers.end(), '\n') == 7);

  RunConfig f3 = small_run("figure3");
  REQUIRE(command_reproduce("figure3", f3, out, err) == exit_ok);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(f3.output_dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("figure3_", 0) == 0 && name.find("_alpha_") != std::string::npos) ++files;
  }
  CHECK(files == 8);

  RunConfig t1 = small_run("table1");
  t1.noise.deltas = {0.04, 0.02, 0.01, 0.005};
  REQUIRE(command_reproduce("table1", t1, out, err) == exit_ok);
  const auto table = read_text(fs::path(t1.output_dir) / "table1.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
}

#ifdef OVERSMOOTH_CLI
TEST_CASE("executable exit statuses") {
  const std::string exe = OVERSMOOTH_CLI;
  const auto dir = scratch("exe");
  fs::create_directories(dir);
  const auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(status(exe + " --version") == 0);
  CHECK(status(exe + " frobnicate") == 1);
  CHECK(status(exe + " reproduce figure9") == 1);
  std::ofstream(dir / "bad.json") << "{\"grid\": {\"q\": 0.5}}";
  CHECK(status(exe + " --config " + (dir / "bad.json").string() + " solve") == 1);
  std::ofstream(dir / "dp.json")
      << "{\"n\": 100, \"x_dag\": \"constant_one\", \"noise\": {\"deltas\": [0.01]},"
         " \"grid\": {\"alpha0\": 1e-6, \"count\": 5, \"q\": 2},"
         " \"rule\": {\"id\": \"discrepancy\", \"c_dp\": 1e-9}}";
  CHECK(status(exe + " --config " + (dir / "dp.json").string() + " --out " + dir.string() + " select") == 2);
}
#endif
