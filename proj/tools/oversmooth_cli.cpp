#include <CLI11.hpp>
#include <iostream>

#include "oversmooth/commands.hpp"
#include "oversmooth/errors.hpp"

using namespace oversmooth;

int main(int argc, char** argv) {
  CLI::App app{"Tikhonov regularization with oversmoothing penalties"};
  app.set_version_flag("--version", version_string);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> jobs;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "base seed of the noise generator");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "reconstruct at one alpha or along the grid");
  auto* select = app.add_subcommand("select", "choose alpha with the configured rule");
  auto* reproduce = app.add_subcommand("reproduce", "rerun a case study with defaults");
  std::string target;
  reproduce->add_option("target", target, "table1, figure1, figure2 or figure3")
      ->required()
      ->check(CLI::IsMember({"table1", "figure1", "figure2", "figure3"}));
  for (auto* sub : {solve, select, reproduce}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? exit_ok : exit_config_error;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config_error;
  }
  if (seed) config.noise.seed = *seed;
  if (out_dir) config.output_dir = *out_dir;
  if (jobs) config.jobs = *jobs;

  if (solve->parsed()) return command_solve(config, std::cout, std::cerr);
  if (select->parsed()) return command_select(config, std::cout, std::cerr);
  return command_reproduce(target, config, std::cout, std::cerr);
}
