#pragma once

// Subcommands of the `oversmooth` executable. Each returns the process exit
// status: 0 success, 1 invalid configuration, 2 solver or selection failure.
// `out` receives only the paths of written artifacts, `err` everything else.

#include <iosfwd>
#include <string>

#include "oversmooth/run_config.hpp"

namespace oversmooth {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_run_failure = 2;

inline constexpr const char* version_string = "0.1.0";

int command_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int command_select(const RunConfig& config, std::ostream& out, std::ostream& err);
/// target is one of table1, figure1, figure2, figure3.
int command_reproduce(const std::string& target, const RunConfig& config, std::ostream& out,
                      std::ostream& err);

/// Reads a two-column CSV (t,y) whose nodes must match the grid.
GridFunction read_data_csv(const std::string& path, const Grid& grid);

}  // namespace oversmooth
