#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gebsde {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> grid_h;
    std::optional<double> tol;
    bool quiet = false;
};

/// Exit codes: 0 pass, 1 config error, 2 numerical failure, 3 acceptance failure.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitNumericalError = 2,
    kExitAcceptanceFailure = 3,
};

/// Executes one subcommand pipeline against a config file, writes report.txt
/// and the stage CSVs into the output directory, and returns the exit code.
int run_subcommand(const std::string& subcommand, const std::string& config_path,
                   const CliOverrides& overrides);

std::vector<std::string> known_subcommands();

}  // namespace gebsde
