#pragma once

#include <filesystem>
#include <ostream>
#include <string>

namespace grating {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitInvalid = 3;

// Writes <prefix>_efficiencies.csv, <prefix>_result.json and
// <prefix>_residuals.csv into the configured output directory.
int cmd_solve(const std::filesystem::path &config, std::ostream &log);

// Parameter is "k" or "theta" (degrees). Anomalous points are skipped with a
// warning. Writes <prefix>_sweep.csv sorted by the parameter.
int cmd_sweep(const std::filesystem::path &config, const std::string &parameter, double from,
              double to, int steps, std::ostream &log);

// Writes <prefix>_diagnosis.json.
int cmd_diagnose(const std::filesystem::path &config, std::ostream &log);

// level is "quick" or "full".
int cmd_validate(const std::string &level, std::ostream &log);

// Worker count for sweeps: GRATING_THREADS if set and positive, else the
// hardware concurrency (at least 1).
unsigned sweep_threads();

} // namespace grating
