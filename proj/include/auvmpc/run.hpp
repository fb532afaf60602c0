#pragma once

// Batch entry points behind the command-line tool.

#include "auvmpc/artifacts.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

namespace auvmpc {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitFlagged = 2 };

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<PlanResult> results;
  std::optional<BaselineResult> baseline;
  std::vector<std::filesystem::path> files;  // every artifact written, in order
};

/// Plans the mission and writes the requested artifacts under
/// config.output.dir; with output.compare also runs the baseline on the
/// first horizon. Throws on invalid scenarios and I/O failures.
RunOutcome run(const RunConfig& config, std::ostream& log);

/// Writes the configured terrain to <output.dir>/terrain.txt.
std::filesystem::path write_terrain(const RunConfig& config);

struct RecheckOutcome {
  int exit_code = kExitOk;
  std::vector<ValidationReport> reports;  // per horizon
};

/// Re-validates a trajectory CSV against the config's scenario. Graph
/// checks run when graphs.txt sits next to the CSV.
RecheckOutcome recheck(const std::filesystem::path& trajectory_csv, const RunConfig& config, std::ostream& log);

}  // namespace auvmpc
