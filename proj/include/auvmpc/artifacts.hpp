#pragma once

// File artifacts of a run: trajectory CSV, graph export, plan report,
// timings and plot files. Text output is deterministic; wall-clock numbers
// only appear in the timings and comparison files.

#include "auvmpc/baseline.hpp"
#include "auvmpc/config.hpp"
#include "auvmpc/planner.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace auvmpc {

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

inline constexpr const char* kTrajectoryHeader = "horizon,k,body_id,x,y,z,Vx,Vy,Vz,Ux,Uy,Uz,psi,vsurge";

/// Rows for one horizon. Body 0 is the USV (z, Vz, Uz blank; its velocity
/// is the applied input), AUV n is body n + 1. Inputs are blank at k = K.
void append_trajectory_rows(std::string& out, const Trajectory& traj, int horizon);

/// Header plus the rows of every horizon in order.
std::string trajectory_csv(const std::vector<Trajectory>& horizons);

struct LoadedHorizon {
  int horizon = 0;
  Trajectory trajectory;
};

std::vector<LoadedHorizon> read_trajectory_csv(std::istream& in);
std::vector<LoadedHorizon> load_trajectory_csv(const std::filesystem::path& path);

/// Graphs of one horizon with everything validation needs to re-check rings.
struct HorizonGraphs {
  int horizon = 0;
  int a2u_ring_start = 1;
  int a2a_ring_start = 2;
  GraphSchedule schedule;
};

/// Per k, "k; a2u=n; a2a=(i,j),(i,j),..." with 1-based AUV numbers, then
/// "k; range (i,j)=r" for every repaired edge (i = 0 for the USV).
std::string graph_lines(const GraphSchedule& graphs);

/// Graph lines of every horizon under "horizon h" and "ring_start" headers.
std::string graph_file(const std::vector<PlanResult>& results, int a2u_ring_start);
std::vector<HorizonGraphs> read_graph_file(std::istream& in, int n_auv);

std::string validation_table(const ValidationReport& report);

/// Config echo, per-horizon status, objective record, validation table,
/// graph lines and trajectory CSV. No timings.
std::string plan_report(const RunConfig& config, const std::vector<PlanResult>& results);

/// Per-stage wall-clock seconds of every horizon.
std::string timings_text(const std::vector<PlanResult>& results);

/// Planner vs baseline objective table and timings.
std::string comparison_report(const PlanResult& planner, const BaselineResult& baseline);

/// Top-down (x-y) and profile (x-z) views as SVG plus the plotted data as
/// CSV. Returns the written files; no files for an empty mission.
std::vector<std::filesystem::path> emit_plot_files(const std::vector<PlanResult>& results, const SeafloorMap& map,
                                                   const std::filesystem::path& dir);

/// The k values whose graphs are drawn: 1, K/2 and K (deduplicated).
std::vector<int> plotted_steps(int steps);

}  // namespace auvmpc
