#pragma once

// Three-step receding-horizon planner: floor-aware P2 solve, per-step graph
// selection, ring-constrained P5 solve with line-of-sight repair.

#include "auvmpc/mpc.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace auvmpc {

struct Scenario {
  int n_auv = 5;
  int steps = 20;
  double dt = 100.0;
  std::shared_ptr<const SeafloorMap> map;
  std::vector<VehicleParams> params{VehicleParams{}};  // one per AUV, or one shared
  PlanWeights weights;
  Eigen::Vector2d usv_start = Eigen::Vector2d::Zero();
  std::vector<LinearState> auv_start;  // empty: sampled from `seed`
  std::uint64_t seed = 1;
  double los_resolution = 10.0;
  double repair_step = 10.0;  // range shrink per repair round, m
  int max_repair_rounds = 15;
  int max_a2a_ring_start = 5;  // latest step the A2A rings may be deferred to, capped at K
  double start_depth_margin = 1.0;  // sampled starts sit this far below the surface bound
  AssemblyOptions assembly;
  FloorIterationOptions floor;

  void validate() const;
  /// Initial stacked state from usv_start and auv_start.
  [[nodiscard]] Eigen::VectorXd initial_state() const;
};

struct StageTimings {
  double step1 = 0.0;  // s, floor-profile iteration
  double step2_a2u = 0.0;
  double step2_a2a = 0.0;
  double step3 = 0.0;  // including repair rounds
  [[nodiscard]] double total() const { return step1 + step2_a2u + step2_a2a + step3; }
};

struct PlanResult {
  int horizon = 0;  // 1-based position in a mission
  Trajectory trajectory;
  Trajectory step1_trajectory;
  GraphSchedule graphs;
  ObjectiveRecord objectives;
  ObjectiveRecord step1_objectives;
  ValidationReport validation;
  StageTimings timings;
  int floor_iterations = 0;
  int step3_floor_iterations = 0;
  int repair_rounds = 0;
  int repaired_edges = 0;
  int a2a_ring_start = 2;  // first step with A2A ring rows in the final Step 3 solve
  bool step3_flagged = false;  // repair gave up
  bool step3_solved = false;
  bool fallback_to_step1 = false;
  bool flagged = false;
  std::vector<std::string> warnings;

  [[nodiscard]] bool success() const { return !flagged && validation.all_pass(); }
};

class PlanningError : public std::runtime_error {
 public:
  PlanningError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Copy of the scenario with sampled AUV starts filled in, validated.
Scenario resolve_starts(const Scenario& scenario);

/// Plans one horizon from the scenario's initial state.
PlanResult plan_horizon(const Scenario& scenario);

/// Plans one horizon from an explicit stacked initial state.
PlanResult plan_horizon(const Scenario& scenario, const Eigen::VectorXd& x0);

struct MissionOptions {
  int horizons = 1;
  bool continue_on_flag = false;
};

/// Chains horizons: each starts from the previous final state. When the
/// scenario has no AUV starts they are sampled from its seed.
std::vector<PlanResult> plan_mission(const Scenario& scenario, const MissionOptions& opt);

/// Uniform samples in the solid lower half-ball of radius d_s under the
/// USV. With a map, samples must clear floor + clearance (plus `floor_margin`)
/// and lie inside the map; every sample satisfies z < -min_depth.
std::vector<Eigen::Vector3d> sample_initial_positions(const Eigen::Vector2d& usv_position, double d_s, int n,
                                                      std::uint64_t seed, const SeafloorMap* map = nullptr,
                                                      double min_depth = 0.0, double floor_margin = 0.0);

/// Horizontal velocity signs used to orient the heading band, from a
/// solve without the band when the AUVs start at rest.
std::vector<Eigen::Vector2d> heading_reference(const ProblemContext& ctx);

}  // namespace auvmpc
