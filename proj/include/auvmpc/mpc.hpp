#pragma once

// Condensed receding-horizon model of the USV + N AUV pack, the convex
// subproblems built on it, and the objective/constraint evaluators.

#include "auvmpc/consensus_graphs.hpp"
#include "auvmpc/qp_engine.hpp"
#include "auvmpc/terrain.hpp"
#include "auvmpc/vehicle_models.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace auvmpc {

/// Block matrices of the stacked model. The state is
/// X = [P_usv (2), X_1 (6), ..., X_N (6)] with X_n = [P_n, V_n] and the input
/// u = [U_usv (2), U_1 (3), ..., U_N (3)].
struct StackedSystem {
  int n_auv = 0;
  int steps = 0;
  double dt = 0.0;
  std::vector<VehicleParams> params;

  Eigen::MatrixXd a;                     // nx x nx
  Eigen::MatrixXd b;                     // nx x nu
  Eigen::MatrixXd a_powers;              // K nx x nx, block k-1 = A^k
  std::vector<Eigen::MatrixXd> b_steps;  // b_steps[k] = [A^k B, ..., A B, B], nx x (k+1) nu
  Eigen::MatrixXd b_full;                // K nx x K nu, lower block triangular

  Eigen::RowVectorXd depth_sum;               // sum of AUV depths, 1 x nx
  std::vector<Eigen::RowVectorXd> depth;      // per AUV, 1 x nx
  Eigen::MatrixXd position_sum;               // 3 x nx
  std::vector<Eigen::MatrixXd> position;      // per AUV, 3 x nx
  Eigen::MatrixXd usv_position;               // 3 x nx, third row zero
  Eigen::MatrixXd velocity_sum;               // 3 x nx
  std::vector<Eigen::MatrixXd> velocity;      // per AUV, 3 x nx

  [[nodiscard]] Eigen::Index nx() const { return 2 + 6 * Eigen::Index(n_auv); }
  [[nodiscard]] Eigen::Index nu() const { return 2 + 3 * Eigen::Index(n_auv); }
  [[nodiscard]] static Eigen::Index auv_state(int n) { return 2 + 6 * Eigen::Index(n); }
  [[nodiscard]] static Eigen::Index auv_input(int n) { return 2 + 3 * Eigen::Index(n); }
};

StackedSystem build_stacked(int n_auv, const std::vector<VehicleParams>& params, double dt, int steps);

/// States X[0..K] and inputs u[0..K-1].
struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> inputs;

  [[nodiscard]] int steps() const { return static_cast<int>(inputs.size()); }
  [[nodiscard]] int n_auv() const { return states.empty() ? 0 : static_cast<int>((states[0].size() - 2) / 6); }
  [[nodiscard]] Eigen::Vector2d usv(int k) const { return states[std::size_t(k)].head<2>(); }
  [[nodiscard]] Eigen::Vector3d usv3(int k) const { return {states[std::size_t(k)](0), states[std::size_t(k)](1), 0.0}; }
  [[nodiscard]] Eigen::Vector3d position(int n, int k) const {
    return states[std::size_t(k)].segment<3>(StackedSystem::auv_state(n));
  }
  [[nodiscard]] Eigen::Vector3d velocity(int n, int k) const {
    return states[std::size_t(k)].segment<3>(StackedSystem::auv_state(n) + 3);
  }
  [[nodiscard]] Eigen::Vector2d usv_input(int k) const { return inputs[std::size_t(k)].head<2>(); }
  [[nodiscard]] Eigen::Vector3d auv_input(int n, int k) const {
    return inputs[std::size_t(k)].segment<3>(StackedSystem::auv_input(n));
  }
  [[nodiscard]] std::vector<Eigen::Vector3d> positions(int k) const;
  [[nodiscard]] Eigen::VectorXd stacked_inputs() const;
};

/// Closed-form stacked evaluation X[1:K] = A_stack X[0] + B_full U.
Trajectory rollout(const StackedSystem& sys, const Eigen::VectorXd& x0, const std::vector<Eigen::VectorXd>& inputs);
Trajectory rollout(const StackedSystem& sys, const Eigen::VectorXd& x0, const Eigen::VectorXd& stacked_inputs);

/// Reference evaluation by repeated single steps.
Trajectory rollout_iterative(const StackedSystem& sys, const Eigen::VectorXd& x0,
                             const std::vector<Eigen::VectorXd>& inputs);

struct PlanWeights {
  double w1 = 1e-2;  // input energy
  double w2 = 1e-3;  // depth
  double w3 = 0.0;
  double w4 = 0.0;
  double w5 = 1e-4;  // spread of non-adjacent AUVs
  double w6 = 0.0;
  double w7 = 0.0;
  double w8 = 0.0;
  double w82 = 1e-3;  // convergence to the target
  double d_s = 150.0;
  double d_max = 1000.0;
  double d_t = 30.0;
  double surface_clearance = 1.0;  // AUVs stay at z <= -surface_clearance
  std::optional<Eigen::Vector2d> target;

  void validate() const;
};

/// Per-step communication graphs plus the effective range of every edge.
/// Index k runs over 0..K; entry 0 is informational only.
struct GraphSchedule {
  std::vector<StepGraphs> steps;
  std::vector<std::map<Edge, double>> ranges;  // overrides of d_s, A2U edges keyed (kUsvNode, n)

  [[nodiscard]] double range(int k, const Edge& e, double d_s) const;
  [[nodiscard]] bool empty() const { return steps.empty(); }
};

/// Floor depth z_n[k] under every AUV waypoint, k = 0..K+1 (the last column
/// is the point one step past the horizon).
using FloorProfile = Eigen::MatrixXd;

struct AssemblyOptions {
  double geometric_margin = 1e-2;  // m, on floor, surface, range and extent rows
  double speed_margin = 1e-6;      // m/s
  double strict_margin = 1e-9;     // closes strict inequalities
  bool heading_band = true;
  bool lookahead = true;  // constrain the first waypoint of the next horizon
  bool map_extent = true;
  int first_a2u_ring_step = 1;
  int first_a2a_ring_step = 2;  // AUV-AUV separation is fixed at k = 1
};

/// Data shared by both convex subproblems.
struct ProblemContext {
  const StackedSystem* sys = nullptr;
  PlanWeights weights;
  Eigen::VectorXd x0;
  const SeafloorMap* map = nullptr;
  // reference horizontal velocity per AUV; component signs orient the heading band
  std::vector<Eigen::Vector2d> heading_reference;
  AssemblyOptions options;
};

/// Row diagnostics emitted while assembling (uncontrollable rows, dropped bounds).
struct AssemblyNotes {
  std::vector<std::string> warnings;
  int infeasible_constant_rows = 0;
};

ConvexProgram assemble_p2(const ProblemContext& ctx, const FloorProfile& floor, AssemblyNotes* notes = nullptr);

ConvexProgram assemble_p5(const ProblemContext& ctx, const FloorProfile& floor, const GraphSchedule& graphs,
                          const Trajectory& reference, AssemblyNotes* notes = nullptr);

/// Floor depth under the AUV waypoints of a trajectory (and one step past the horizon).
FloorProfile floor_under(const SeafloorMap& map, const StackedSystem& sys, const Trajectory& traj,
                         double radius = 0.0);

/// Floor depth under the starting positions, repeated over the horizon.
FloorProfile initial_floor_profile(const SeafloorMap& map, const StackedSystem& sys, const Eigen::VectorXd& x0);

struct FloorIterationOptions {
  double displacement_threshold = 1.0;  // m
  // m, neighbourhood of each waypoint folded into the profile; unset means
  // one cell diagonal, zero uses the floor at the waypoint only
  std::optional<double> profile_radius;
  int max_iterations = 30;
  double tol = 1e-6;
  int max_solver_iterations = 100000;
};

struct FloorIterationResult {
  Trajectory trajectory;
  FloorProfile profile;
  SolveReport report;
  int iterations = 0;
  bool converged = false;
  bool solved = false;
  std::vector<std::string> warnings;
};

/// Alternates solves with profile refreshes until every waypoint clears the
/// floor. `build` assembles the program for a given profile. The profile
/// starts from `start`; when `replace_first` is set the first refresh
/// replaces it instead of taking the running maximum.
FloorIterationResult floor_profile_iterate(const ProblemContext& ctx, FloorProfile start, bool replace_first,
                                           const std::function<ConvexProgram(const FloorProfile&)>& build,
                                           const FloorIterationOptions& opt = {});

/// Step-1 convenience wrapper: P2 from the start-position profile.
FloorIterationResult floor_profile_iterate(const ProblemContext& ctx, const FloorIterationOptions& opt = {});

/// Unweighted objective terms plus the weighted totals.
struct ObjectiveRecord {
  double of1_1 = 0, of1_2 = 0, of1_3 = 0, of1_4 = 0, of1_5 = 0, of1_6 = 0, of1_7 = 0, of1_8 = 0, of1_8_2 = 0;
  double weighted_total = 0;  // every term with its weight, OF1_8 excluded in favour of OF1_8,2
  double composite = 0;       // w1 OF1_1 + w2 OF1_2 + w8,2 OF1_8,2
};

ObjectiveRecord evaluate_objectives(const Trajectory& traj, const GraphSchedule& graphs, const PlanWeights& w);

/// w1 OF1_1 + w2 OF1_2 + w8,2 OF1_8,2.
double composite_objective(const Trajectory& traj, const PlanWeights& w);

struct ConstraintCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // worst signed excess; <= 0 means satisfied
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintCheck> checks;
  std::vector<std::string> notes;  // reported but not failing

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] const ConstraintCheck* find(const std::string& name) const;
};

struct ValidationOptions {
  double dynamics_tol = 1e-6;   // relative to state magnitude
  double geometric_tol = 1e-3;  // m
  double speed_tol = 1e-3;      // m/s
  double heading_tol = 1e-9;    // rad/s
  double los_resolution = 10.0;
  bool check_graphs = true;
  bool check_rings = true;
  // AUV-AUV rings bind only where both endpoints are controllable
  int first_a2a_ring_step = 2;
  int first_a2u_ring_step = 1;
};

ValidationReport validate_constraints(const Trajectory& traj, const GraphSchedule& graphs, const PlanWeights& w,
                                      const SeafloorMap& map, const StackedSystem& sys,
                                      const ValidationOptions& opt = {});

}  // namespace auvmpc
