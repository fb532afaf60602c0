#include "auvmpc/planner.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace auvmpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string edge_name(const Edge& e, int k) {
  return std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1) + " at k=" + std::to_string(k);
}

}  // namespace

void Scenario::validate() const {
  if (n_auv < 1) throw ParameterError("n_auv must be at least 1");
  if (steps < 2) throw ParameterError("steps must be at least 2");
  if (!(dt > 0)) throw ParameterError("dt must be positive");
  if (!map) throw ParameterError("scenario has no seafloor map");
  if (params.size() != 1 && params.size() != std::size_t(n_auv)) {
    throw ParameterError("need one vehicle parameter set or one per AUV");
  }
  for (const auto& p : params) p.validate();
  weights.validate();
  if (!(los_resolution > 0)) throw ParameterError("los_resolution must be positive");
  if (!(repair_step > 0)) throw ParameterError("repair_step must be positive");
  if (max_repair_rounds < 0) throw ParameterError("max_repair_rounds must be non-negative");
  if (max_a2a_ring_start < assembly.first_a2a_ring_step) {
    throw ParameterError("max_a2a_ring_start must not precede the first ring step");
  }
  if (!map->contains(usv_start.x(), usv_start.y())) throw ParameterError("USV start lies outside the map");
  if (!auv_start.empty()) {
    if (auv_start.size() != std::size_t(n_auv)) throw ParameterError("need one start state per AUV");
    for (std::size_t n = 0; n < auv_start.size(); ++n) {
      const Eigen::Vector3d& p = auv_start[n].position;
      const std::string who = "AUV " + std::to_string(n + 1);
      if (!p.allFinite() || !auv_start[n].velocity.allFinite()) throw ParameterError(who + " start is not finite");
      if (!map->contains(p.x(), p.y())) throw ParameterError(who + " starts outside the map");
      if (!map->collision_free(p)) throw ParameterError(who + " starts inside the seafloor clearance");
      if (p.z() > -weights.surface_clearance) throw ParameterError(who + " starts above the surface bound");
      const Eigen::Vector3d usv(usv_start.x(), usv_start.y(), 0.0);
      if ((p - usv).norm() > weights.d_s) throw ParameterError(who + " starts outside sonar range of the USV");
    }
  }
}

Eigen::VectorXd Scenario::initial_state() const {
  if (auv_start.size() != std::size_t(n_auv)) throw ParameterError("need one start state per AUV");
  Eigen::VectorXd x(2 + 6 * n_auv);
  x.head<2>() = usv_start;
  for (int n = 0; n < n_auv; ++n) {
    x.segment<3>(StackedSystem::auv_state(n)) = auv_start[std::size_t(n)].position;
    x.segment<3>(StackedSystem::auv_state(n) + 3) = auv_start[std::size_t(n)].velocity;
  }
  return x;
}

Scenario resolve_starts(const Scenario& scenario) {
  Scenario sc = scenario;
  if (!sc.map) throw ParameterError("scenario has no seafloor map");
  if (sc.auv_start.empty()) {
    const auto pos = sample_initial_positions(sc.usv_start, sc.weights.d_s, sc.n_auv, sc.seed, sc.map.get(),
                                              sc.weights.surface_clearance + sc.start_depth_margin,
                                              sc.assembly.geometric_margin + 1.0);
    for (const auto& p : pos) sc.auv_start.push_back({p, Eigen::Vector3d::Zero()});
  }
  sc.validate();
  return sc;
}

std::vector<Eigen::Vector3d> sample_initial_positions(const Eigen::Vector2d& usv_position, double d_s, int n,
                                                      std::uint64_t seed, const SeafloorMap* map, double min_depth,
                                                      double floor_margin) {
  if (!(d_s > 0)) throw ParameterError("d_s must be positive");
  if (n < 0) throw ParameterError("sample count must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Vector3d> out;
  const long long max_draws = 1000000LL + 10000LL * n;
  for (long long draw = 0; int(out.size()) < n; ++draw) {
    if (draw >= max_draws) throw PlanningError("sampling", "no room for AUV starts under the USV");
    const Eigen::Vector3d v(u(rng), u(rng), -std::abs(u(rng)));
    if (v.norm() > 1.0 || v.z() == 0.0) continue;
    const Eigen::Vector3d p(usv_position.x() + d_s * v.x(), usv_position.y() + d_s * v.y(), d_s * v.z());
    if (!(p.z() < -min_depth)) continue;
    if (map) {
      if (!map->contains(p.x(), p.y())) continue;
      if (p.z() < map->depth_at(p.x(), p.y()) + map->clearance() + floor_margin) continue;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<Eigen::Vector2d> heading_reference(const ProblemContext& ctx) {
  const StackedSystem& sys = *ctx.sys;
  std::vector<Eigen::Vector2d> ref(std::size_t(sys.n_auv), Eigen::Vector2d::Zero());
  bool need_solve = false;
  for (int n = 0; n < sys.n_auv; ++n) {
    const Eigen::Vector2d v0 = ctx.x0.segment<2>(StackedSystem::auv_state(n) + 3);
    ref[std::size_t(n)] = v0;
    if (v0.norm() <= 1e-9) need_solve = true;
  }
  if (!need_solve) return ref;

  ProblemContext relaxed = ctx;
  relaxed.options.heading_band = false;
  relaxed.heading_reference.clear();
  const ConvexProgram p = assemble_p2(relaxed, initial_floor_profile(*ctx.map, sys, ctx.x0));
  const SolveReport r = solve(p);
  const Trajectory t = rollout(sys, ctx.x0, r.x);
  const Eigen::Vector2d usv_move = t.usv(sys.steps) - t.usv(0);
  for (int n = 0; n < sys.n_auv; ++n) {
    Eigen::Vector2d& v = ref[std::size_t(n)];
    if (v.norm() > 1e-9) continue;
    const Eigen::Vector2d move = t.position(n, sys.steps).head<2>() - t.position(n, 0).head<2>();
    for (int c = 0; c < 2; ++c) {
      if (std::abs(move(c)) > 1e-3) {
        v(c) = move(c);
      } else if (std::abs(usv_move(c)) > 1e-3) {
        v(c) = usv_move(c);
      } else {
        v(c) = 1.0;
      }
    }
  }
  return ref;
}

namespace {

GraphSchedule select_graphs(const Trajectory& ref, StageTimings& timings) {
  GraphSchedule g;
  const int K = ref.steps();
  g.steps.resize(std::size_t(K) + 1);
  g.ranges.resize(std::size_t(K) + 1);
  const auto t0 = Clock::now();
  for (int k = 0; k <= K; ++k) g.steps[std::size_t(k)].a2u = solve_a2u(ref.positions(k), ref.usv(k));
  timings.step2_a2u = seconds_since(t0);
  const auto t1 = Clock::now();
  for (int k = 0; k <= K; ++k) g.steps[std::size_t(k)].a2a = solve_a2a(distance_matrix(ref.positions(k)));
  timings.step2_a2a = seconds_since(t1);
  return g;
}

// One Step 3 solve with line-of-sight repair rounds.
void run_step3(const ProblemContext& ctx, const Scenario& sc, const FloorIterationResult& step1, GraphSchedule& graphs,
               PlanResult& res, std::optional<FloorIterationResult>& step3) {
  const SeafloorMap& map = *ctx.map;
  const int K = ctx.sys->steps;
  for (int round = 0;; ++round) {
    AssemblyNotes notes;
    step3 = floor_profile_iterate(
        ctx, step1.profile, false,
        [&](const FloorProfile& f) { return assemble_p5(ctx, f, graphs, step1.trajectory, &notes); }, sc.floor);
    res.step3_floor_iterations += step3->iterations;
    if (!step3->solved) return;

    std::vector<std::pair<int, Edge>> blocked;
    for (int k = 1; k <= K; ++k) {
      for (const Edge& e : graphs.steps[std::size_t(k)].a2a.edges) {
        const Eigen::Vector3d a = step3->trajectory.position(e.first, k);
        const Eigen::Vector3d b = step3->trajectory.position(e.second, k);
        if (!map.contains(a.x(), a.y()) || !map.contains(b.x(), b.y())) continue;
        if (!los_clear(map, a, b, sc.los_resolution)) blocked.emplace_back(k, e);
      }
    }
    if (blocked.empty()) return;
    if (round >= sc.max_repair_rounds) {
      res.step3_flagged = true;
      res.warnings.push_back("line-of-sight repair exhausted with " + std::to_string(blocked.size()) +
                             " blocked edge(s)");
      return;
    }
    bool shrunk = false;
    for (const auto& [k, e] : blocked) {
      if (k == 1) {
        // positions at k = 1 follow from the initial state alone
        res.warnings.push_back("edge " + edge_name(e, k) + " blocked at a fixed waypoint");
        continue;
      }
      const double range = graphs.range(k, e, sc.weights.d_s) - sc.repair_step;
      if (range <= 0) {
        res.warnings.push_back("edge " + edge_name(e, k) + " cannot shrink further");
        continue;
      }
      graphs.ranges[std::size_t(k)][e] = range;
      ++res.repaired_edges;
      shrunk = true;
    }
    if (!shrunk) {
      res.step3_flagged = true;
      return;
    }
    ++res.repair_rounds;
  }
}

}  // namespace

PlanResult plan_horizon(const Scenario& scenario) {
  const Scenario sc = resolve_starts(scenario);
  return plan_horizon(sc, sc.initial_state());
}

PlanResult plan_horizon(const Scenario& sc, const Eigen::VectorXd& x0) {
  if (!sc.map) throw ParameterError("scenario has no seafloor map");
  const StackedSystem sys = build_stacked(sc.n_auv, sc.params, sc.dt, sc.steps);
  if (x0.size() != sys.nx()) throw ParameterError("initial state has wrong dimension");
  const SeafloorMap& map = *sc.map;

  PlanResult res;
  ProblemContext ctx{&sys, sc.weights, x0, &map, {}, sc.assembly};
  ValidationOptions vopt;
  vopt.los_resolution = sc.los_resolution;
  vopt.first_a2u_ring_step = sc.assembly.first_a2u_ring_step;

  // Step 1
  auto t0 = Clock::now();
  if (sc.assembly.heading_band) ctx.heading_reference = heading_reference(ctx);
  const FloorIterationResult step1 = floor_profile_iterate(ctx, sc.floor);
  res.timings.step1 = seconds_since(t0);
  res.floor_iterations = step1.iterations;
  for (const auto& w : step1.warnings) res.warnings.push_back("step 1: " + w);
  if (!step1.solved) throw PlanningError("step 1", "P2 " + to_string(step1.report.status));
  if (!step1.converged) res.flagged = true;
  res.step1_trajectory = step1.trajectory;

  // Step 2
  GraphSchedule graphs = select_graphs(step1.trajectory, res.timings);
  res.step1_objectives = evaluate_objectives(step1.trajectory, graphs, sc.weights);

  // Step 3 with line-of-sight repair. When the pack cannot reach ring
  // spacing early enough the A2A rings start one step later, up to a limit.
  t0 = Clock::now();
  std::optional<FloorIterationResult> step3;
  const GraphSchedule selected = graphs;
  for (int ring_start = sc.assembly.first_a2a_ring_step;; ++ring_start) {
    ctx.options.first_a2a_ring_step = ring_start;
    graphs = selected;
    res.repair_rounds = 0;
    res.repaired_edges = 0;
    res.step3_flagged = false;
    run_step3(ctx, sc, step1, graphs, res, step3);
    res.a2a_ring_start = ring_start;
    if (step3->solved && step3->converged) break;
    if (ring_start >= std::min(sc.max_a2a_ring_start, sc.steps)) break;
    res.warnings.push_back("step 3 " + (step3->solved ? std::string("did not converge") : to_string(step3->report.status)) +
                           " with A2A rings from k=" + std::to_string(ring_start) + ", deferring");
  }
  if (res.step3_flagged) res.flagged = true;
  res.timings.step3 = seconds_since(t0);
  for (const auto& w : step3->warnings) res.warnings.push_back("step 3: " + w);

  res.graphs = graphs;
  if (step3->solved) {
    res.step3_solved = true;
    res.trajectory = step3->trajectory;
    if (!step3->converged) res.flagged = true;
  } else {
    res.fallback_to_step1 = true;
    res.flagged = true;
    res.trajectory = step1.trajectory;
    res.warnings.push_back("step 3 " + to_string(step3->report.status) + ", keeping the step 1 trajectory");
  }
  vopt.first_a2a_ring_step = res.a2a_ring_start;
  res.objectives = evaluate_objectives(res.trajectory, res.graphs, sc.weights);
  res.validation = validate_constraints(res.trajectory, res.graphs, sc.weights, map, sys, vopt);
  return res;
}

std::vector<PlanResult> plan_mission(const Scenario& scenario, const MissionOptions& opt) {
  if (opt.horizons < 1) throw ParameterError("horizons must be at least 1");
  const Scenario sc = resolve_starts(scenario);
  std::vector<PlanResult> out;
  Eigen::VectorXd x0 = sc.initial_state();
  for (int h = 1; h <= opt.horizons; ++h) {
    PlanResult r = plan_horizon(sc, x0);
    r.horizon = h;
    x0 = r.trajectory.states.back();
    const bool stop = !r.success() && !opt.continue_on_flag;
    out.push_back(std::move(r));
    if (stop) break;
  }
  return out;
}

}  // namespace auvmpc
