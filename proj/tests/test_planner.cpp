#include <doctest.h>

#include "auvmpc/planner.hpp"
#include "scenarios.hpp"

#include <cmath>

using namespace auvmpc;
using namespace auvmpc::testing;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

bool same_states(const Trajectory& a, const Trajectory& b) {
  if (a.states.size() != b.states.size() || a.inputs.size() != b.inputs.size()) return false;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (a.states[k] != b.states[k]) return false;
  }
  for (std::size_t k = 0; k < a.inputs.size(); ++k) {
    if (a.inputs[k] != b.inputs[k]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("initial positions lie in the lower half-ball") {
  const Vector2d usv(120, -40);
  const auto pts = sample_initial_positions(usv, 150.0, 2000, 3);
  REQUIRE(pts.size() == 2000);
  double max_norm = 0.0;
  for (const auto& p : pts) {
    const Vector3d rel = p - Vector3d(usv.x(), usv.y(), 0.0);
    max_norm = std::max(max_norm, rel.norm());
    CHECK(p.z() < 0.0);
  }
  CHECK(max_norm <= 150.0);
}

TEST_CASE("initial depths match the half-ball centroid") {
  const double r = 150.0;
  const int n = 10000;
  const auto pts = sample_initial_positions(Vector2d::Zero(), r, n, 11);
  double mean = 0.0;
  for (const auto& p : pts) mean += p.z();
  mean /= n;
  const double centroid = -3.0 * r / 8.0;
  CHECK(centroid == -56.25);
  // E[z^2] = r^2 / 5 for a uniform half-ball
  const double sd = std::sqrt(r * r / 5.0 - centroid * centroid);
  MESSAGE("mean depth " << mean << ", 3 standard errors " << 3 * sd / std::sqrt(double(n)));
  CHECK(std::abs(mean - centroid) <= 3 * sd / std::sqrt(double(n)));
}

TEST_CASE("sampling honours the floor and is seeded") {
  auto sc = flat_scenario(1, 5, -60, 1);
  const auto a = sample_initial_positions(Vector2d::Zero(), 150.0, 50, 9, sc.map.get(), 1.0, 1.0);
  const auto b = sample_initial_positions(Vector2d::Zero(), 150.0, 50, 9, sc.map.get(), 1.0, 1.0);
  CHECK(a == b);
  for (const auto& p : a) {
    CHECK(p.z() < -1.0);
    CHECK(p.z() >= -60 + sc.map->clearance() + 1.0);
  }
  auto shallow = flat_scenario(1, 5, -3, 1);
  CHECK_THROWS_AS(sample_initial_positions(Vector2d::Zero(), 150.0, 3, 1, shallow.map.get(), 1.0), PlanningError);
}

TEST_CASE("flat deep floor needs no repair") {
  const Scenario sc = flat_scenario(3, 8, -2000, 2);
  const PlanResult r = plan_horizon(sc);
  CHECK(r.success());
  CHECK(r.repair_rounds == 0);
  CHECK(r.repaired_edges == 0);
  CHECK(r.floor_iterations == 1);
}

TEST_CASE("planning is deterministic") {
  const Scenario sc = flat_scenario(3, 8, -250, 5);
  const PlanResult a = plan_horizon(sc);
  const PlanResult b = plan_horizon(sc);
  CHECK(same_states(a.trajectory, b.trajectory));
  CHECK(same_states(a.step1_trajectory, b.step1_trajectory));
  CHECK(a.objectives.composite == b.objectives.composite);
}

TEST_CASE("seamount between two AUVs triggers line-of-sight repair") {
  const OcclusionScenario occ = occlusion_scenario();
  REQUIRE(occ.flat.success());
  const auto& map = *occ.scenario.map;
  const Vector3d a = occ.flat.trajectory.position(occ.edge.first, occ.k);
  const Vector3d b = occ.flat.trajectory.position(occ.edge.second, occ.k);
  CHECK_FALSE(los_clear(map, a, b, occ.scenario.los_resolution));

  const PlanResult r = plan_horizon(occ.scenario);
  CHECK(r.success());
  CHECK(r.repair_rounds >= 1);
  for (int k = 0; k <= r.trajectory.steps(); ++k) {
    for (const Edge& e : r.graphs.steps[std::size_t(k)].a2a.edges) {
      CHECK(los_clear(map, r.trajectory.position(e.first, k), r.trajectory.position(e.second, k),
                      occ.scenario.los_resolution));
    }
  }
  // every repaired range sits a whole number of shrink steps under d_s,
  // one step per repair of that edge
  const double d_s = occ.scenario.weights.d_s;
  double shrinks = 0.0;
  for (const auto& step : r.graphs.ranges) {
    for (const auto& [edge, range] : step) {
      const double rounds = (d_s - range) / occ.scenario.repair_step;
      CHECK(rounds >= 1.0);
      CHECK(rounds <= r.repair_rounds);
      CHECK(rounds == doctest::Approx(std::round(rounds)));
      shrinks += rounds;
    }
  }
  CHECK(shrinks == doctest::Approx(r.repaired_edges));
}

TEST_CASE("step 3 objective is never below step 1") {
  const Scenario sc = flat_scenario(3, 8, -250, 7);
  const PlanResult r = plan_horizon(sc);
  REQUIRE(r.success());
  CHECK(r.objectives.composite >= r.step1_objectives.composite);
  // the rings act: step 3 keeps the A2U edge near range where step 1 need not
  const auto& w = sc.weights;
  for (int k = 1; k <= r.trajectory.steps(); ++k) {
    const int n = r.graphs.steps[std::size_t(k)].a2u.selected;
    const double d = (r.trajectory.position(n, k) - r.trajectory.usv3(k)).norm();
    CHECK(d <= w.d_s + 1e-3);
    CHECK(d > w.d_s - w.d_t - 1e-3);
  }
}

TEST_CASE("missions chain horizons exactly") {
  const Scenario sc = flat_scenario(2, 6, -250, 3);
  const auto results = plan_mission(sc, {2, false});
  REQUIRE(results.size() == 2);
  CHECK(results[0].horizon == 1);
  CHECK(results[1].horizon == 2);
  CHECK(results[1].trajectory.states.front() == results[0].trajectory.states.back());

  const auto single = plan_mission(sc, {1, false});
  REQUIRE(single.size() == 1);
  CHECK(same_states(single[0].trajectory, plan_horizon(resolve_starts(sc)).trajectory));
  CHECK_THROWS_AS(plan_mission(sc, {0, false}), ParameterError);
}

TEST_CASE("invalid starts are rejected") {
  Scenario sc = flat_scenario(1, 5, -100, 1);
  sc.auv_start = {LinearState{Vector3d(0, 0, -98), Vector3d::Zero()}};
  CHECK_THROWS_AS(plan_horizon(sc), ParameterError);
  sc.auv_start = {LinearState{Vector3d(200, 0, -50), Vector3d::Zero()}};
  CHECK_THROWS_AS(plan_horizon(sc), ParameterError);
  sc.auv_start = {LinearState{Vector3d(0, 0, 0.5), Vector3d::Zero()}};
  CHECK_THROWS_AS(plan_horizon(sc), ParameterError);
  sc.auv_start.clear();
  sc.n_auv = 0;
  CHECK_THROWS_AS(plan_horizon(sc), ParameterError);
}

TEST_CASE("stage timings are recorded") {
  const PlanResult r = plan_horizon(flat_scenario(2, 5, -250, 1));
  CHECK(r.timings.step1 > 0.0);
  CHECK(r.timings.step3 > 0.0);
  CHECK(r.timings.total() >= r.timings.step1 + r.timings.step3);
}
