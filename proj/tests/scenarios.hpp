#pragma once

// Scenarios shared by the test binaries.

#include "auvmpc/config.hpp"
#include "auvmpc/planner.hpp"

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>

#ifndef AUVMPC_CONFIG_DIR
#error "AUVMPC_CONFIG_DIR must point at the configs directory"
#endif

namespace auvmpc::testing {

inline std::filesystem::path config_path(const std::string& name) {
  return std::filesystem::path(AUVMPC_CONFIG_DIR) / name;
}

inline Scenario scenario_from(const RunConfig& c) {
  Scenario sc = c.scenario;
  sc.map = c.load_terrain();
  return sc;
}

inline SynthTerrainSpec flat_spec(double base_depth) {
  SynthTerrainSpec spec;
  spec.origin = {-1000, -1000};
  spec.extent = {4000, 3000};
  spec.cell = 10;
  spec.base_depth = base_depth;
  spec.amplitude = 0.5 * std::abs(base_depth);
  return spec;
}

inline Scenario flat_scenario(int n_auv, int steps, double base_depth, std::uint64_t seed) {
  Scenario sc;
  sc.map = std::make_shared<SeafloorMap>(synth_terrain(flat_spec(base_depth)));
  sc.n_auv = n_auv;
  sc.steps = steps;
  sc.seed = seed;
  sc.weights.target = Eigen::Vector2d(1500, 500);
  return sc;
}

struct OcclusionScenario {
  Scenario scenario;  // seamount terrain, same starts as the flat plan
  PlanResult flat;    // plan over the flat floor
  int k = 0;          // step of the blocked edge
  Edge edge;          // A2A edge of the flat plan that the seamount blocks
};

/// Plans over a flat floor, then raises a narrow seamount under the midpoint
/// of a mid-horizon A2A edge so that its peak sits 20 m above that edge.
inline OcclusionScenario occlusion_scenario() {
  OcclusionScenario out;
  Scenario sc = resolve_starts(flat_scenario(3, 8, -250, 4));
  out.flat = plan_horizon(sc);
  out.k = 4;
  out.edge = out.flat.graphs.steps[std::size_t(out.k)].a2a.edges.front();
  const Eigen::Vector3d mid =
      0.5 * (out.flat.trajectory.position(out.edge.first, out.k) + out.flat.trajectory.position(out.edge.second, out.k));
  SynthTerrainSpec spec = flat_spec(-250);
  spec.features.push_back({mid.head<2>(), mid.z() + 20 - spec.base_depth, 15});
  sc.map = std::make_shared<SeafloorMap>(synth_terrain(spec));
  out.scenario = sc;
  return out;
}

}  // namespace auvmpc::testing
