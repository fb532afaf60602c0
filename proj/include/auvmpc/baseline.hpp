#pragma once

// Sampling comparator: per-step random waypoint trees with constraint
// filtering and a bounded beam, scored on the composite objective.

#include "auvmpc/planner.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

namespace auvmpc {

class NoValidSampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws the next velocity of one body. `body` is 0 for the USV (z ignored)
/// and n + 1 for AUV n; `velocity` is the body's current velocity.
using VelocitySampler = std::function<Eigen::Vector3d(std::mt19937_64& rng, int body, int k,
                                                      const Eigen::Vector3d& velocity, double max_speed)>;

struct SamplingConfig {
  int samples_per_step = 100;  // r-hat, candidates per frontier node
  int beam = 500;              // frontier nodes kept per step
  std::uint64_t seed = 1;
  std::optional<double> usv_max_speed;  // m/s; unset uses the first AUV's max speed
  double segment_resolution = 10.0;     // m, obstacle check along each edge
  VelocitySampler sampler;              // empty: uniform in the speed ball

  void validate() const;
};

struct SamplingCostModel {
  double samples = 0.0;     // sum of r-hat^k over k = 1..K
  double operations = 0.0;  // (M N S) log(M N S) + (2N)^(K-1)
  bool saturated = false;   // some term exceeded double range
};

SamplingCostModel sampling_cost_model(int n_auv, int steps, int samples_per_step, int objectives_count);

struct BaselineResult {
  Trajectory trajectory;
  double score = 0.0;  // w1 OF1_1 + w2 OF1_2 + w8,2 OF1_8,2
  ObjectiveRecord objectives;
  double elapsed = 0.0;  // s
  long long candidates = 0;
  long long rejected = 0;
  SamplingCostModel predicted;
};

/// Uniform draw in the ball of radius `max_speed` (a disc for the USV).
Eigen::Vector3d uniform_velocity(std::mt19937_64& rng, int body, double max_speed);

BaselineResult rrt_like_plan(const Scenario& scenario, const SamplingConfig& cfg);
BaselineResult rrt_like_plan(const Scenario& scenario, const Eigen::VectorXd& x0, const SamplingConfig& cfg);

}  // namespace auvmpc
