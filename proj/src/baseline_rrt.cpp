#include "auvmpc/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace auvmpc {

void SamplingConfig::validate() const {
  if (samples_per_step < 1) throw ParameterError("samples_per_step must be at least 1");
  if (beam < 1) throw ParameterError("beam must be at least 1");
  if (usv_max_speed && !(*usv_max_speed >= 0)) throw ParameterError("usv_max_speed must be non-negative");
  if (!(segment_resolution > 0)) throw ParameterError("segment_resolution must be positive");
}

SamplingCostModel sampling_cost_model(int n_auv, int steps, int samples_per_step, int objectives_count) {
  if (n_auv < 1 || steps < 1 || samples_per_step < 1 || objectives_count < 1) {
    throw ParameterError("cost model arguments must be at least 1");
  }
  constexpr double big = std::numeric_limits<double>::max();
  SamplingCostModel m;
  double term = 1.0;
  for (int k = 1; k <= steps; ++k) {
    term *= samples_per_step;
    m.samples += term;
    if (!std::isfinite(m.samples)) {
      m.saturated = true;
      m.samples = big;
      break;
    }
  }
  const double mns = double(objectives_count) * n_auv * m.samples;
  double tree = mns * std::log(mns);
  const double branch = std::pow(2.0 * n_auv, steps - 1);
  if (!std::isfinite(mns) || !std::isfinite(tree) || !std::isfinite(branch) || !std::isfinite(tree + branch)) {
    m.saturated = true;
    m.operations = big;
  } else {
    m.operations = tree + branch;
  }
  return m;
}

Eigen::Vector3d uniform_velocity(std::mt19937_64& rng, int body, double max_speed) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Eigen::Vector3d v(u(rng), u(rng), body == 0 ? 0.0 : u(rng));
    if (v.squaredNorm() <= 1.0) return max_speed * v;
  }
}

namespace {

struct Node {
  Eigen::VectorXd state;
  Eigen::VectorXd input;  // input that led here
  int parent = -1;
  double cost = 0.0;  // w1 sum |u|^2 + w2 sum z so far
  double rank = 0.0;  // cost plus the convergence term at this node
};

// Underwater, inside the map and clear of the floor along the whole segment.
bool segment_ok(const SeafloorMap& map, const Eigen::Vector3d& a, const Eigen::Vector3d& b, double surface,
                double resolution) {
  for (const Eigen::Vector3d& p : interpolate_line(a, b, resolution).points) {
    if (p.z() > -surface || !map.contains(p.x(), p.y()) || !map.collision_free(p)) return false;
  }
  return true;
}

double convergence(const PlanWeights& w, const Eigen::VectorXd& x) {
  if (!w.target) return 0.0;
  return w.w82 * (x.head<2>() - *w.target).squaredNorm();
}

}  // namespace

BaselineResult rrt_like_plan(const Scenario& scenario, const SamplingConfig& cfg) {
  const Scenario sc = resolve_starts(scenario);
  return rrt_like_plan(sc, sc.initial_state(), cfg);
}

BaselineResult rrt_like_plan(const Scenario& sc, const Eigen::VectorXd& x0, const SamplingConfig& cfg) {
  cfg.validate();
  if (!sc.map) throw ParameterError("scenario has no seafloor map");
  const auto t0 = std::chrono::steady_clock::now();
  const StackedSystem sys = build_stacked(sc.n_auv, sc.params, sc.dt, sc.steps);
  if (x0.size() != sys.nx()) throw ParameterError("initial state has wrong dimension");
  const SeafloorMap& map = *sc.map;
  const PlanWeights& w = sc.weights;
  const int N = sys.n_auv, K = sys.steps;
  const double dt = sys.dt;
  const double usv_speed = cfg.usv_max_speed.value_or(sys.params[0].max_speed);
  const VelocitySampler sampler =
      cfg.sampler ? cfg.sampler
                  : VelocitySampler([](std::mt19937_64& rng, int body, int, const Eigen::Vector3d&, double vmax) {
                      return uniform_velocity(rng, body, vmax);
                    });

  BaselineResult res;
  res.predicted = sampling_cost_model(N, K, cfg.samples_per_step, 3);

  for (int n = 0; n < N; ++n) {
    const Eigen::Index r = StackedSystem::auv_state(n);
    const Eigen::Vector3d p0 = x0.segment<3>(r);
    if (!segment_ok(map, p0, p0 + dt * x0.segment<3>(r + 3), w.surface_clearance, cfg.segment_resolution)) {
      throw NoValidSampleError("AUV " + std::to_string(n + 1) + " cannot reach its first waypoint");
    }
  }

  std::vector<std::vector<Node>> levels(static_cast<std::size_t>(K) + 1);
  levels[0].push_back({x0, Eigen::VectorXd(), -1, 0.0, convergence(w, x0)});

  for (int k = 0; k < K; ++k) {
    const std::vector<Node>& frontier = levels[std::size_t(k)];
    std::vector<Node> children;
    children.reserve(frontier.size() * std::size_t(cfg.samples_per_step));
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const Node& parent = frontier[i];
      // draws depend only on (seed, k, parent), never on evaluation order
      std::seed_seq seq{std::uint32_t(cfg.seed), std::uint32_t(cfg.seed >> 32), std::uint32_t(k), std::uint32_t(i)};
      std::mt19937_64 rng(seq);
      for (int s = 0; s < cfg.samples_per_step; ++s) {
        ++res.candidates;
        Eigen::VectorXd u(sys.nu());
        const Eigen::Vector3d usv_v =
            parent.input.size() > 0 ? Eigen::Vector3d(parent.input(0), parent.input(1), 0.0) : Eigen::Vector3d::Zero();
        const Eigen::Vector3d uv = sampler(rng, 0, k, usv_v, usv_speed);
        u.head<2>() = uv.head<2>();
        std::vector<Eigen::Vector3d> next_v(static_cast<std::size_t>(N));
        for (int n = 0; n < N; ++n) {
          const Eigen::Vector3d v = parent.state.segment<3>(StackedSystem::auv_state(n) + 3);
          next_v[std::size_t(n)] = sampler(rng, n + 1, k, v, sys.params[std::size_t(n)].max_speed);
          const Eigen::Matrix3d decay =
              Eigen::Matrix3d::Identity() - dt * planner_drag_block<double>(sys.params[std::size_t(n)]);
          u.segment<3>(StackedSystem::auv_input(n)) = next_v[std::size_t(n)] - decay * v;
        }
        const Eigen::VectorXd x = sys.a * parent.state + sys.b * u;

        bool ok = map.contains(x(0), x(1));
        for (int n = 0; n < N && ok; ++n) {
          const VehicleParams& p = sys.params[std::size_t(n)];
          const Eigen::Index r = StackedSystem::auv_state(n);
          const Eigen::Vector3d v_prev = parent.state.segment<3>(r + 3);
          const Eigen::Vector3d v = x.segment<3>(r + 3);
          if (v.norm() > p.max_speed) ok = false;
          // mission ranges: d_max throughout, sonar range at the end of the horizon
          const double to_usv = (x.segment<3>(r) - Eigen::Vector3d(x(0), x(1), 0.0)).norm();
          if (to_usv > w.d_max || (k + 1 == K && to_usv > w.d_s)) ok = false;
          if (ok && k + 1 < K) {
            // the end-of-horizon sonar range must stay reachable
            const double slack = dt * (p.max_speed * std::max(0, K - k - 2) + usv_speed * (K - k - 1));
            const Eigen::Vector3d ahead = x.segment<3>(r) + dt * v;
            if ((ahead - Eigen::Vector3d(x(0), x(1), 0.0)).norm() > w.d_s + slack) ok = false;
          }
          if (ok && !v_prev.head<2>().isZero(0.0) && !v.head<2>().isZero(0.0) &&
              std::abs(heading_change(v_prev.head<2>(), v.head<2>(), dt)) > p.max_heading_rate) {
            ok = false;
          }
          // the drawn velocity decides where the next segment goes
          if (ok) {
            ok = segment_ok(map, x.segment<3>(r), x.segment<3>(r) + dt * v, w.surface_clearance, cfg.segment_resolution);
          }
        }
        if (!ok) {
          ++res.rejected;
          continue;
        }
        double cost = parent.cost + w.w1 * u.squaredNorm();
        for (int n = 0; n < N; ++n) cost += w.w2 * x(StackedSystem::auv_state(n) + 2);
        children.push_back({x, u, int(i), cost, cost + convergence(w, x)});
      }
    }
    if (children.empty()) {
      throw NoValidSampleError("no valid sample at step " + std::to_string(k + 1));
    }
    if (children.size() > std::size_t(cfg.beam)) {
      std::vector<std::size_t> order(children.size());
      std::iota(order.begin(), order.end(), std::size_t(0));
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return children[a].rank < children[b].rank; });
      std::vector<Node> kept;
      kept.reserve(std::size_t(cfg.beam));
      for (int b = 0; b < cfg.beam; ++b) kept.push_back(std::move(children[order[std::size_t(b)]]));
      children = std::move(kept);
    }
    levels[std::size_t(k) + 1] = std::move(children);
  }

  const std::vector<Node>& leaves = levels[std::size_t(K)];
  std::size_t best = 0;
  for (std::size_t i = 1; i < leaves.size(); ++i) {
    if (leaves[i].rank < leaves[best].rank) best = i;
  }
  res.trajectory.states.resize(std::size_t(K) + 1);
  res.trajectory.inputs.resize(std::size_t(K));
  int idx = int(best);
  for (int k = K; k >= 1; --k) {
    const Node& node = levels[std::size_t(k)][std::size_t(idx)];
    res.trajectory.states[std::size_t(k)] = node.state;
    res.trajectory.inputs[std::size_t(k) - 1] = node.input;
    idx = node.parent;
  }
  res.trajectory.states[0] = x0;
  res.score = composite_objective(res.trajectory, w);
  res.objectives = evaluate_objectives(res.trajectory, GraphSchedule{}, w);
  res.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace auvmpc
