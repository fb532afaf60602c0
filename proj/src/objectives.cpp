#include "auvmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace auvmpc {

namespace {

bool is_edge(const EdgeList& edges, int i, int j) {
  return std::find(edges.begin(), edges.end(), Edge{i, j}) != edges.end();
}

double usv_target_term(const Trajectory& traj, const PlanWeights& w) {
  if (!w.target) return 0.0;
  return (traj.usv(traj.steps()) - *w.target).squaredNorm();
}

}  // namespace

ObjectiveRecord evaluate_objectives(const Trajectory& traj, const GraphSchedule& graphs, const PlanWeights& w) {
  const int K = traj.steps();
  const int N = traj.n_auv();
  if (!graphs.empty() && graphs.steps.size() != std::size_t(K) + 1) {
    throw std::invalid_argument("graph schedule does not match the trajectory");
  }
  ObjectiveRecord r;
  for (int k = 0; k < K; ++k) r.of1_1 += traj.inputs[std::size_t(k)].squaredNorm();
  for (int k = 1; k <= K; ++k) {
    for (int n = 0; n < N; ++n) r.of1_2 += traj.position(n, k).z();
    if (graphs.empty()) continue;
    const StepGraphs& g = graphs.steps[std::size_t(k)];
    for (int n = 0; n < N; ++n) {
      if (g.a2u.sigma.size() == std::size_t(N) && g.a2u.sigma[std::size_t(n)] == 1) {
        r.of1_3 += std::abs((traj.position(n, k) - traj.usv3(k)).norm() - w.d_s);
        r.of1_7 += 1;
      }
    }
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        const double d = (traj.position(i, k) - traj.position(j, k)).norm();
        if (is_edge(g.a2a.edges, i, j)) {
          r.of1_4 += std::abs(d - w.d_s);
          r.of1_6 += 1;
        } else {
          r.of1_5 += d * d;
        }
      }
    }
  }
  if (graphs.empty()) {
    // without graphs every pair counts as non-adjacent
    for (int k = 1; k <= K; ++k) {
      for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) r.of1_5 += (traj.position(i, k) - traj.position(j, k)).squaredNorm();
      }
    }
  }
  r.of1_8 = (traj.usv(K) - traj.usv(0)).squaredNorm();
  r.of1_8_2 = usv_target_term(traj, w);
  r.composite = w.w1 * r.of1_1 + w.w2 * r.of1_2 + w.w82 * r.of1_8_2;
  r.weighted_total = r.composite + w.w3 * r.of1_3 + w.w4 * r.of1_4 - w.w5 * r.of1_5 + w.w6 * r.of1_6 +
                     w.w7 * r.of1_7;
  return r;
}

double composite_objective(const Trajectory& traj, const PlanWeights& w) {
  double of1 = 0.0, of2 = 0.0;
  for (const auto& u : traj.inputs) of1 += u.squaredNorm();
  for (int k = 1; k <= traj.steps(); ++k) {
    for (int n = 0; n < traj.n_auv(); ++n) of2 += traj.position(n, k).z();
  }
  return w.w1 * of1 + w.w2 * of2 + w.w82 * usv_target_term(traj, w);
}

bool ValidationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConstraintCheck& c) { return c.passed; });
}

const ConstraintCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

// Tracks the worst signed excess of one constraint family.
class Check {
 public:
  explicit Check(std::string name) { c_.name = std::move(name); c_.worst = -std::numeric_limits<double>::infinity(); }

  void excess(double e, double tol, const std::string& where) {
    if (e > c_.worst) {
      c_.worst = e;
      if (e > tol) c_.detail = where;
    }
    if (e > tol) c_.passed = false;
  }
  void fail(const std::string& where) {
    c_.passed = false;
    if (c_.detail.empty()) c_.detail = where;
    c_.worst = std::max(c_.worst, 1.0);
  }
  ConstraintCheck done() {
    if (!std::isfinite(c_.worst)) c_.worst = 0.0;
    return c_;
  }

 private:
  ConstraintCheck c_;
};

std::string at(int n, int k) { return "AUV " + std::to_string(n + 1) + ", k=" + std::to_string(k); }

}  // namespace

ValidationReport validate_constraints(const Trajectory& traj, const GraphSchedule& graphs, const PlanWeights& w,
                                      const SeafloorMap& map, const StackedSystem& sys,
                                      const ValidationOptions& opt) {
  const int K = traj.steps();
  const int N = traj.n_auv();
  if (K != sys.steps || N != sys.n_auv || traj.states.size() != std::size_t(K) + 1) {
    throw std::invalid_argument("trajectory does not match the stacked system");
  }
  ValidationReport rep;

  {
    Check c("C1_1 dynamics");
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd pred = sys.a * traj.states[std::size_t(k)] + sys.b * traj.inputs[std::size_t(k)];
      const Eigen::VectorXd& next = traj.states[std::size_t(k) + 1];
      const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
      std::ostringstream where;
      where << "k=" << k + 1 << " residual " << (next - pred).norm();
      c.excess((next - pred).cwiseAbs().maxCoeff() / scale, opt.dynamics_tol, where.str());
    }
    rep.checks.push_back(c.done());
  }
  {
    Check c("C1_4 underwater");
    for (int n = 0; n < N; ++n) {
      for (int k = 1; k <= K; ++k) c.excess(traj.position(n, k).z() + w.surface_clearance, opt.geometric_tol, at(n, k));
    }
    rep.checks.push_back(c.done());
  }
  {
    Check c5("C1_5 max USV distance"), c6("C1_6 start/end sonar range");
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k <= K; ++k) {
        const double d = (traj.position(n, k) - traj.usv3(k)).norm();
        if (k >= 1) c5.excess(d - w.d_max, opt.geometric_tol, at(n, k));
        if (k == 0 || k == K) c6.excess(d - w.d_s, opt.geometric_tol, at(n, k));
      }
    }
    rep.checks.push_back(c5.done());
    rep.checks.push_back(c6.done());
  }
  {
    Check c("C1_7 speed");
    for (int n = 0; n < N; ++n) {
      const double vmax = sys.params[std::size_t(n)].max_speed;
      for (int k = 0; k <= K; ++k) c.excess(traj.velocity(n, k).norm() - vmax, opt.speed_tol, at(n, k));
    }
    rep.checks.push_back(c.done());
  }

  if (opt.check_graphs) {
    Check c89("C1_8/9 binary"), c10("C1_10 A2U anchor"), c11("C1_11 A2A path");
    if (graphs.steps.size() != std::size_t(K) + 1) {
      c10.fail("no graph schedule");
      c11.fail("no graph schedule");
    } else {
      for (int k = 1; k <= K; ++k) {
        const StepGraphs& g = graphs.steps[std::size_t(k)];
        const std::string kt = "k=" + std::to_string(k);
        if (g.a2u.sigma.size() != std::size_t(N)) {
          c89.fail(kt + " sigma has wrong size");
          continue;
        }
        int anchors = 0;
        for (int s : g.a2u.sigma) {
          if (s != 0 && s != 1) c89.fail(kt + " non-binary sigma");
          anchors += s;
        }
        if (anchors != 1 || g.a2u.sigma[std::size_t(g.a2u.selected)] != 1) c10.fail(kt + " anchors=" + std::to_string(anchors));
        for (const auto& [i, j] : g.a2a.edges) {
          if (i >= j) c89.fail(kt + " edge not ordered");
        }
        if (!is_hamiltonian_path(g.a2a.edges, N)) c11.fail(kt + " edges do not form a Hamiltonian path");
      }
    }
    rep.checks.push_back(c89.done());
    rep.checks.push_back(c10.done());
    rep.checks.push_back(c11.done());
  }

  {
    Check c("C1_12 collision");
    int grazes = 0;
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k <= K; ++k) {
        const Eigen::Vector3d p = traj.position(n, k);
        if (!map.contains(p.x(), p.y())) {
          c.fail(at(n, k) + " outside the map");
          continue;
        }
        c.excess(map.depth_at(p.x(), p.y()) + map.clearance() - p.z(), opt.geometric_tol, at(n, k));
        if (k < K) {
          const Eigen::Vector3d mid = 0.5 * (p + traj.position(n, k + 1));
          if (map.contains(mid.x(), mid.y()) && !map.collision_free(mid)) ++grazes;
        }
      }
    }
    if (grazes > 0) rep.notes.push_back(std::to_string(grazes) + " segment midpoint(s) below floor clearance");
    rep.checks.push_back(c.done());
  }

  if (opt.check_graphs && graphs.steps.size() == std::size_t(K) + 1) {
    Check c("C1_13 line of sight");
    for (int k = 1; k <= K; ++k) {
      for (const auto& [i, j] : graphs.steps[std::size_t(k)].a2a.edges) {
        const Eigen::Vector3d a = traj.position(i, k), b = traj.position(j, k);
        if (!map.contains(a.x(), a.y()) || !map.contains(b.x(), b.y())) {
          c.fail("edge " + std::to_string(i + 1) + "-" + std::to_string(j + 1) + " k=" + std::to_string(k) +
                 " outside the map");
          continue;
        }
        if (!los_clear(map, a, b, opt.los_resolution)) {
          c.fail("edge " + std::to_string(i + 1) + "-" + std::to_string(j + 1) + " k=" + std::to_string(k));
        }
      }
    }
    rep.checks.push_back(c.done());
  }

  {
    Check c("C1_14 heading rate");
    int skipped = 0;
    for (int n = 0; n < N; ++n) {
      const double limit = sys.params[std::size_t(n)].max_heading_rate;
      for (int k = 1; k <= K; ++k) {
        const Eigen::Vector2d prev = traj.velocity(n, k - 1).head<2>(), cur = traj.velocity(n, k).head<2>();
        if (prev.isZero(0.0) || cur.isZero(0.0)) {
          ++skipped;
          continue;
        }
        c.excess(std::abs(heading_change(prev, cur, sys.dt)) - limit, opt.heading_tol, at(n, k));
      }
    }
    if (skipped > 0) rep.notes.push_back(std::to_string(skipped) + " heading check(s) skipped at zero speed");
    rep.checks.push_back(c.done());
  }

  if (opt.check_rings && opt.check_graphs && graphs.steps.size() == std::size_t(K) + 1) {
    Check cu("C5 A2U ring"), ca("C5 A2A ring");
    for (int k = 1; k <= K; ++k) {
      const StepGraphs& g = graphs.steps[std::size_t(k)];
      auto ring = [&](Check& c, const Eigen::Vector3d& a, const Eigen::Vector3d& b, double range, const std::string& where) {
        const double d = (a - b).norm();
        // (range - d_t - tol, range + tol]
        c.excess(std::max(d - range, (range - w.d_t) - d), opt.geometric_tol, where);
      };
      if (k >= opt.first_a2u_ring_step) {
        const int n = g.a2u.selected;
        ring(cu, traj.position(n, k), traj.usv3(k), graphs.range(k, {kUsvNode, n}, w.d_s), at(n, k));
      }
      if (k >= opt.first_a2a_ring_step) {
        for (const Edge& e : g.a2a.edges) {
          ring(ca, traj.position(e.first, k), traj.position(e.second, k), graphs.range(k, e, w.d_s),
               "edge " + std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1) + " k=" + std::to_string(k));
        }
      }
    }
    rep.checks.push_back(cu.done());
    rep.checks.push_back(ca.done());
  }
  return rep;
}

}  // namespace auvmpc
