#include "auvmpc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace auvmpc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

StackedSystem build_stacked(int n_auv, const std::vector<VehicleParams>& params, double dt, int steps) {
  if (n_auv < 1) throw std::invalid_argument("need at least one AUV");
  if (steps < 2) throw std::invalid_argument("horizon needs at least two steps");
  if (!(dt > 0)) throw std::invalid_argument("sampling time must be positive");
  if (params.size() != std::size_t(n_auv) && params.size() != 1) {
    throw std::invalid_argument("need one parameter set per AUV");
  }

  StackedSystem s;
  s.n_auv = n_auv;
  s.steps = steps;
  s.dt = dt;
  s.params = params.size() == 1 ? std::vector<VehicleParams>(std::size_t(n_auv), params[0]) : params;
  for (const auto& p : s.params) p.validate();

  const Index nx = s.nx(), nu = s.nu();
  s.a = MatrixXd::Zero(nx, nx);
  s.b = MatrixXd::Zero(nx, nu);
  s.a.topLeftCorner<2, 2>().setIdentity();
  s.b.topLeftCorner<2, 2>() = dt * Eigen::Matrix2d::Identity();
  for (int n = 0; n < n_auv; ++n) {
    const Index r = StackedSystem::auv_state(n), c = StackedSystem::auv_input(n);
    s.a.block<6, 6>(r, r) = auv_state_matrix(s.params[std::size_t(n)], dt);
    s.b.block<6, 3>(r, c) = auv_input_matrix();
  }

  // A^k and A^k B for k = 0..K-1
  std::vector<MatrixXd> power(std::size_t(steps) + 1);
  power[0] = MatrixXd::Identity(nx, nx);
  for (int k = 1; k <= steps; ++k) power[std::size_t(k)] = s.a * power[std::size_t(k) - 1];
  std::vector<MatrixXd> apb(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) apb[std::size_t(k)] = power[std::size_t(k)] * s.b;

  s.a_powers.resize(steps * nx, nx);
  for (int k = 1; k <= steps; ++k) s.a_powers.middleRows((k - 1) * nx, nx) = power[std::size_t(k)];

  s.b_steps.resize(std::size_t(steps));
  for (int k = 0; k < steps; ++k) {
    MatrixXd m(nx, (k + 1) * nu);
    for (int j = 0; j <= k; ++j) m.middleCols(j * nu, nu) = apb[std::size_t(k - j)];
    s.b_steps[std::size_t(k)] = std::move(m);
  }

  s.b_full = MatrixXd::Zero(steps * nx, steps * nu);
  for (int i = 0; i < steps; ++i) {
    for (int j = 0; j <= i; ++j) s.b_full.block(i * nx, j * nu, nx, nu) = apb[std::size_t(i - j)];
  }

  s.depth_sum = Eigen::RowVectorXd::Zero(nx);
  s.position_sum = MatrixXd::Zero(3, nx);
  s.velocity_sum = MatrixXd::Zero(3, nx);
  s.usv_position = MatrixXd::Zero(3, nx);
  s.usv_position.topLeftCorner<2, 2>().setIdentity();
  for (int n = 0; n < n_auv; ++n) {
    const Index r = StackedSystem::auv_state(n);
    Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(nx);
    z(r + 2) = 1.0;
    MatrixXd p = MatrixXd::Zero(3, nx), v = MatrixXd::Zero(3, nx);
    p.middleCols<3>(r).setIdentity();
    v.middleCols<3>(r + 3).setIdentity();
    s.depth_sum += z;
    s.position_sum += p;
    s.velocity_sum += v;
    s.depth.push_back(z);
    s.position.push_back(p);
    s.velocity.push_back(v);
  }
  return s;
}

std::vector<Eigen::Vector3d> Trajectory::positions(int k) const {
  std::vector<Eigen::Vector3d> out;
  for (int n = 0; n < n_auv(); ++n) out.push_back(position(n, k));
  return out;
}

VectorXd Trajectory::stacked_inputs() const {
  if (inputs.empty()) return {};
  const Index nu = inputs[0].size();
  VectorXd u(nu * Index(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) u.segment(Index(k) * nu, nu) = inputs[k];
  return u;
}

Trajectory rollout(const StackedSystem& sys, const VectorXd& x0, const VectorXd& stacked_inputs) {
  const Index nx = sys.nx(), nu = sys.nu();
  if (x0.size() != nx) throw std::invalid_argument("initial state has wrong dimension");
  if (stacked_inputs.size() != sys.steps * nu) throw std::invalid_argument("input sequence has wrong length");
  const VectorXd stacked = sys.a_powers * x0 + sys.b_full * stacked_inputs;
  Trajectory t;
  t.states.push_back(x0);
  for (int k = 0; k < sys.steps; ++k) {
    t.states.push_back(stacked.segment(k * nx, nx));
    t.inputs.push_back(stacked_inputs.segment(k * nu, nu));
  }
  return t;
}

Trajectory rollout(const StackedSystem& sys, const VectorXd& x0, const std::vector<VectorXd>& inputs) {
  if (inputs.size() != std::size_t(sys.steps)) throw std::invalid_argument("input sequence has wrong length");
  const Index nu = sys.nu();
  VectorXd u(sys.steps * nu);
  for (int k = 0; k < sys.steps; ++k) {
    if (inputs[std::size_t(k)].size() != nu) throw std::invalid_argument("input has wrong dimension");
    u.segment(k * nu, nu) = inputs[std::size_t(k)];
  }
  return rollout(sys, x0, u);
}

Trajectory rollout_iterative(const StackedSystem& sys, const VectorXd& x0, const std::vector<VectorXd>& inputs) {
  if (inputs.size() != std::size_t(sys.steps)) throw std::invalid_argument("input sequence has wrong length");
  Trajectory t;
  t.states.push_back(x0);
  for (int k = 0; k < sys.steps; ++k) {
    const VectorXd& x = t.states.back();
    const VectorXd& u = inputs[std::size_t(k)];
    VectorXd next(x.size());
    UsvState usv{x.head<2>(), u.head<2>()};
    next.head<2>() = usv_step(usv, sys.dt).position;
    for (int n = 0; n < sys.n_auv; ++n) {
      const Index r = StackedSystem::auv_state(n);
      const LinearState s{x.segment<3>(r), x.segment<3>(r + 3)};
      const Eigen::Vector3d in = u.segment<3>(StackedSystem::auv_input(n));
      const LinearState out = discrete_step(s, in, sys.params[std::size_t(n)], sys.dt);
      next.segment<3>(r) = out.position;
      next.segment<3>(r + 3) = out.velocity;
    }
    t.states.push_back(std::move(next));
    t.inputs.push_back(u);
  }
  return t;
}

void PlanWeights::validate() const {
  for (double w : {w1, w2, w3, w4, w5, w6, w7, w8, w82}) {
    if (!(w >= 0)) throw ParameterError("objective weights must be non-negative");
  }
  if (!(d_t > 0)) throw ParameterError("d_t must be positive");
  if (!(d_t < d_s)) throw ParameterError("d_t must be smaller than d_s");
  if (!(d_s < d_max)) throw ParameterError("d_s must be smaller than d_max");
  if (!(surface_clearance >= 0)) throw ParameterError("surface_clearance must be non-negative");
}

double GraphSchedule::range(int k, const Edge& e, double d_s) const {
  if (k < 0 || std::size_t(k) >= ranges.size()) return d_s;
  const auto& m = ranges[std::size_t(k)];
  const auto it = m.find(e);
  return it == m.end() ? d_s : it->second;
}

namespace {

// value = a * U + c
struct Affine {
  MatrixXd a;
  VectorXd c;
};

class StateMap {
 public:
  StateMap(const StackedSystem& sys, const VectorXd& x0) : sys_(sys), x0_(x0) {
    free_.push_back(x0);
    for (int k = 1; k <= sys.steps; ++k) free_.push_back(sys.a_powers.middleRows((k - 1) * sys.nx(), sys.nx()) * x0);
  }

  // k in 0..K+1; K+1 is the free propagation one step past the horizon
  [[nodiscard]] Affine of(int k, const MatrixXd& sel) const {
    const Index n = sys_.steps * sys_.nu();
    if (k == 0) return {MatrixXd::Zero(sel.rows(), n), sel * x0_};
    if (k == sys_.steps + 1) {
      const MatrixXd s = sel * sys_.a;
      return of(sys_.steps, s);
    }
    return {sel * sys_.b_full.middleRows((k - 1) * sys_.nx(), sys_.nx()), sel * free_[std::size_t(k)]};
  }
  [[nodiscard]] Affine auv_pos(int n, int k) const { return of(k, sys_.position[std::size_t(n)]); }
  [[nodiscard]] Affine auv_vel(int n, int k) const { return of(k, sys_.velocity[std::size_t(n)]); }
  [[nodiscard]] Affine usv_pos(int k) const { return of(k, sys_.usv_position); }

 private:
  const StackedSystem& sys_;
  VectorXd x0_;
  std::vector<VectorXd> free_;
};

Affine minus(const Affine& x, const Affine& y) { return {x.a - y.a, x.c - y.c}; }

Eigen::SparseVector<double> sparse_row(const Eigen::RowVectorXd& r) {
  Eigen::SparseVector<double> v(r.size());
  for (Index i = 0; i < r.size(); ++i) {
    if (r(i) != 0.0) v.insert(i) = r(i);
  }
  return v;
}

class Builder {
 public:
  Builder(const ProblemContext& ctx, AssemblyNotes* notes)
      : ctx_(ctx), sys_(*ctx.sys), map_(sys_, ctx.x0), prog_(sys_.steps * sys_.nu()), notes_(notes) {
    if (ctx.x0.size() != sys_.nx()) throw std::invalid_argument("initial state has wrong dimension");
    ctx.weights.validate();
  }

  ConvexProgram& program() { return prog_; }
  const StateMap& states() const { return map_; }

  // coefficient row and constant: row . U + c <= bound; `bound_free` omits the margin
  void le(const Eigen::RowVectorXd& row, double c, double bound, double bound_free, const std::string& label) {
    if (row.isZero(0)) {
      if (c > bound_free + 1e-9) {
        warn(label + ": fixed value violates its bound");
        if (notes_) ++notes_->infeasible_constant_rows;
        prog_.add_inequality(Eigen::SparseVector<double>(prog_.size()), -1.0, label);
      }
      return;
    }
    prog_.add_inequality(sparse_row(row), bound - c, label);
  }

  void ball(const Affine& e, const VectorXd& center, double radius, double radius_free, const std::string& label) {
    if (e.a.isZero(0)) {
      if ((e.c - center).norm() > radius_free + 1e-9) {
        warn(label + ": fixed value violates its bound");
        if (notes_) ++notes_->infeasible_constant_rows;
        prog_.add_inequality(Eigen::SparseVector<double>(prog_.size()), -1.0, label);
      }
      return;
    }
    BallConstraint b;
    b.map = e.a.sparseView();
    b.center = center - e.c;
    b.radius = radius;
    b.label = label;
    prog_.balls.push_back(std::move(b));
  }

  void warn(const std::string& w) {
    if (notes_) notes_->warnings.push_back(w);
  }

  void objective_p2() {
    const PlanWeights& w = ctx_.weights;
    const Index n = prog_.size();
    MatrixXd h = 2 * w.w1 * MatrixXd::Identity(n, n);
    VectorXd g = VectorXd::Zero(n);
    double constant = 0.0;
    if (w.w2 != 0.0) {
      for (int k = 1; k <= sys_.steps; ++k) {
        const Affine z = map_.of(k, sys_.depth_sum);
        g += w.w2 * z.a.row(0).transpose();
        constant += w.w2 * z.c(0);
      }
    }
    if (w.target && w.w82 != 0.0) {
      const Affine p = map_.usv_pos(sys_.steps);
      const Eigen::Vector3d t(w.target->x(), w.target->y(), 0.0);
      const VectorXd r = p.c - t;
      h += 2 * w.w82 * p.a.transpose() * p.a;
      g += 2 * w.w82 * p.a.transpose() * r;
      constant += w.w82 * r.squaredNorm();
    }
    prog_.hessian = h.sparseView();
    prog_.linear = g;
    prog_.constant = constant;
  }

  void waypoint_rows(int n, int k, double floor_depth, bool lookahead) {
    const AssemblyOptions& o = ctx_.options;
    const PlanWeights& w = ctx_.weights;
    const Affine pos = map_.auv_pos(n, k);
    const std::string tag = "[n=" + std::to_string(n + 1) + ",k=" + std::to_string(k) + "]";
    const double m = o.geometric_margin;
    // surface: z <= -surface_clearance
    le(pos.a.row(2), pos.c(2), -w.surface_clearance - m, -w.surface_clearance, "surface" + tag);
    // floor: z >= floor + clearance
    if (ctx_.map) {
      const double eps = ctx_.map->clearance();
      le(-pos.a.row(2), -pos.c(2), -(floor_depth + eps + m), -(floor_depth + eps), "floor" + tag);
      if (o.map_extent) {
        const Eigen::Vector2d lo = ctx_.map->origin(), hi = ctx_.map->upper_corner();
        for (int c = 0; c < 2; ++c) {
          le(pos.a.row(c), pos.c(c), hi(c) - m, hi(c), "extent" + tag);
          le(-pos.a.row(c), -pos.c(c), -lo(c) - m, -lo(c), "extent" + tag);
        }
      }
    }
    if (lookahead) {
      const Affine rel = minus(pos, map_.usv_pos(sys_.steps));
      ball(rel, VectorXd::Zero(3), w.d_s - m, w.d_s, "lookahead_range" + tag);
      return;
    }
    const Affine rel = minus(pos, map_.usv_pos(k));
    ball(rel, VectorXd::Zero(3), w.d_max - m, w.d_max, "d_max" + tag);
    if (k == sys_.steps) ball(rel, VectorXd::Zero(3), w.d_s - m, w.d_s, "terminal_range" + tag);
    const double vmax = sys_.params[std::size_t(n)].max_speed;
    ball(map_.auv_vel(n, k), VectorXd::Zero(3), vmax - o.speed_margin, vmax, "speed" + tag);
  }

  void heading_rows(int n) {
    const AssemblyOptions& o = ctx_.options;
    const VehicleParams& p = sys_.params[std::size_t(n)];
    const Eigen::Vector2d v0 = ctx_.x0.segment<2>(StackedSystem::auv_state(n) + 3);
    const HeadingBand first = heading_rate_linear_constraints(v0, p);
    const HeadingBand rest = heading_rate_linear_constraints(ctx_.heading_reference[std::size_t(n)], p);
    const bool moving = v0.norm() > 1e-9;
    for (int k = moving ? 1 : 2; k <= sys_.steps; ++k) {
      const Affine cur = map_.auv_vel(n, k), prev = map_.auv_vel(n, k - 1);
      const HeadingBand& band = k == 1 ? first : rest;
      for (int c = 0; c < 2; ++c) {
        const HeadingBandRow& row = c == 0 ? band.x : band.y;
        const double s = row.orientation;
        const std::string tag = "[n=" + std::to_string(n + 1) + ",k=" + std::to_string(k) + "]";
        // s (V[k] - (1 + a) V[k-1]) < 0
        const Eigen::RowVectorXd up = s * (cur.a.row(c) + row.upper_prev_coeff * prev.a.row(c));
        const double up_c = s * (cur.c(c) + row.upper_prev_coeff * prev.c(c));
        le(up, up_c, -o.strict_margin, 0.0, "heading_upper" + tag);
        // s (V[k] - (1 - a) V[k-1]) > 0
        const Eigen::RowVectorXd lo = -s * (cur.a.row(c) + row.lower_prev_coeff * prev.a.row(c));
        const double lo_c = -s * (cur.c(c) + row.lower_prev_coeff * prev.c(c));
        le(lo, lo_c, -o.strict_margin, 0.0, "heading_lower" + tag);
      }
    }
  }

  void base_constraints(const FloorProfile& floor) {
    if (ctx_.map && (floor.rows() != sys_.n_auv || floor.cols() != sys_.steps + 2)) {
      throw std::invalid_argument("floor profile must be N x (K + 2)");
    }
    for (int n = 0; n < sys_.n_auv; ++n) {
      for (int k = 1; k <= sys_.steps; ++k) waypoint_rows(n, k, ctx_.map ? floor(n, k) : 0.0, false);
      if (ctx_.options.lookahead) waypoint_rows(n, sys_.steps + 1, ctx_.map ? floor(n, sys_.steps + 1) : 0.0, true);
    }
    if (ctx_.options.heading_band && !ctx_.heading_reference.empty()) {
      if (ctx_.heading_reference.size() != std::size_t(sys_.n_auv)) {
        throw std::invalid_argument("heading reference needs one entry per AUV");
      }
      for (int n = 0; n < sys_.n_auv; ++n) heading_rows(n);
    }
  }

  // Ring d - d_t <= |e| <= d around the reference direction.
  void ring(const Affine& rel, const VectorXd& ref, double range, const std::string& label) {
    const AssemblyOptions& o = ctx_.options;
    const PlanWeights& w = ctx_.weights;
    if (rel.a.isZero(0)) {
      warn(label + ": edge fixed at this step, ring skipped");
      return;
    }
    ball(rel, VectorXd::Zero(3), range - o.geometric_margin, range, "ring_upper" + label);
    const double lower = range - w.d_t;
    if (lower <= 0) return;
    const double len = ref.norm();
    if (len < 1e-6) {
      warn(label + ": degenerate reference edge, lower ring bound dropped");
      return;
    }
    const VectorXd dir = ref / len;
    const Eigen::RowVectorXd row = -(dir.transpose() * rel.a);
    le(row, -dir.dot(rel.c), -(lower + o.geometric_margin), -lower, "ring_lower" + label);
  }

 private:
  const ProblemContext& ctx_;
  const StackedSystem& sys_;
  StateMap map_;
  ConvexProgram prog_;
  AssemblyNotes* notes_;
};

}  // namespace

ConvexProgram assemble_p2(const ProblemContext& ctx, const FloorProfile& floor, AssemblyNotes* notes) {
  if (!ctx.sys) throw std::invalid_argument("problem context has no system");
  Builder b(ctx, notes);
  b.objective_p2();
  b.base_constraints(floor);
  return std::move(b.program());
}

ConvexProgram assemble_p5(const ProblemContext& ctx, const FloorProfile& floor, const GraphSchedule& graphs,
                          const Trajectory& reference, AssemblyNotes* notes) {
  if (!ctx.sys) throw std::invalid_argument("problem context has no system");
  const StackedSystem& sys = *ctx.sys;
  if (graphs.steps.size() != std::size_t(sys.steps) + 1) throw std::invalid_argument("graph schedule must cover k = 0..K");
  if (reference.states.size() != std::size_t(sys.steps) + 1) throw std::invalid_argument("missing reference trajectory");
  if (reference.n_auv() != sys.n_auv) throw std::invalid_argument("reference trajectory has wrong dimension");

  Builder b(ctx, notes);
  b.objective_p2();
  b.base_constraints(floor);
  ConvexProgram& prog = b.program();
  const PlanWeights& w = ctx.weights;
  const int N = sys.n_auv;

  for (int k = 1; k <= sys.steps; ++k) {
    const StepGraphs& g = graphs.steps[std::size_t(k)];
    const std::string kt = ",k=" + std::to_string(k) + "]";

    if (k >= ctx.options.first_a2u_ring_step) {
      const int n = g.a2u.selected;
      const Affine u_rel = minus(b.states().auv_pos(n, k), b.states().usv_pos(k));
      b.ring(u_rel, reference.position(n, k) - reference.usv3(k), graphs.range(k, {kUsvNode, n}, w.d_s),
             "[a2u n=" + std::to_string(n + 1) + kt);
    }

    for (const Edge& e : g.a2a.edges) {
      if (k < ctx.options.first_a2a_ring_step) break;
      const Affine rel = minus(b.states().auv_pos(e.first, k), b.states().auv_pos(e.second, k));
      b.ring(rel, reference.position(e.first, k) - reference.position(e.second, k), graphs.range(k, e, w.d_s),
             "[a2a " + std::to_string(e.first + 1) + "-" + std::to_string(e.second + 1) + kt);
    }

    if (w.w5 == 0.0) continue;
    for (int i = 0; i < N; ++i) {
      for (int j = i + 1; j < N; ++j) {
        if (std::find(g.a2a.edges.begin(), g.a2a.edges.end(), Edge{i, j}) != g.a2a.edges.end()) continue;
        const Affine rel = minus(b.states().auv_pos(i, k), b.states().auv_pos(j, k));
        const VectorXd ref = reference.position(i, k) - reference.position(j, k);
        // -w5 |r|^2 ~ -w5 (2 ref.r - |ref|^2)
        prog.linear -= 2 * w.w5 * rel.a.transpose() * ref;
        prog.constant -= w.w5 * (2 * ref.dot(rel.c) - ref.squaredNorm());
      }
    }
  }
  return std::move(prog);
}

namespace {

double floor_at(const SeafloorMap& map, double x, double y, double radius = 0.0) {
  const Eigen::Vector2d lo = map.origin(), hi = map.upper_corner();
  return map.max_depth_near(std::clamp(x, lo.x(), hi.x()), std::clamp(y, lo.y(), hi.y()), radius);
}

}  // namespace

FloorProfile floor_under(const SeafloorMap& map, const StackedSystem& sys, const Trajectory& traj, double radius) {
  FloorProfile f(sys.n_auv, sys.steps + 2);
  for (int n = 0; n < sys.n_auv; ++n) {
    for (int k = 0; k <= sys.steps; ++k) {
      const Eigen::Vector3d p = traj.position(n, k);
      f(n, k) = floor_at(map, p.x(), p.y(), radius);
    }
    const Eigen::Vector3d next = traj.position(n, sys.steps) + sys.dt * traj.velocity(n, sys.steps);
    f(n, sys.steps + 1) = floor_at(map, next.x(), next.y(), radius);
  }
  return f;
}

FloorProfile initial_floor_profile(const SeafloorMap& map, const StackedSystem& sys, const VectorXd& x0) {
  FloorProfile f(sys.n_auv, sys.steps + 2);
  for (int n = 0; n < sys.n_auv; ++n) {
    const Index r = StackedSystem::auv_state(n);
    f.row(n).setConstant(floor_at(map, x0(r), x0(r + 1)));
  }
  return f;
}

FloorIterationResult floor_profile_iterate(const ProblemContext& ctx, FloorProfile start, bool replace_first,
                                           const std::function<ConvexProgram(const FloorProfile&)>& build,
                                           const FloorIterationOptions& opt) {
  if (!ctx.sys || !ctx.map) throw std::invalid_argument("floor iteration needs a system and a map");
  if (opt.max_iterations < 1) throw std::invalid_argument("iteration cap must be at least 1");
  const StackedSystem& sys = *ctx.sys;
  const SeafloorMap& map = *ctx.map;

  FloorIterationResult res;
  FloorProfile profile = std::move(start);
  std::optional<Trajectory> previous;
  WarmStart warm;
  bool have_warm = false;

  for (int it = 1; it <= opt.max_iterations; ++it) {
    const ConvexProgram prog = build(profile);
    SolverSettings settings;
    settings.tol = opt.tol;
    settings.max_iter = opt.max_solver_iterations;
    if (have_warm) settings.warm_start = &warm;
    SolveReport report = solve(prog, settings);
    res.iterations = it;
    res.profile = profile;
    res.trajectory = rollout(sys, ctx.x0, report.x);
    res.solved = report.ok();
    warm = report.warm;
    have_warm = true;
    res.report = std::move(report);
    if (!res.solved) {
      res.warnings.push_back("solver returned " + to_string(res.report.status) + " at floor iteration " +
                             std::to_string(it));
      return res;
    }

    const FloorProfile actual = floor_under(map, sys, res.trajectory);
    bool clear = true;
    for (int n = 0; n < sys.n_auv && clear; ++n) {
      for (int k = 1; k <= sys.steps + (ctx.options.lookahead ? 1 : 0); ++k) {
        double z;
        if (k <= sys.steps) {
          z = res.trajectory.position(n, k).z();
        } else {
          z = res.trajectory.position(n, sys.steps).z() + sys.dt * res.trajectory.velocity(n, sys.steps).z();
        }
        if (z < actual(n, k) + map.clearance()) {
          clear = false;
          break;
        }
      }
    }
    double displacement = std::numeric_limits<double>::infinity();
    if (previous) {
      displacement = 0.0;
      for (int n = 0; n < sys.n_auv; ++n) {
        for (int k = 1; k <= sys.steps; ++k) {
          displacement = std::max(displacement, (res.trajectory.position(n, k).head<2>() -
                                                 previous->position(n, k).head<2>()).norm());
        }
      }
    }
    // the profile takes the floor around each waypoint so that small shifts
    // between solves do not creep into the clearance
    const double radius = opt.profile_radius.value_or(map.cell().norm());
    const FloorProfile seen = radius > 0 ? floor_under(map, sys, res.trajectory, radius) : actual;
    FloorProfile next = (it == 1 && replace_first) ? seen : profile.cwiseMax(seen);
    next.col(0) = actual.col(0);
    const bool unchanged = next == profile;
    if (clear && (unchanged || displacement < opt.displacement_threshold)) {
      res.converged = true;
      return res;
    }
    previous = res.trajectory;
    profile = std::move(next);
  }
  res.warnings.push_back("floor profile did not converge within " + std::to_string(opt.max_iterations) +
                         " iterations");
  return res;
}

FloorIterationResult floor_profile_iterate(const ProblemContext& ctx, const FloorIterationOptions& opt) {
  if (!ctx.sys || !ctx.map) throw std::invalid_argument("floor iteration needs a system and a map");
  return floor_profile_iterate(
      ctx, initial_floor_profile(*ctx.map, *ctx.sys, ctx.x0), true,
      [&ctx](const FloorProfile& f) { return assemble_p2(ctx, f); }, opt);
}

}  // namespace auvmpc
