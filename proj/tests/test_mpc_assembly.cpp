#include "auvmpc/mpc.hpp"

#include <doctest.h>

#include <random>

using namespace auvmpc;
using Eigen::VectorXd;

namespace {

SeafloorMap flat_map(double depth, double half = 3000.0) {
  return SeafloorMap({-half, -half}, {100.0, 100.0}, Eigen::MatrixXd::Constant(61, 61, depth) * 1.0, 5.0);
}

VectorXd initial_state(const Eigen::Vector2d& usv, const std::vector<Eigen::Vector3d>& auvs,
                       const std::vector<Eigen::Vector3d>& vel = {}) {
  VectorXd x = VectorXd::Zero(2 + 6 * Eigen::Index(auvs.size()));
  x.head<2>() = usv;
  for (std::size_t n = 0; n < auvs.size(); ++n) {
    x.segment<3>(StackedSystem::auv_state(int(n))) = auvs[n];
    if (!vel.empty()) x.segment<3>(StackedSystem::auv_state(int(n)) + 3) = vel[n];
  }
  return x;
}

std::vector<Eigen::Vector2d> still_reference(int n) { return std::vector<Eigen::Vector2d>(std::size_t(n), {1.0, 1.0}); }

SolveReport solve_ok(const ConvexProgram& p) {
  SolveReport r = solve(p);
  REQUIRE_MESSAGE(r.ok(), "status " << to_string(r.status));
  return r;
}

}  // namespace

TEST_CASE("stacked dimensions follow the printed formulas") {
  for (int n = 1; n <= 8; ++n) {
    for (int k = 2; k <= 20; ++k) {
      const StackedSystem s = build_stacked(n, {VehicleParams{}}, 100.0, k);
      REQUIRE(s.a.rows() == 2 + 6 * n);
      REQUIRE(s.a.cols() == 2 + 6 * n);
      REQUIRE(s.b.rows() == 2 + 6 * n);
      REQUIRE(s.b.cols() == 2 + 3 * n);
      REQUIRE(s.a_powers.rows() == k * (2 + 6 * n));
      REQUIRE(s.a_powers.cols() == 2 + 6 * n);
      REQUIRE(s.b_full.rows() == k * (2 + 6 * n));
      REQUIRE(s.b_full.cols() == k * (2 + 3 * n));
      REQUIRE(s.b_steps.size() == std::size_t(k));
      for (int j = 0; j < k; ++j) {
        REQUIRE(s.b_steps[std::size_t(j)].rows() == 2 + 6 * n);
        REQUIRE(s.b_steps[std::size_t(j)].cols() == (j + 1) * (2 + 3 * n));
      }
      REQUIRE(s.depth_sum.cols() == 2 + 6 * n);
      REQUIRE(s.position.size() == std::size_t(n));
    }
  }
  const StackedSystem s = build_stacked(5, {VehicleParams{}}, 100.0, 20);
  CHECK(s.b_full.rows() == 640);
  CHECK(s.b_full.cols() == 340);
}

TEST_CASE("stacked system structure") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 4);
  // lower block triangular with A^(i-j) B entries
  const Eigen::Index nx = s.nx(), nu = s.nu();
  CHECK(s.b_full.block(0, nu, nx, nu).isZero(0));
  CHECK(s.b_full.block(3 * nx, 0, nx, nu).isApprox(s.a * s.a * s.a * s.b));
  CHECK(s.b_steps[3].isApprox(s.b_full.middleRows(3 * nx, nx)));

  const VectorXd x = VectorXd::LinSpaced(nx, 1, double(nx));
  CHECK(s.position[1] * x == x.segment<3>(8));
  CHECK(s.velocity[0] * x == x.segment<3>(5));
  CHECK((s.usv_position * x).isApprox(Eigen::Vector3d(1, 2, 0)));
  CHECK((s.depth_sum * x)(0) == x(4) + x(10));
  CHECK((s.position_sum * x).isApprox(x.segment<3>(2) + x.segment<3>(8)));

  // dt -> 0 gives the identity
  const StackedSystem tiny = build_stacked(2, {VehicleParams{}}, 1e-12, 3);
  CHECK(tiny.a.isApprox(Eigen::MatrixXd::Identity(nx, nx), 1e-10));

  CHECK_THROWS((void)build_stacked(0, {VehicleParams{}}, 1.0, 3));
  CHECK_THROWS((void)build_stacked(1, {VehicleParams{}}, 1.0, 1));
  CHECK_THROWS((void)build_stacked(3, {VehicleParams{}, VehicleParams{}}, 1.0, 3));
}

TEST_CASE("stacked rollout equals iterated stepping") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 4, k = 2 + t % 9;
    VehicleParams p;
    p.drag_x = -0.1 - 0.3 * (u(rng) + 1);
    p.drag_z = -0.1 - 0.3 * (u(rng) + 1);
    const StackedSystem s = build_stacked(n, {p}, 10.0 + 40 * (u(rng) + 1), k);
    VectorXd x0(s.nx());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = 100 * u(rng);
    std::vector<VectorXd> inputs;
    for (int j = 0; j < k; ++j) {
      VectorXd in(s.nu());
      for (Eigen::Index i = 0; i < in.size(); ++i) in(i) = u(rng);
      inputs.push_back(in);
    }
    const Trajectory a = rollout(s, x0, inputs);
    const Trajectory b = rollout_iterative(s, x0, inputs);
    for (int j = 0; j <= k; ++j) {
      worst = std::max(worst, (a.states[std::size_t(j)] - b.states[std::size_t(j)]).cwiseAbs().maxCoeff());
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("rollout simple motions") {
  VehicleParams p;
  p.drag_x = p.drag_y = p.drag_z = 0.0;
  const StackedSystem s = build_stacked(1, {p}, 100.0, 5);
  const VectorXd x0 = initial_state({0, 0}, {{10, 20, -30}}, {{0.5, -0.25, 0.1}});
  const Trajectory t = rollout(s, x0, VectorXd::Zero(5 * s.nu()));
  for (int k = 0; k <= 5; ++k) {
    CHECK(t.position(0, k).isApprox(Eigen::Vector3d(10, 20, -30) + k * 100.0 * Eigen::Vector3d(0.5, -0.25, 0.1)));
  }
  const Trajectory still = rollout(s, initial_state({1, 2}, {{0, 0, -5}}), VectorXd::Zero(5 * s.nu()));
  CHECK(still.position(0, 5) == Eigen::Vector3d(0, 0, -5));
  CHECK(still.usv(5) == Eigen::Vector2d(1, 2));
  CHECK_THROWS((void)rollout(s, x0, VectorXd::Zero(3)));
}

TEST_CASE("weights validation") {
  PlanWeights w;
  CHECK_NOTHROW(w.validate());
  w.d_t = 200;
  CHECK_THROWS_AS(w.validate(), ParameterError);
  w = PlanWeights{};
  w.w3 = -1;
  CHECK_THROWS_AS(w.validate(), ParameterError);
}

TEST_CASE("p2 with zero weights is feasible with zero objective") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 4);
  const SeafloorMap map = flat_map(-500);
  PlanWeights w;
  w.w1 = w.w2 = w.w5 = w.w82 = 0.0;
  ProblemContext ctx{&s, w, initial_state({0, 0}, {{50, 0, -40}, {-30, 40, -60}}), &map, still_reference(2), {}};
  const ConvexProgram p = assemble_p2(ctx, initial_floor_profile(map, s, ctx.x0));
  CHECK(p.size() == 4 * s.nu());
  const SolveReport r = solve_ok(p);
  CHECK(r.objective == doctest::Approx(0.0));
  const Trajectory t = rollout(s, ctx.x0, r.x);
  ValidationOptions vo;
  vo.check_graphs = false;
  CHECK(validate_constraints(t, {}, w, map, s, vo).all_pass());
}

TEST_CASE("p2 pins depth to the floor when depth is rewarded") {
  VehicleParams p;
  const StackedSystem s = build_stacked(1, {p}, 10.0, 3);
  const SeafloorMap map = flat_map(-100);
  PlanWeights w;
  w.w1 = 1e-7;
  w.w2 = 1.0;
  w.w82 = 0.0;
  ProblemContext ctx{&s, w, initial_state({0, 0}, {{0, 0, -80}}), &map, still_reference(1), {}};
  ctx.options.heading_band = false;
  const SolveReport r = solve_ok(assemble_p2(ctx, initial_floor_profile(map, s, ctx.x0)));
  const Trajectory t = rollout(s, ctx.x0, r.x);
  CHECK(t.position(0, 1).z() == doctest::Approx(-80));
  for (int k = 2; k <= 3; ++k) CHECK(t.position(0, k).z() == doctest::Approx(-95.0).epsilon(1e-3));
}

TEST_CASE("p2 drives the USV toward a far target") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 10);
  const SeafloorMap map = flat_map(-800, 5000);
  PlanWeights w;
  w.w2 = 0.0;
  w.target = Eigen::Vector2d(4000, 3000);
  ProblemContext ctx{&s, w, initial_state({0, 0}, {{40, 10, -30}, {-20, -60, -50}}), &map, still_reference(2), {}};
  const SolveReport r = solve_ok(assemble_p2(ctx, initial_floor_profile(map, s, ctx.x0)));
  const Trajectory t = rollout(s, ctx.x0, r.x);
  // a straight line, closing in on the target
  const Eigen::Vector2d dir = t.usv(10).normalized();
  for (int k = 1; k <= 10; ++k) {
    CHECK(std::abs(dir.x() * t.usv(k).y() - dir.y() * t.usv(k).x()) < 0.5);
    CHECK((t.usv(k) - *w.target).norm() < (t.usv(k - 1) - *w.target).norm());
  }
  for (int n = 0; n < 2; ++n) CHECK((t.position(n, 10) - t.usv3(10)).norm() <= 150.0 + 1e-3);
  ValidationOptions vo;
  vo.check_graphs = false;
  const auto rep = validate_constraints(t, {}, w, map, s, vo);
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << " " << c.detail);
}

TEST_CASE("p2 optimum satisfies the heading band rows") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 8);
  const SeafloorMap map = flat_map(-800, 5000);
  PlanWeights w;
  w.target = Eigen::Vector2d(-3000, 1000);
  const VectorXd x0 = initial_state({0, 0}, {{40, 10, -30}, {-20, -60, -50}}, {{-0.5, 0.3, 0}, {-0.4, 0.2, 0.1}});
  std::vector<Eigen::Vector2d> ref{{-0.5, 0.3}, {-0.4, 0.2}};
  ProblemContext ctx{&s, w, x0, &map, ref, {}};
  const SolveReport r = solve_ok(assemble_p2(ctx, initial_floor_profile(map, s, x0)));
  const Trajectory t = rollout(s, x0, r.x);
  const double a = VehicleParams{}.heading_band_ratio();
  for (int n = 0; n < 2; ++n) {
    for (int k = 1; k <= 8; ++k) {
      for (int c = 0; c < 2; ++c) {
        const double s_c = ref[std::size_t(n)](c) < 0 ? -1.0 : 1.0;
        const double cur = t.velocity(n, k)(c), prev = t.velocity(n, k - 1)(c);
        CHECK(s_c * (cur - (1 + a) * prev) <= 1e-6);
        CHECK(s_c * (cur - (1 - a) * prev) >= -1e-6);
      }
    }
  }
}

TEST_CASE("fixed rows that violate their bound make the program infeasible") {
  const StackedSystem s = build_stacked(1, {VehicleParams{}}, 100.0, 3);
  const SeafloorMap map = flat_map(-500);
  PlanWeights w;
  // AUV already moving toward the floor: k = 1 is fixed below it
  const VectorXd x0 = initial_state({0, 0}, {{0, 0, -490}}, {{0, 0, -0.2}});
  ProblemContext ctx{&s, w, x0, &map, still_reference(1), {}};
  AssemblyNotes notes;
  const ConvexProgram p = assemble_p2(ctx, initial_floor_profile(map, s, x0), &notes);
  CHECK(notes.infeasible_constant_rows >= 1);
  CHECK(solve(p).status == SolveStatus::infeasible);
}

TEST_CASE("floor iteration") {
  const StackedSystem s = build_stacked(1, {VehicleParams{}}, 100.0, 6);
  PlanWeights w;
  w.w2 = 1e-3;
  w.target = Eigen::Vector2d(1500, 0);

  SUBCASE("flat floor converges at once") {
    const SeafloorMap map = flat_map(-400);
    ProblemContext ctx{&s, w, initial_state({0, 0}, {{0, 0, -50}}), &map, still_reference(1), {}};
    const auto res = floor_profile_iterate(ctx);
    CHECK(res.converged);
    CHECK(res.iterations == 1);
  }
  SUBCASE("seamount under the path") {
    SynthTerrainSpec spec;
    spec.base_depth = -400;
    spec.features.push_back({{800, 0}, 250, 250});
    const SeafloorMap map = synth_terrain(spec);
    ProblemContext ctx{&s, w, initial_state({0, 0}, {{0, 0, -50}}), &map, still_reference(1), {}};
    const auto res = floor_profile_iterate(ctx);
    REQUIRE(res.solved);
    CHECK(res.converged);
    CHECK(res.iterations >= 2);
    for (int k = 0; k <= 6; ++k) CHECK(map.collision_free(res.trajectory.position(0, k)));
  }
  SUBCASE("iteration cap") {
    SynthTerrainSpec spec;
    spec.base_depth = -400;
    spec.features.push_back({{800, 0}, 250, 250});
    const SeafloorMap map = synth_terrain(spec);
    ProblemContext ctx{&s, w, initial_state({0, 0}, {{0, 0, -50}}), &map, still_reference(1), {}};
    FloorIterationOptions opt;
    opt.displacement_threshold = 0.0;
    opt.max_iterations = 1;
    const auto res = floor_profile_iterate(ctx, opt);
    CHECK(res.iterations == 1);
  }
}

namespace {

GraphSchedule graphs_from(const Trajectory& ref) {
  GraphSchedule g;
  for (int k = 0; k <= ref.steps(); ++k) {
    const auto pos = ref.positions(k);
    g.steps.push_back({solve_a2u(pos, ref.usv(k)), solve_a2a(distance_matrix(pos))});
  }
  g.ranges.resize(g.steps.size());
  return g;
}

}  // namespace

TEST_CASE("p5 rings on a two-AUV pack") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 6);
  const SeafloorMap map = flat_map(-600, 5000);
  PlanWeights w;
  w.target = Eigen::Vector2d(1500, 500);
  ProblemContext ctx{&s, w, initial_state({0, 0}, {{60, 20, -40}, {-50, 10, -70}}), &map, still_reference(2), {}};
  const auto step1 = floor_profile_iterate(ctx);
  REQUIRE(step1.solved);
  const GraphSchedule g = graphs_from(step1.trajectory);
  const ConvexProgram p5 = assemble_p5(ctx, step1.profile, g, step1.trajectory);
  const SolveReport r = solve_ok(p5);
  const Trajectory t = rollout(s, ctx.x0, r.x);
  for (int k = 2; k <= 6; ++k) {
    const double d = (t.position(0, k) - t.position(1, k)).norm();
    CHECK(d <= 150 + 1e-3);
    CHECK(d >= 120 - 1e-3);
  }
  const auto rep = validate_constraints(t, g, w, map, s);
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.passed, c.name << " " << c.detail);

  // more constraints never lower the composite objective
  CHECK(composite_objective(t, w) >= composite_objective(step1.trajectory, w) - 1e-6);

  // a ring as wide as its range has no lower bound
  GraphSchedule degenerate = g;
  int edges = 0;
  for (int k = 1; k <= 6; ++k) {
    degenerate.ranges[std::size_t(k)][{kUsvNode, g.steps[std::size_t(k)].a2u.selected}] = w.d_t;
    for (const Edge& e : g.steps[std::size_t(k)].a2a.edges) degenerate.ranges[std::size_t(k)][e] = w.d_t;
    edges += 2;
  }
  AssemblyNotes notes;
  const ConvexProgram p5b = assemble_p5(ctx, step1.profile, degenerate, step1.trajectory, &notes);
  // the k = 1 AUV edge is fixed and carries no rows either way
  CHECK(p5.a_in.rows() - p5b.a_in.rows() == edges - 1);
}

TEST_CASE("p5 without repulsion keeps the p2 objective") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 4);
  const SeafloorMap map = flat_map(-600, 5000);
  PlanWeights w;
  w.w5 = 0.0;
  w.target = Eigen::Vector2d(1000, 0);
  ProblemContext ctx{&s, w, initial_state({0, 0}, {{60, 20, -40}, {-50, 10, -70}}), &map, still_reference(2), {}};
  const FloorProfile f = initial_floor_profile(map, s, ctx.x0);
  const ConvexProgram p2 = assemble_p2(ctx, f);
  const Trajectory ref = rollout(s, ctx.x0, VectorXd::Zero(4 * s.nu()));
  const ConvexProgram p5 = assemble_p5(ctx, f, graphs_from(ref), ref);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    VectorXd x(p2.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = nd(rng);
    CHECK(p5.objective(x) == doctest::Approx(p2.objective(x)));
    CHECK(p2.objective(x) == doctest::Approx(composite_objective(rollout(s, ctx.x0, x), w)));
  }
}

TEST_CASE("objective evaluation") {
  const StackedSystem s = build_stacked(2, {VehicleParams{}}, 100.0, 2);
  const VectorXd x0 = initial_state({0, 0}, {{150, 0, 0}, {0, 0, -100}});
  const Trajectory t = rollout(s, x0, VectorXd::Zero(2 * s.nu()));
  PlanWeights w;
  GraphSchedule none;
  CHECK(evaluate_objectives(t, none, w).of1_1 == 0.0);

  GraphSchedule g;
  for (int k = 0; k <= 2; ++k) g.steps.push_back({{0, {1, 0}}, {{{0, 1}}}});
  const auto r = evaluate_objectives(t, g, w);
  CHECK(r.of1_3 == doctest::Approx(0.0));  // anchored edge exactly d_s long
  CHECK(r.of1_4 == doctest::Approx(2 * std::abs(std::hypot(150.0, 100.0) - 150.0)));
  CHECK(r.of1_5 == 0.0);
  CHECK(r.of1_6 == 2.0);
  CHECK(r.of1_7 == 2.0);
  CHECK(r.of1_2 == doctest::Approx(-200.0));

  GraphSchedule zero;
  for (int k = 0; k <= 2; ++k) zero.steps.push_back({{0, {0, 0}}, {}});
  const auto z = evaluate_objectives(t, zero, w);
  CHECK(z.of1_3 == 0.0);
  CHECK(z.of1_4 == 0.0);
  CHECK(z.of1_6 == 0.0);
  CHECK(z.of1_7 == 0.0);
}

TEST_CASE("objective evaluation is invariant under relabeling") {
  const StackedSystem s = build_stacked(3, {VehicleParams{}}, 100.0, 3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-100, 100);
  std::vector<Eigen::Vector3d> p;
  for (int n = 0; n < 3; ++n) p.emplace_back(u(rng), u(rng), -std::abs(u(rng)));
  VectorXd in(3 * s.nu());
  for (Eigen::Index i = 0; i < in.size(); ++i) in(i) = u(rng) / 100;
  const Trajectory t = rollout(s, initial_state({0, 0}, p), in);
  GraphSchedule g;
  for (int k = 0; k <= 3; ++k) {
    const auto pos = t.positions(k);
    g.steps.push_back({solve_a2u(pos, t.usv(k)), solve_a2a(distance_matrix(pos))});
  }
  // swap AUVs 0 and 2 in states, inputs and graphs
  const std::vector<int> perm{2, 1, 0};
  Trajectory q = t;
  for (auto& x : q.states) {
    const VectorXd old = x;
    for (int n = 0; n < 3; ++n) x.segment<6>(StackedSystem::auv_state(perm[std::size_t(n)])) = old.segment<6>(StackedSystem::auv_state(n));
  }
  for (auto& v : q.inputs) {
    const VectorXd old = v;
    for (int n = 0; n < 3; ++n) v.segment<3>(StackedSystem::auv_input(perm[std::size_t(n)])) = old.segment<3>(StackedSystem::auv_input(n));
  }
  GraphSchedule h = g;
  for (auto& st : h.steps) {
    st.a2u.selected = perm[std::size_t(st.a2u.selected)];
    std::vector<int> sigma(3);
    for (int n = 0; n < 3; ++n) sigma[std::size_t(perm[std::size_t(n)])] = st.a2u.sigma[std::size_t(n)];
    st.a2u.sigma = sigma;
    for (auto& [i, j] : st.a2a.edges) {
      const int a = perm[std::size_t(i)], b = perm[std::size_t(j)];
      i = std::min(a, b);
      j = std::max(a, b);
    }
  }
  PlanWeights w;
  w.w3 = w.w4 = w.w6 = w.w7 = 1.0;
  const auto a = evaluate_objectives(t, g, w), b = evaluate_objectives(q, h, w);
  CHECK(a.weighted_total == doctest::Approx(b.weighted_total));
  CHECK(a.of1_5 == doctest::Approx(b.of1_5));
  CHECK(a.of1_4 == doctest::Approx(b.of1_4));
}

TEST_CASE("validation flags corrupted plans") {
  const StackedSystem s = build_stacked(3, {VehicleParams{}}, 100.0, 3);
  const SeafloorMap map = flat_map(-500);
  const VectorXd x0 = initial_state({0, 0}, {{50, 0, -40}, {-50, 0, -40}, {0, 60, -40}});
  Trajectory t = rollout(s, x0, VectorXd::Zero(3 * s.nu()));
  GraphSchedule g;
  for (int k = 0; k <= 3; ++k) {
    const auto pos = t.positions(k);
    g.steps.push_back({solve_a2u(pos, t.usv(k)), solve_a2a(distance_matrix(pos))});
  }
  ValidationOptions vo;
  vo.check_rings = false;
  CHECK(validate_constraints(t, g, PlanWeights{}, map, s, vo).all_pass());

  Trajectory teleport = t;
  teleport.states[2](StackedSystem::auv_state(1)) += 40.0;
  const auto r1 = validate_constraints(teleport, g, PlanWeights{}, map, s, vo);
  CHECK_FALSE(r1.find("C1_1 dynamics")->passed);
  CHECK(r1.find("C1_1 dynamics")->worst > 0.05);

  GraphSchedule short_graph = g;
  short_graph.steps[2].a2a.edges.pop_back();
  CHECK_FALSE(validate_constraints(t, short_graph, PlanWeights{}, map, s, vo).find("C1_11 A2A path")->passed);

  GraphSchedule two_anchor = g;
  two_anchor.steps[1].a2u.sigma = {1, 1, 0};
  CHECK_FALSE(validate_constraints(t, two_anchor, PlanWeights{}, map, s, vo).find("C1_10 A2U anchor")->passed);
}
