#include <doctest.h>

#include "auvmpc/qp_engine.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace auvmpc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

SparseMatrix sparse(const MatrixXd& m) { return m.sparseView(); }

ConvexProgram box_program(const MatrixXd& h, const VectorXd& g, const VectorXd& lo, const VectorXd& hi) {
  const Eigen::Index n = g.size();
  ConvexProgram p(n);
  p.hessian = sparse(h);
  p.linear = g;
  MatrixXd a(2 * n, n);
  a << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
  p.a_in = sparse(a);
  p.b_in.resize(2 * n);
  p.b_in << hi, -lo;
  return p;
}

MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = g(rng);
  return r.transpose() * r + 0.5 * MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("ball projection") {
  const VectorXd c = VectorXd::Zero(2);
  CHECK(project_ball(VectorXd::Constant(2, 0.1), c, 1.0) == VectorXd::Constant(2, 0.1));
  VectorXd v(2);
  v << 2, 0;
  VectorXd e(2);
  e << 1, 0;
  CHECK(project_ball(v, c, 1.0) == e);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    VectorXd x(4), ctr(4);
    for (int j = 0; j < 4; ++j) {
      x(j) = 10 * g(rng);
      ctr(j) = g(rng);
    }
    const double r = 0.5 + std::abs(g(rng));
    if ((x - ctr).norm() <= r) continue;
    const VectorXd q = project_ball(x, ctr, r);
    CHECK((q - ctr).norm() == doctest::Approx(r).epsilon(1e-12));
    const VectorXd u = (x - ctr).normalized(), w = (q - ctr).normalized();
    CHECK(u.dot(w) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("active bound") {
  // min (x-1)^2 s.t. x <= 0
  ConvexProgram p(1);
  p.hessian = sparse(MatrixXd::Constant(1, 1, 2.0));
  p.linear = VectorXd::Constant(1, -2.0);
  p.constant = 1.0;
  p.add_inequality(Eigen::SparseVector<double>(1), 0.0);
  p.a_in.coeffRef(0, 0) = 1.0;
  const auto r = solve(p);
  REQUIRE(r.ok());
  CHECK(r.x(0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::abs(r.x(0)) < 1e-6);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.y_in(0) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("unconstrained programs match a direct solve") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd h = random_spd(rng, 10);
    VectorXd lin(10);
    for (int i = 0; i < 10; ++i) lin(i) = g(rng);
    ConvexProgram p(10);
    p.hessian = sparse(h);
    p.linear = lin;
    const auto r = solve(p);
    REQUIRE(r.ok());
    const VectorXd oracle = -h.ldlt().solve(lin);
    CHECK((r.x - oracle).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("exterior point projects onto the unit ball") {
  // min ||x - (3, 0)||^2 s.t. ||x|| <= 1
  ConvexProgram p(2);
  p.hessian = sparse(2 * MatrixXd::Identity(2, 2));
  p.linear = VectorXd::Zero(2);
  p.linear(0) = -6;
  p.constant = 9;
  p.balls.push_back(BallConstraint::on_indices({0, 1}, 2, VectorXd::Zero(2), 1.0));
  const auto r = solve(p);
  REQUIRE(r.ok());
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(std::abs(r.x(1)) < 1e-5);
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-5));
}

TEST_CASE("equality constrained least norm") {
  // min ||x||^2 s.t. x0 + x1 + x2 = 3
  ConvexProgram p(3);
  p.hessian = sparse(2 * MatrixXd::Identity(3, 3));
  Eigen::SparseVector<double> row(3);
  row.insert(0) = 1;
  row.insert(1) = 1;
  row.insert(2) = 1;
  p.add_equality(row, 3.0);
  const auto r = solve(p);
  REQUIRE(r.ok());
  CHECK((r.x - VectorXd::Ones(3)).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(r.y_eq(0) == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("general affine ball") {
  // min -x0 s.t. ||(x0 - x1, x1) - (1, 0)|| <= 2 and x1 = 1
  ConvexProgram p(2);
  p.linear << -1, 0;
  BallConstraint b;
  b.map = sparse((MatrixXd(2, 2) << 1, -1, 0, 1).finished());
  b.center = (VectorXd(2) << 1, 0).finished();
  b.radius = 2;
  p.balls.push_back(b);
  Eigen::SparseVector<double> row(2);
  row.insert(1) = 1;
  p.add_equality(row, 1.0);
  const auto r = solve(p, 1e-8, 20000);
  REQUIRE(r.ok());
  // x0 - 1 - 1 = sqrt(4 - 1)
  CHECK(r.x(0) == doctest::Approx(2 + std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("infeasibility is detected") {
  ConvexProgram p(2);
  p.hessian = sparse(MatrixXd::Identity(2, 2));
  Eigen::SparseVector<double> row(2);
  row.insert(0) = 1;
  p.add_inequality(row, -1.0);
  p.balls.push_back(BallConstraint::on_indices({0, 1}, 2, VectorXd::Zero(2), 0.5));
  const auto r = solve(p);
  CHECK(r.status == SolveStatus::infeasible);

  ConvexProgram q(1);
  q.hessian = sparse(MatrixXd::Identity(1, 1));
  q.add_equality(Eigen::SparseVector<double>(1), 1.0);
  CHECK(solve(q).status == SolveStatus::infeasible);
}

TEST_CASE("iteration cap is reported") {
  std::mt19937_64 rng(3);
  const MatrixXd h = random_spd(rng, 6);
  ConvexProgram p = box_program(h, VectorXd::Constant(6, 5.0), VectorXd::Constant(6, -1), VectorXd::Constant(6, 1));
  const auto r = solve(p, 1e-12, 3);
  CHECK(r.status == SolveStatus::max_iterations);
  CHECK(r.iterations == 3);
  CHECK(r.x.size() == 6);
}

TEST_CASE("program validation") {
  ConvexProgram p(2);
  p.hessian = sparse((MatrixXd(2, 2) << 1, 1, 0, 1).finished());
  CHECK_THROWS_AS(solve(p), ProgramError);
  ConvexProgram q(2);
  q.balls.push_back(BallConstraint::on_indices({0}, 2, VectorXd::Zero(1), 0.0));
  CHECK_THROWS_AS(solve(q), ProgramError);
  CHECK_THROWS_AS(BallConstraint::on_indices({3}, 2, VectorXd::Zero(1), 1.0), ProgramError);
}

TEST_CASE("solves are deterministic") {
  std::mt19937_64 rng(13);
  const MatrixXd h = random_spd(rng, 8);
  VectorXd g = VectorXd::LinSpaced(8, -3, 4);
  ConvexProgram p = box_program(h, g, VectorXd::Constant(8, -0.2), VectorXd::Constant(8, 0.3));
  p.balls.push_back(BallConstraint::on_indices({0, 2, 4}, 8, VectorXd::Constant(3, 0.1), 0.25));
  const auto a = solve(p);
  const auto b = solve(p);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_residual == b.primal_residual);
}

TEST_CASE("merit is monotone between step-size changes") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd h = random_spd(rng, 6);
    VectorXd lin(6);
    for (int i = 0; i < 6; ++i) lin(i) = 3 * g(rng);
    ConvexProgram p = box_program(h, lin, VectorXd::Constant(6, -1), VectorXd::Constant(6, 0.5));
    p.balls.push_back(BallConstraint::on_indices({1, 3}, 6, VectorXd::Zero(2), 0.6));
    SolverSettings s;
    s.record_merit = true;
    s.alpha = 1.0;
    const auto r = solve(p, s);
    REQUIRE(r.ok());
    std::size_t seg_start = 1;
    std::size_t next_update = 0;
    for (std::size_t i = 1; i < r.merit.size(); ++i) {
      const int it = static_cast<int>(i) + 1;  // merit[i] belongs to iteration i + 1
      if (next_update < r.rho_updates.size() && it > r.rho_updates[next_update]) {
        ++next_update;
        seg_start = i + 1;
        continue;
      }
      if (i >= seg_start) CHECK(r.merit[i] <= r.merit[i - 1] * (1 + 1e-9) + 1e-300);
    }
  }
}

TEST_CASE("optimum beats every point of a feasible grid") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng);
    const MatrixXd h = random_spd(rng, n);
    VectorXd lin(n);
    for (int i = 0; i < n; ++i) lin(i) = 2 * g(rng);
    const VectorXd lo = VectorXd::Constant(n, -1.0), hi = VectorXd::Constant(n, 1.0);
    ConvexProgram p = box_program(h, lin, lo, hi);
    p.balls.push_back(BallConstraint::on_indices([&] {
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) idx[std::size_t(i)] = i;
      return idx;
    }(), n, VectorXd::Constant(n, 0.2), 1.1));
    const auto r = solve(p, 1e-8, 50000);
    REQUIRE(r.ok());
    const double best = p.objective(r.x);
    const int steps = n <= 2 ? 40 : (n == 3 ? 16 : 8);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = -1.0 + 2.0 * idx[std::size_t(i)] / steps;
      if ((x - VectorXd::Constant(n, 0.2)).norm() <= 1.1) CHECK_MESSAGE(best <= p.objective(x) + 1e-6 * std::max(1.0, std::abs(best)), (best - p.objective(x)) << " prim " << r.primal_residual << " dual " << r.dual_residual << " it " << r.iterations);
      int k = 0;
      while (k < n && ++idx[std::size_t(k)] > steps) idx[std::size_t(k++)] = 0;
      if (k == n) break;
    }
  }
}

TEST_CASE("warm start reuses the previous iterate") {
  std::mt19937_64 rng(31);
  const MatrixXd h = random_spd(rng, 10);
  VectorXd lin = VectorXd::LinSpaced(10, -5, 5);
  ConvexProgram p = box_program(h, lin, VectorXd::Constant(10, -0.5), VectorXd::Constant(10, 0.5));
  const auto cold = solve(p);
  REQUIRE(cold.ok());
  SolverSettings s;
  s.warm_start = &cold.warm;
  const auto warm = solve(p, s);
  REQUIRE(warm.ok());
  CHECK(warm.iterations <= cold.iterations);
  CHECK((warm.x - cold.x).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("program dump lists every block") {
  ConvexProgram p(2);
  p.hessian = sparse(MatrixXd::Identity(2, 2));
  p.balls.push_back(BallConstraint::on_indices({0}, 2, VectorXd::Zero(1), 1.0));
  std::ostringstream os;
  dump_program(p, os);
  const std::string text = os.str();
  for (const char* key : {"n 2", "H 2 2 2", "A_eq 0 2 0", "A_in 0 2 0", "balls 1", "radius 1"}) {
    CHECK(text.find(key) != std::string::npos);
  }
}
