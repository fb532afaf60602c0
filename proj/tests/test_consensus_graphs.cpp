#include "auvmpc/consensus_graphs.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace auvmpc;

namespace {

std::vector<Eigen::Vector3d> random_points(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  std::vector<Eigen::Vector3d> p;
  for (int i = 0; i < n; ++i) p.emplace_back(u(rng), u(rng), u(rng));
  return p;
}

}  // namespace

TEST_CASE("a2u picks the nearest AUV with lowest-index ties") {
  const Eigen::Vector2d usv(0, 0);
  CHECK(solve_a2u({{10, 0, -5}}, usv).selected == 0);
  const auto a = solve_a2u({{300, 0, 0}, {0, 100, 0}, {0, 0, -200}}, usv);
  CHECK(a.selected == 1);
  CHECK(a.sigma == std::vector<int>{0, 1, 0});
  CHECK(solve_a2u({{0, 50, 0}, {0, 80, 0}, {50, 0, 0}}, usv).selected == 0);
  CHECK_THROWS_AS((void)solve_a2u({}, usv), std::invalid_argument);
}

TEST_CASE("a2u is invariant under translation") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    auto p = random_points(rng, 6);
    const Eigen::Vector2d usv(3, -4);
    const int base = solve_a2u(p, usv).selected;
    const Eigen::Vector3d shift(1234.5, -77.25, 0.0);
    for (auto& q : p) q += shift;
    CHECK(solve_a2u(p, usv + shift.head<2>()).selected == base);
  }
}

TEST_CASE("a2a small cases") {
  Eigen::MatrixXd d2(2, 2);
  d2 << 0, 5, 5, 0;
  CHECK(solve_a2a(d2).edges == EdgeList{{0, 1}});

  // collinear points at 0, 1, 10
  Eigen::MatrixXd d3(3, 3);
  d3 << 0, 1, 10, 1, 0, 9, 10, 9, 0;
  const auto t = solve_a2a(d3);
  CHECK(t.edges == EdgeList{{0, 2}, {1, 2}});
  CHECK(path_weight(d3, t.edges) == doctest::Approx(181.0));
}

TEST_CASE("a2a ties resolve to the smallest edge list") {
  // every path on 4 equidistant nodes ties
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(4, 4, 1.0);
  d.diagonal().setZero();
  CHECK(solve_a2a(d).edges == EdgeList{{0, 1}, {0, 2}, {1, 3}});
  CHECK(solve_a2a_brute_force(d).edges == solve_a2a(d).edges);
}

TEST_CASE("a2a dynamic program matches exhaustive search") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const int n = 2 + t % 7;
    const Eigen::MatrixXd d = distance_matrix(random_points(rng, n));
    const auto dp = solve_a2a(d);
    const auto bf = solve_a2a_brute_force(d);
    REQUIRE(dp.edges == bf.edges);
  }
}

TEST_CASE("a2a output is a single path") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 9;
    const auto tree = solve_a2a(distance_matrix(random_points(rng, n)));
    REQUIRE(is_hamiltonian_path(tree.edges, n));
    REQUIRE(detect_clustering(tree.edges, n).components == 1);
  }
}

TEST_CASE("a2a heuristic above the exact threshold") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const int n = 6 + t % 4;
    const Eigen::MatrixXd d = distance_matrix(random_points(rng, n));
    const auto h = solve_a2a(d, {.exact_threshold = 2});
    CHECK(is_hamiltonian_path(h.edges, n));
    // within a few percent of the optimum on small instances
    CHECK(path_weight(d, h.edges) >= 0.9 * path_weight(d, solve_a2a(d).edges));
  }
  const Eigen::MatrixXd big = distance_matrix(random_points(rng, 30));
  CHECK(is_hamiltonian_path(solve_a2a(big).edges, 30));
}

TEST_CASE("a2a relabeling and scaling invariance") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + t % 6;
    const Eigen::MatrixXd d = distance_matrix(random_points(rng, n));
    const auto base = solve_a2a(d).edges;

    CHECK(solve_a2a(3.5 * d).edges == base);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd pd(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) pd(perm[std::size_t(i)], perm[std::size_t(j)]) = d(i, j);
    }
    EdgeList mapped;
    for (auto [i, j] : base) {
      const int a = perm[std::size_t(i)], b = perm[std::size_t(j)];
      mapped.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(mapped.begin(), mapped.end());
    CHECK(solve_a2a(pd).edges == mapped);
  }
}

TEST_CASE("clustering") {
  CHECK(detect_clustering({{0, 1}, {1, 2}, {2, 3}}, 4).components == 1);
  // two disjoint pairs, as a shortest tree can produce
  const auto r = detect_clustering({{0, 1}, {2, 3}}, 4);
  CHECK(r.components == 2);
  CHECK(r.clustered());
  CHECK(r.component_of == std::vector<int>{0, 0, 1, 1});
  CHECK(detect_clustering({}, 3).components == 3);
}

TEST_CASE("hamiltonian path predicate") {
  CHECK(is_hamiltonian_path({{0, 1}, {1, 2}}, 3));
  CHECK_FALSE(is_hamiltonian_path({{0, 1}}, 3));
  CHECK_FALSE(is_hamiltonian_path({{0, 1}, {0, 2}, {0, 3}}, 4));  // star
  CHECK_FALSE(is_hamiltonian_path({{0, 1}, {0, 1}}, 3));
  CHECK(is_hamiltonian_path({}, 1));
}

TEST_CASE("p6 objective") {
  Eigen::MatrixXd d(2, 2);
  d << 0, 150, 150, 0;
  CHECK(p6_objective(d, {{0, 1}}, 150) == 0.0);
  d << 0, 75, 75, 0;
  CHECK(p6_objective(d, {{0, 1}}, 150) == 75.0);

  // minimizing p6 over all paths picks the path of largest total length
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd dist = distance_matrix(random_points(rng, 5));
    std::vector<int> order{0, 1, 2, 3, 4};
    double best_p6 = 1e300, best_len_of_p6 = 0, best_len = 0;
    do {
      if (order.front() > order.back()) continue;
      EdgeList e;
      double len = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        e.emplace_back(std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1]));
        len += dist(order[i], order[i + 1]);
      }
      const double p6 = p6_objective(dist, e, 150);
      if (p6 < best_p6) {
        best_p6 = p6;
        best_len_of_p6 = len;
      }
      best_len = std::max(best_len, len);
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(best_len_of_p6 == doctest::Approx(best_len));
  }
}
