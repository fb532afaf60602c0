#include "auvmpc/consensus_graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

namespace auvmpc {

A2uAssignment solve_a2u(const std::vector<Eigen::Vector3d>& auv_positions, const Eigen::Vector2d& usv_position) {
  if (auv_positions.empty()) throw std::invalid_argument("need at least one AUV");
  const Eigen::Vector3d usv(usv_position.x(), usv_position.y(), 0.0);
  A2uAssignment out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < auv_positions.size(); ++n) {
    const double d = (auv_positions[n] - usv).norm();
    if (d < best) {
      best = d;
      out.selected = static_cast<int>(n);
    }
  }
  out.sigma.assign(auv_positions.size(), 0);
  out.sigma[std::size_t(out.selected)] = 1;
  return out;
}

namespace {

void check_distances(const Eigen::MatrixXd& dist) {
  if (dist.rows() != dist.cols()) throw std::invalid_argument("distance matrix must be square");
  if (dist.rows() < 1) throw std::invalid_argument("need at least one node");
  if (!dist.allFinite()) throw std::invalid_argument("distances must be finite");
}

EdgeList path_edges(const std::vector<int>& order) {
  EdgeList e;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    e.emplace_back(std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1]));
  }
  std::sort(e.begin(), e.end());
  return e;
}

double order_weight(const Eigen::MatrixXd& dist, const std::vector<int>& order) {
  double w = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const double d = dist(order[i], order[i + 1]);
    w += d * d;
  }
  return w;
}

// Weights within this relative gap count as ties.
bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

class PathDp {
 public:
  explicit PathDp(const Eigen::MatrixXd& dist) : dist_(dist), n_(int(dist.rows())) {
    const std::size_t states = std::size_t(1) << n_;
    best_.assign(states * std::size_t(n_), -std::numeric_limits<double>::infinity());
    for (int v = 0; v < n_; ++v) at(1u << v, v) = 0.0;
    for (unsigned mask = 1; mask < states; ++mask) {
      for (int v = 0; v < n_; ++v) {
        if (!(mask & (1u << v))) continue;
        const double cur = at(mask, v);
        if (!std::isfinite(cur)) continue;
        for (int u = 0; u < n_; ++u) {
          if (mask & (1u << u)) continue;
          const double d = dist_(v, u);
          double& next = at(mask | (1u << u), u);
          next = std::max(next, cur + d * d);
        }
      }
    }
  }

  [[nodiscard]] double optimum() const {
    double best = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < n_; ++v) best = std::max(best, at(full(), v));
    return best;
  }

  // Lexicographically smallest edge set among the optimal paths.
  [[nodiscard]] EdgeList smallest_optimal(int max_paths) const {
    const double opt = optimum();
    std::optional<EdgeList> best;
    int found = 0;
    std::vector<int> rev;
    for (int v = 0; v < n_ && found < max_paths; ++v) {
      if (!same_value(at(full(), v), opt)) continue;
      rev.assign(1, v);
      walk(full(), v, rev, best, found, max_paths);
    }
    return *best;
  }

 private:
  [[nodiscard]] unsigned full() const { return (1u << n_) - 1; }
  double& at(unsigned mask, int v) { return best_[std::size_t(mask) * std::size_t(n_) + std::size_t(v)]; }
  [[nodiscard]] double at(unsigned mask, int v) const {
    return best_[std::size_t(mask) * std::size_t(n_) + std::size_t(v)];
  }

  void walk(unsigned mask, int v, std::vector<int>& rev, std::optional<EdgeList>& best, int& found,
            int max_paths) const {
    if (found >= max_paths) return;
    const unsigned rest = mask & ~(1u << v);
    if (rest == 0) {
      ++found;
      EdgeList e = path_edges(rev);
      if (!best || e < *best) best = std::move(e);
      return;
    }
    for (int u = 0; u < n_; ++u) {
      if (!(rest & (1u << u))) continue;
      const double d = dist_(u, v);
      if (!same_value(at(rest, u) + d * d, at(mask, v))) continue;
      rev.push_back(u);
      walk(rest, u, rev, best, found, max_paths);
      rev.pop_back();
    }
  }

  const Eigen::MatrixXd& dist_;
  int n_;
  std::vector<double> best_;
};

std::vector<int> greedy_order(const Eigen::MatrixXd& dist, int start) {
  const int n = int(dist.rows());
  std::vector<int> order{start};
  std::vector<bool> used(std::size_t(n), false);
  used[std::size_t(start)] = true;
  while (int(order.size()) < n) {
    int next = -1;
    for (int u = 0; u < n; ++u) {
      if (used[std::size_t(u)]) continue;
      if (next < 0 || dist(order.back(), u) > dist(order.back(), next)) next = u;
    }
    used[std::size_t(next)] = true;
    order.push_back(next);
  }
  return order;
}

// Segment reversals, including ones touching an endpoint, until no gain.
void two_opt(const Eigen::MatrixXd& dist, std::vector<int>& order) {
  const int n = int(order.size());
  auto sq = [&](int a, int b) { return dist(a, b) * dist(a, b); };
  bool improved = true;
  while (improved) {
    improved = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        // reverse order[i..j]
        double before = 0.0, after = 0.0;
        if (i > 0) {
          before += sq(order[std::size_t(i - 1)], order[std::size_t(i)]);
          after += sq(order[std::size_t(i - 1)], order[std::size_t(j)]);
        }
        if (j < n - 1) {
          before += sq(order[std::size_t(j)], order[std::size_t(j + 1)]);
          after += sq(order[std::size_t(i)], order[std::size_t(j + 1)]);
        }
        if (after > before * (1 + 1e-12) + 1e-12) {
          std::reverse(order.begin() + i, order.begin() + j + 1);
          improved = true;
        }
      }
    }
  }
}

}  // namespace

A2aTree solve_a2a(const Eigen::MatrixXd& dist, const A2aOptions& opt) {
  check_distances(dist);
  const int n = int(dist.rows());
  if (n == 1) return {};
  if (n <= opt.exact_threshold && n <= 24) {
    const PathDp dp(dist);
    return {dp.smallest_optimal(std::max(1, opt.max_tie_paths))};
  }
  std::optional<EdgeList> best;
  double best_w = -1.0;
  for (int s = 0; s < n; ++s) {
    std::vector<int> order = greedy_order(dist, s);
    two_opt(dist, order);
    const double w = order_weight(dist, order);
    EdgeList e = path_edges(order);
    if (!best || (w > best_w && !same_value(w, best_w)) || (same_value(w, best_w) && e < *best)) {
      best_w = std::max(w, best_w);
      best = std::move(e);
    }
  }
  return {*best};
}

A2aTree solve_a2a_brute_force(const Eigen::MatrixXd& dist) {
  check_distances(dist);
  const int n = int(dist.rows());
  if (n > 10) throw std::invalid_argument("brute force limited to 10 nodes");
  if (n == 1) return {};
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::optional<EdgeList> best;
  double best_w = -1.0;
  do {
    if (order.front() > order.back()) continue;
    const double w = order_weight(dist, order);
    if (best && w < best_w && !same_value(w, best_w)) continue;
    EdgeList e = path_edges(order);
    if (!best || !same_value(w, best_w)) {
      best_w = w;
      best = std::move(e);
    } else if (e < *best) {
      best = std::move(e);
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return {*best};
}

ClusterReport detect_clustering(const EdgeList& edges, int n) {
  if (n < 0) throw std::invalid_argument("node count must be non-negative");
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[std::size_t(x)] != x) {
      parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
      x = parent[std::size_t(x)];
    }
    return x;
  };
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("edge index out of range");
    const int a = find(i), b = find(j);
    if (a != b) parent[std::size_t(std::max(a, b))] = std::min(a, b);
  }
  ClusterReport r;
  r.component_of.resize(std::size_t(n));
  std::vector<int> label(std::size_t(n), -1);
  for (int v = 0; v < n; ++v) {
    const int root = find(v);
    if (label[std::size_t(root)] < 0) label[std::size_t(root)] = r.components++;
    r.component_of[std::size_t(v)] = label[std::size_t(root)];
  }
  return r;
}

bool is_hamiltonian_path(const EdgeList& edges, int n) {
  if (n < 1) return false;
  if (int(edges.size()) != n - 1) return false;
  std::vector<int> degree(std::size_t(n), 0);
  std::set<Edge> seen;
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) return false;
    if (!seen.emplace(std::min(i, j), std::max(i, j)).second) return false;
    ++degree[std::size_t(i)];
    ++degree[std::size_t(j)];
  }
  for (int d : degree) {
    if (n > 1 && (d < 1 || d > 2)) return false;
  }
  return detect_clustering(edges, n).components == 1;
}

double p6_objective(const Eigen::MatrixXd& dist, const EdgeList& edges, double d_s) {
  double s = 0.0;
  for (const auto& [i, j] : edges) s += d_s - dist(i, j);
  return s;
}

double path_weight(const Eigen::MatrixXd& dist, const EdgeList& edges) {
  double s = 0.0;
  for (const auto& [i, j] : edges) s += dist(i, j) * dist(i, j);
  return s;
}

Eigen::MatrixXd distance_matrix(const std::vector<Eigen::Vector3d>& points) {
  const auto n = Eigen::Index(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (points[std::size_t(i)] - points[std::size_t(j)]).norm();
    }
  }
  return d;
}

}  // namespace auvmpc
