#pragma once

// Per-step communication graphs: the AUV-to-USV anchor and the AUV-to-AUV
// longest Hamiltonian path.

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace auvmpc {

/// Node index used for the surface vehicle in edge lists.
inline constexpr int kUsvNode = -1;

using Edge = std::pair<int, int>;  // (i, j) with i < j, zero-based AUV indices
using EdgeList = std::vector<Edge>;

struct A2uAssignment {
  int selected = 0;        // zero-based AUV index
  std::vector<int> sigma;  // one 0/1 flag per AUV
};

struct A2aTree {
  EdgeList edges;  // sorted, each (i, j) with i < j
};

struct StepGraphs {
  A2uAssignment a2u;
  A2aTree a2a;
};

/// Nearest AUV to the surface vehicle (3D distance to the USV at z = 0).
/// Ties go to the lowest index.
A2uAssignment solve_a2u(const std::vector<Eigen::Vector3d>& auv_positions, const Eigen::Vector2d& usv_position);

struct A2aOptions {
  int exact_threshold = 15;  // bitmask DP up to this many nodes
  int max_tie_paths = 10000;
};

/// Hamiltonian path maximizing the sum of squared edge lengths.
/// Ties resolve to the lexicographically smallest sorted edge list.
A2aTree solve_a2a(const Eigen::MatrixXd& dist, const A2aOptions& opt = {});

/// Edge list of the best path found by exhaustive enumeration (reference
/// implementation, n <= 9).
A2aTree solve_a2a_brute_force(const Eigen::MatrixXd& dist);

struct ClusterReport {
  int components = 0;
  std::vector<int> component_of;  // per node
  [[nodiscard]] bool clustered() const { return components > 1; }
};

ClusterReport detect_clustering(const EdgeList& edges, int n);

/// True iff the edges form a single path through all n nodes.
bool is_hamiltonian_path(const EdgeList& edges, int n);

/// Sum over edges of (d_s - d_ij).
double p6_objective(const Eigen::MatrixXd& dist, const EdgeList& edges, double d_s);

/// Sum of squared lengths of the edges.
double path_weight(const Eigen::MatrixXd& dist, const EdgeList& edges);

Eigen::MatrixXd distance_matrix(const std::vector<Eigen::Vector3d>& points);

}  // namespace auvmpc
