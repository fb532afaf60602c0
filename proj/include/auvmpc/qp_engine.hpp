#pragma once

// Operator-splitting solver for convex quadratic programs with linear
// equalities, linear inequalities and Euclidean-ball constraints.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace auvmpc {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class ProgramError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// ||map * x - center||_2 <= radius.
///
/// Index-set balls are the special case where `map` selects coordinates.
struct BallConstraint {
  SparseMatrix map;
  Eigen::VectorXd center;
  double radius = 0.0;
  std::string label;

  static BallConstraint on_indices(const std::vector<Eigen::Index>& indices, Eigen::Index n,
                                   Eigen::VectorXd center, double radius, std::string label = {});
};

/// min 0.5 x'Hx + g'x + constant
/// s.t. A_eq x = b_eq, A_in x <= b_in, and every ball constraint.
struct ConvexProgram {
  SparseMatrix hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  SparseMatrix a_eq;
  Eigen::VectorXd b_eq;
  SparseMatrix a_in;
  Eigen::VectorXd b_in;
  std::vector<BallConstraint> balls;
  std::vector<std::string> in_labels;  // optional, one per inequality row

  explicit ConvexProgram(Eigen::Index n = 0);

  [[nodiscard]] Eigen::Index size() const { return linear.size(); }
  [[nodiscard]] double objective(const Eigen::VectorXd& x) const;

  /// Throws ProgramError on inconsistent dimensions, asymmetric H or bad radii.
  void validate() const;

  void add_inequality(const Eigen::SparseVector<double>& row, double bound, std::string label = {});
  void add_equality(const Eigen::SparseVector<double>& row, double value);
};

enum class SolveStatus { optimal, max_iterations, infeasible };

std::string to_string(SolveStatus s);

/// Solver state carried between solves of structurally identical programs.
struct WarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd z;  // scaled constraint-space iterate
  Eigen::VectorXd y;  // scaled duals
  double rho = 0.0;
};

struct SolveReport {
  Eigen::VectorXd x;
  SolveStatus status = SolveStatus::max_iterations;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double objective = 0.0;
  // multipliers in original units
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  std::vector<Eigen::VectorXd> y_ball;
  // merit trace (only when requested) and iterations where the step size changed
  std::vector<double> merit;
  std::vector<int> rho_updates;
  WarmStart warm;

  [[nodiscard]] bool ok() const { return status == SolveStatus::optimal; }
};

struct SolverSettings {
  double tol = 1e-6;
  int max_iter = 20000;
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;  // over-relaxation
  double equality_rho_scale = 1e3;
  bool adaptive_rho = true;
  int adapt_interval = 50;
  int check_interval = 10;
  double infeasibility_tol = 1e-6;
  bool record_merit = false;
  const WarmStart* warm_start = nullptr;
};

SolveReport solve(const ConvexProgram& p, const SolverSettings& settings);
SolveReport solve(const ConvexProgram& p, double tol = 1e-6, int max_iter = 20000);

/// Euclidean projection onto the ball of `radius` around `center`.
Eigen::VectorXd project_ball(const Eigen::VectorXd& v, const Eigen::VectorXd& center, double radius);

/// Absolute constraint violation of x: max over equality error, inequality
/// excess and ball excess.
double max_violation(const ConvexProgram& p, const Eigen::VectorXd& x);

/// Plain-text dump of every matrix in the program (triplet form).
void dump_program(const ConvexProgram& p, std::ostream& os);

}  // namespace auvmpc
