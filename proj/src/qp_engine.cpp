#include "auvmpc/qp_engine.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace auvmpc {

BallConstraint BallConstraint::on_indices(const std::vector<Eigen::Index>& indices, Eigen::Index n,
                                          Eigen::VectorXd center, double radius, std::string label) {
  BallConstraint b;
  b.map.resize(static_cast<Eigen::Index>(indices.size()), n);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= n) throw ProgramError("ball index out of range");
    t.emplace_back(static_cast<Eigen::Index>(i), indices[i], 1.0);
  }
  b.map.setFromTriplets(t.begin(), t.end());
  b.center = std::move(center);
  b.radius = radius;
  b.label = std::move(label);
  return b;
}

ConvexProgram::ConvexProgram(Eigen::Index n)
    : hessian(n, n), linear(Eigen::VectorXd::Zero(n)), a_eq(0, n), b_eq(0), a_in(0, n), b_in(0) {}

double ConvexProgram::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

void ConvexProgram::validate() const {
  const Eigen::Index n = size();
  if (hessian.rows() != n || hessian.cols() != n) throw ProgramError("Hessian must be n x n");
  if (a_eq.cols() != n || a_eq.rows() != b_eq.size()) throw ProgramError("equality block dimensions mismatch");
  if (a_in.cols() != n || a_in.rows() != b_in.size()) throw ProgramError("inequality block dimensions mismatch");
  if (!in_labels.empty() && static_cast<Eigen::Index>(in_labels.size()) != a_in.rows()) {
    throw ProgramError("inequality labels must cover every row");
  }
  const SparseMatrix diff = SparseMatrix(hessian.transpose()) - hessian;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > 1e-10) throw ProgramError("Hessian is not symmetric");
    }
  }
  if (!linear.allFinite() || !b_eq.allFinite() || !b_in.allFinite()) throw ProgramError("non-finite program data");
  for (const auto& b : balls) {
    if (b.map.cols() != n || b.map.rows() != b.center.size()) throw ProgramError("ball dimensions mismatch");
    if (!(b.radius > 0)) throw ProgramError("ball radius must be positive");
  }
}

void ConvexProgram::add_inequality(const Eigen::SparseVector<double>& row, double bound, std::string label) {
  const Eigen::Index r = a_in.rows();
  a_in.conservativeResize(r + 1, size());
  for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it) a_in.insert(r, it.index()) = it.value();
  b_in.conservativeResize(r + 1);
  b_in(r) = bound;
  if (!label.empty() || !in_labels.empty()) {
    in_labels.resize(static_cast<std::size_t>(r));
    in_labels.push_back(std::move(label));
  }
}

void ConvexProgram::add_equality(const Eigen::SparseVector<double>& row, double value) {
  const Eigen::Index r = a_eq.rows();
  a_eq.conservativeResize(r + 1, size());
  for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it) a_eq.insert(r, it.index()) = it.value();
  b_eq.conservativeResize(r + 1);
  b_eq(r) = value;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iterations:
      return "max-iterations";
    case SolveStatus::infeasible:
      return "infeasible-detected";
  }
  return "unknown";
}

Eigen::VectorXd project_ball(const Eigen::VectorXd& v, const Eigen::VectorXd& center, double radius) {
  const Eigen::VectorXd d = v - center;
  const double norm = d.norm();
  if (norm <= radius) return v;
  return center + (radius / norm) * d;
}

double max_violation(const ConvexProgram& p, const Eigen::VectorXd& x) {
  double worst = 0.0;
  if (p.a_eq.rows() > 0) worst = std::max(worst, (p.a_eq * x - p.b_eq).cwiseAbs().maxCoeff());
  if (p.a_in.rows() > 0) worst = std::max(worst, (p.a_in * x - p.b_in).maxCoeff());
  for (const auto& b : p.balls) worst = std::max(worst, (b.map * x - b.center).norm() - b.radius);
  return worst;
}

void dump_program(const ConvexProgram& p, std::ostream& os) {
  const auto prec = os.precision(17);
  auto dump_sparse = [&os](const char* name, const SparseMatrix& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    for (int k = 0; k < m.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  };
  auto dump_vec = [&os](const char* name, const Eigen::VectorXd& v) {
    os << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << v(i) << '\n';
  };
  os << "n " << p.size() << "\nconstant " << p.constant << '\n';
  dump_sparse("H", p.hessian);
  dump_vec("g", p.linear);
  dump_sparse("A_eq", p.a_eq);
  dump_vec("b_eq", p.b_eq);
  dump_sparse("A_in", p.a_in);
  dump_vec("b_in", p.b_in);
  os << "balls " << p.balls.size() << '\n';
  for (const auto& b : p.balls) {
    os << "radius " << b.radius << '\n';
    dump_sparse("G", b.map);
    dump_vec("c", b.center);
  }
  os.precision(prec);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraint set of one scaled row block.
enum class RowKind { equality, inequality, ball };

struct Block {
  RowKind kind;
  Eigen::Index start;  // first row in the stacked matrix
  Eigen::Index size;
  double radius = 0.0;  // scaled, balls only
  double scale = 1.0;   // row scale of the block, balls only
};

// Scaled problem: min 0.5 x'(cH)x + (cg)'x  s.t.  Cx in S.
struct Scaled {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double cost_scale = 1.0;
  SparseMatrix h;
  Eigen::VectorXd g;
  SparseMatrix c;
  SparseMatrix ct;
  Eigen::VectorXd row_scale;  // D
  Eigen::VectorXd target;     // eq value / upper bound / ball center, scaled
  std::vector<Block> blocks;
  std::vector<Eigen::Index> eq_rows;  // stacked row of each original eq row, -1 when dropped
  std::vector<Eigen::Index> in_rows;
  Eigen::VectorXd row_is_eq;  // 1 for equality rows
};

bool zero_row_infeasible(double value, bool equality, double tol) {
  return equality ? std::abs(value) > tol : value < -tol;
}

// Returns false when a structurally empty row makes the program infeasible.
bool build_scaled(const ConvexProgram& p, double tol, Scaled& s) {
  const Eigen::Index n = p.size();
  s.n = n;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> scale, target, is_eq;
  Eigen::Index row = 0;

  auto add_rows = [&](const SparseMatrix& a, const Eigen::VectorXd& b, bool equality, std::vector<Eigen::Index>& map) {
    map.assign(static_cast<std::size_t>(a.rows()), -1);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double norm = a.row(i).norm();
      if (norm == 0.0) {
        if (zero_row_infeasible(b(i), equality, tol)) return false;
        continue;
      }
      const double d = 1.0 / norm;
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) trip.emplace_back(row, it.col(), d * it.value());
      scale.push_back(d);
      target.push_back(d * b(i));
      is_eq.push_back(equality ? 1.0 : 0.0);
      s.blocks.push_back({equality ? RowKind::equality : RowKind::inequality, row, 1});
      map[static_cast<std::size_t>(i)] = row++;
    }
    return true;
  };
  if (!add_rows(p.a_eq, p.b_eq, true, s.eq_rows)) return false;
  if (!add_rows(p.a_in, p.b_in, false, s.in_rows)) return false;

  for (const auto& b : p.balls) {
    double max_norm = 0.0;
    for (Eigen::Index i = 0; i < b.map.rows(); ++i) max_norm = std::max(max_norm, b.map.row(i).norm());
    const double d = max_norm > 0 ? 1.0 / max_norm : 1.0;
    for (Eigen::Index i = 0; i < b.map.rows(); ++i) {
      for (SparseMatrix::InnerIterator it(b.map, i); it; ++it) trip.emplace_back(row + i, it.col(), d * it.value());
      scale.push_back(d);
      target.push_back(d * b.center(i));
      is_eq.push_back(0.0);
    }
    s.blocks.push_back({RowKind::ball, row, b.map.rows(), d * b.radius, d});
    row += b.map.rows();
  }

  s.m = row;
  s.c.resize(row, n);
  s.c.setFromTriplets(trip.begin(), trip.end());
  s.ct = s.c.transpose();
  s.row_scale = Eigen::Map<Eigen::VectorXd>(scale.data(), Eigen::Index(scale.size()));
  s.target = Eigen::Map<Eigen::VectorXd>(target.data(), Eigen::Index(target.size()));
  s.row_is_eq = Eigen::Map<Eigen::VectorXd>(is_eq.data(), Eigen::Index(is_eq.size()));

  // cost scaling
  double hnorm = 0.0;
  if (n > 0) {
    Eigen::VectorXd colmax = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < p.hessian.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(p.hessian, k); it; ++it) {
        colmax(it.col()) = std::max(colmax(it.col()), std::abs(it.value()));
      }
    }
    hnorm = colmax.mean();
  }
  const double gnorm = n > 0 ? p.linear.cwiseAbs().maxCoeff() : 0.0;
  const double mag = std::max(hnorm, gnorm);
  s.cost_scale = mag > 0 ? std::clamp(1.0 / mag, 1e-4, 1e4) : 1.0;
  s.h = s.cost_scale * p.hessian;
  s.g = s.cost_scale * p.linear;
  return true;
}

void project(const Scaled& s, Eigen::VectorXd& v) {
  for (const auto& b : s.blocks) {
    switch (b.kind) {
      case RowKind::equality:
        v(b.start) = s.target(b.start);
        break;
      case RowKind::inequality:
        v(b.start) = std::min(v(b.start), s.target(b.start));
        break;
      case RowKind::ball: {
        auto seg = v.segment(b.start, b.size);
        const auto ctr = s.target.segment(b.start, b.size);
        const double norm = (seg - ctr).norm();
        if (norm > b.radius) seg = ctr + (b.radius / norm) * (seg - ctr);
        break;
      }
    }
  }
}

// Row-normalised violation of x; balls relative to max(1, radius).
double primal_violation(const ConvexProgram& p, const Scaled& s, const Eigen::VectorXd& x) {
  const Eigen::VectorXd cx = s.c * x;
  double worst = 0.0;
  std::size_t ball = 0;
  for (const auto& b : s.blocks) {
    switch (b.kind) {
      case RowKind::equality:
        worst = std::max(worst, std::abs(cx(b.start) - s.target(b.start)));
        break;
      case RowKind::inequality:
        worst = std::max(worst, cx(b.start) - s.target(b.start));
        break;
      case RowKind::ball: {
        const double excess = (cx.segment(b.start, b.size) - s.target.segment(b.start, b.size)).norm() - b.radius;
        worst = std::max(worst, excess / b.scale / std::max(1.0, p.balls[ball].radius));
        ++ball;
        break;
      }
    }
  }
  return worst;
}

// Relative stationarity residual in original units.
double dual_violation(const ConvexProgram& p, const Scaled& s, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (p.size() == 0) return 0.0;
  const Eigen::VectorXd hx = p.hessian * x;
  const Eigen::VectorXd aty = (s.ct * y) / s.cost_scale;
  const double num = (hx + p.linear + aty).cwiseAbs().maxCoeff();
  const double den = std::max({1.0, hx.cwiseAbs().maxCoeff(), p.linear.cwiseAbs().maxCoeff(),
                               aty.size() ? aty.cwiseAbs().maxCoeff() : 0.0});
  return num / den;
}

// Certificate of primal infeasibility from a dual step dy.
bool infeasibility_certificate(const Scaled& s, const Eigen::VectorXd& dy, double eps) {
  const double dy_norm = dy.size() ? dy.cwiseAbs().maxCoeff() : 0.0;
  if (dy_norm < 1e-12) return false;
  if ((s.ct * dy).cwiseAbs().maxCoeff() > eps * dy_norm) return false;
  double support = 0.0;
  for (const auto& b : s.blocks) {
    switch (b.kind) {
      case RowKind::equality:
        support += s.target(b.start) * dy(b.start);
        break;
      case RowKind::inequality:
        if (dy(b.start) < -eps * dy_norm) return false;
        support += s.target(b.start) * std::max(dy(b.start), 0.0);
        break;
      case RowKind::ball: {
        const auto seg = dy.segment(b.start, b.size);
        support += s.target.segment(b.start, b.size).dot(seg) + b.radius * seg.norm();
        break;
      }
    }
  }
  return support < -eps * dy_norm;
}

class KktSolver {
 public:
  void factor(const Scaled& s, double sigma, const Eigen::VectorXd& rho) {
    Eigen::MatrixXd k = Eigen::MatrixXd(s.h);
    k.diagonal().array() += sigma;
    if (s.m > 0) k += Eigen::MatrixXd(s.ct * rho.asDiagonal() * s.c);
    llt_.compute(k);
    use_ldlt_ = llt_.info() != Eigen::Success;
    if (use_ldlt_) ldlt_.compute(k);
  }
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    return use_ldlt_ ? Eigen::VectorXd(ldlt_.solve(rhs)) : Eigen::VectorXd(llt_.solve(rhs));
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  bool use_ldlt_ = false;
};

Eigen::VectorXd rho_vector(const Scaled& s, double rho, double eq_scale) {
  return (rho * (Eigen::VectorXd::Ones(s.m) + (eq_scale - 1.0) * s.row_is_eq)).eval();
}

void fill_duals(const ConvexProgram& p, const Scaled& s, const Eigen::VectorXd& y, SolveReport& r) {
  r.y_eq = Eigen::VectorXd::Zero(p.a_eq.rows());
  r.y_in = Eigen::VectorXd::Zero(p.a_in.rows());
  for (std::size_t i = 0; i < s.eq_rows.size(); ++i) {
    if (s.eq_rows[i] >= 0) r.y_eq(Eigen::Index(i)) = s.row_scale(s.eq_rows[i]) * y(s.eq_rows[i]) / s.cost_scale;
  }
  for (std::size_t i = 0; i < s.in_rows.size(); ++i) {
    if (s.in_rows[i] >= 0) r.y_in(Eigen::Index(i)) = s.row_scale(s.in_rows[i]) * y(s.in_rows[i]) / s.cost_scale;
  }
  r.y_ball.clear();
  for (const auto& b : s.blocks) {
    if (b.kind != RowKind::ball) continue;
    r.y_ball.push_back(b.scale * y.segment(b.start, b.size) / s.cost_scale);
  }
}

}  // namespace

SolveReport solve(const ConvexProgram& p, double tol, int max_iter) {
  SolverSettings s;
  s.tol = tol;
  s.max_iter = max_iter;
  return solve(p, s);
}

SolveReport solve(const ConvexProgram& p, const SolverSettings& settings) {
  p.validate();
  if (!(settings.tol > 0) || settings.max_iter < 1) throw ProgramError("tolerance and iteration cap must be positive");
  const Eigen::Index n = p.size();

  SolveReport report;
  Scaled s;
  if (!build_scaled(p, settings.tol, s)) {
    report.x = Eigen::VectorXd::Zero(n);
    report.status = SolveStatus::infeasible;
    report.objective = p.objective(report.x);
    return report;
  }
  const Eigen::Index m = s.m;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  double rho = settings.rho;
  if (const WarmStart* w = settings.warm_start) {
    if (w->x.size() == n) x = w->x;
    if (w->z.size() == m && w->y.size() == m) {
      z = w->z;
      y = w->y;
      if (w->rho > 0) rho = w->rho;
    } else {
      z = s.c * x;
      project(s, z);
    }
  }

  Eigen::VectorXd rv = rho_vector(s, rho, settings.equality_rho_scale);
  KktSolver kkt;
  kkt.factor(s, settings.sigma, rv);

  const double alpha = settings.alpha;
  Eigen::VectorXd x_prev = x, z_prev = z, y_prev = y;
  double best_score = kInf;
  Eigen::VectorXd best_x = x, best_y = y;
  double best_prim = kInf, best_dual = kInf;

  int iter = 0;
  for (iter = 1; iter <= settings.max_iter; ++iter) {
    x_prev = x;
    z_prev = z;
    y_prev = y;

    Eigen::VectorXd rhs = settings.sigma * x - s.g;
    if (m > 0) rhs += s.ct * (rv.cwiseProduct(z) - y);
    const Eigen::VectorXd xt = kkt.solve(rhs);
    x = alpha * xt + (1 - alpha) * x_prev;
    if (m > 0) {
      const Eigen::VectorXd zt = s.c * xt;
      const Eigen::VectorXd zr = alpha * zt + (1 - alpha) * z_prev;
      z = zr + y.cwiseQuotient(rv);
      project(s, z);
      y += rv.cwiseProduct(zr - z);
    }

    if (settings.record_merit) {
      double merit = settings.sigma * (x - x_prev).squaredNorm();
      if (m > 0) {
        merit += (z - z_prev).cwiseAbs2().dot(rv) + (y - y_prev).cwiseAbs2().cwiseQuotient(rv).sum();
      }
      report.merit.push_back(merit);
    }

    const bool last = iter == settings.max_iter;
    if (iter % settings.check_interval == 0 || last) {
      double prim = primal_violation(p, s, x);
      if (m > 0) prim = std::max(prim, (s.c * x - z).cwiseAbs().maxCoeff());
      const double dual = dual_violation(p, s, x, y);
      const double score = std::max(prim, dual);
      if (score < best_score) {
        best_score = score;
        best_x = x;
        best_y = y;
        best_prim = prim;
        best_dual = dual;
      }
      if (prim <= settings.tol && dual <= settings.tol) {
        report.status = SolveStatus::optimal;
        best_x = x;
        best_y = y;
        best_prim = prim;
        best_dual = dual;
        break;
      }
      if (m > 0 && infeasibility_certificate(s, y - y_prev, settings.infeasibility_tol)) {
        report.status = SolveStatus::infeasible;
        best_x = x;
        best_y = y;
        best_prim = prim;
        best_dual = dual;
        break;
      }
    }

    if (settings.adaptive_rho && m > 0 && iter % settings.adapt_interval == 0) {
      const Eigen::VectorXd cx = s.c * x;
      const double rp = (cx - z).cwiseAbs().maxCoeff();
      const double rd = (s.h * x + s.g + s.ct * y).cwiseAbs().maxCoeff();
      const double rp_norm = std::max({cx.cwiseAbs().maxCoeff(), z.cwiseAbs().maxCoeff(), 1e-10});
      const double rd_norm = std::max(
          {(s.h * x).cwiseAbs().maxCoeff(), (s.ct * y).cwiseAbs().maxCoeff(), s.g.cwiseAbs().maxCoeff(), 1e-10});
      const double ratio = std::sqrt((rp / rp_norm) / std::max(rd / rd_norm, 1e-30));
      const double next = std::clamp(rho * ratio, 1e-6, 1e6);
      if (next > 5 * rho || next < 0.2 * rho) {
        rho = next;
        rv = rho_vector(s, rho, settings.equality_rho_scale);
        kkt.factor(s, settings.sigma, rv);
        report.rho_updates.push_back(iter);
      }
    }
  }

  report.iterations = std::min(iter, settings.max_iter);
  report.x = best_x;
  report.primal_residual = best_prim;
  report.dual_residual = best_dual;
  report.objective = p.objective(best_x);
  fill_duals(p, s, best_y, report);
  report.warm = {x, z, y, rho};
  return report;
}

}  // namespace auvmpc
