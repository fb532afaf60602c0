#pragma once

// Marine vehicle models: the full 6-DoF rigid-body dynamics used as a
// validation oracle, and the linear discrete kinematic model the planner
// optimises over.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace auvmpc {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Vec12 = Eigen::Matrix<Scalar, 12, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat6 = Eigen::Matrix<Scalar, 6, 6>;

class SingularOrientationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UndefinedHeadingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical and kinematic parameters of one AUV.
///
/// Hydrodynamic coefficients follow the sign convention of the rigid-body
/// model: damping is D = -diag(linear drag), so dissipative drag means
/// negative `drag_*` values.
struct VehicleParams {
  double mass = 30.0;
  double inertia_x = 1.0;
  double inertia_y = 3.5;
  double inertia_z = 3.5;
  // added mass (the gamma_vdot terms)
  double added_mass_x = -1.0;
  double added_mass_y = -1.0;
  double added_mass_z = -1.0;
  // linear drag (the gamma_v / gamma_omega terms)
  double drag_x = -0.2;
  double drag_y = -0.2;
  double drag_z = -0.2;
  double drag_roll = -1.0;
  double drag_pitch = -1.0;
  double drag_yaw = -1.0;
  double max_speed = 2.5;             // V_nmax, m/s
  double max_horizontal_speed = 2.0;  // V_hmax, m/s
  double max_heading_rate = 0.1;      // rad/s
  double heading_alpha = 0.2;         // band hyperparameter

  /// Relative half-width of the per-step velocity band.
  [[nodiscard]] double heading_band_ratio() const { return heading_alpha / max_horizontal_speed; }

  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw ParameterError("invalid vehicle parameter: " + what);
    };
    require(mass > 0, "mass must be positive");
    require(inertia_x > 0 && inertia_y > 0 && inertia_z > 0, "inertias must be positive");
    require(mass - added_mass_x > 0, "mass - added_mass_x must be positive");
    require(mass - added_mass_y > 0, "mass - added_mass_y must be positive");
    require(mass - added_mass_z > 0, "mass - added_mass_z must be positive");
    require(max_horizontal_speed > 0 && max_horizontal_speed <= max_speed,
            "need 0 < max_horizontal_speed <= max_speed");
    require(heading_alpha > 0, "heading_alpha must be positive");
    require(max_heading_rate > 0, "max_heading_rate must be positive");
  }
};

/// Orientation matrices of the rigid-body kinematics.
template <typename Scalar>
struct OrientationMatrices {
  Mat3<Scalar> rx, ry, rz;
  Mat3<Scalar> j1;  ///< linear velocity body -> earth
  Mat3<Scalar> j2;  ///< angular velocity body -> Euler rates
};

template <typename Scalar>
OrientationMatrices<Scalar> rotation_and_transform_matrices(Scalar roll, Scalar pitch, Scalar yaw) {
  using std::cos;
  using std::sin;
  using std::abs;
  const Scalar cf = cos(roll), sf = sin(roll);
  const Scalar ct = cos(pitch), st = sin(pitch);
  const Scalar cp = cos(yaw), sp = sin(yaw);
  if (abs(ct) < Scalar(1e-9)) {
    throw SingularOrientationError("Euler-rate transform undefined at pitch = +-pi/2");
  }

  OrientationMatrices<Scalar> out;
  out.rx << 1, 0, 0,
            0, cf, -sf,
            0, sf, cf;
  out.ry << ct, 0, st,
            0, 1, 0,
            -st, 0, ct;
  out.rz << cp, -sp, 0,
            sp, cp, 0,
            0, 0, 1;
  out.j1 << ct * cp, sf * st * cp - cf * sp, sf * sp + cf * st * cp,
            ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
            -st, sf * ct, cf * ct;
  const Scalar tt = st / ct;
  out.j2 << 1, sf * tt, cf * tt,
            0, cf, -sf,
            0, sf / ct, cf / ct;
  return out;
}

/// Full 6-DoF state: earth-frame pose eta and body-frame velocity nu.
template <typename Scalar>
struct FullStateT {
  Vec6<Scalar> eta = Vec6<Scalar>::Zero();  // x y z roll pitch yaw
  Vec6<Scalar> nu = Vec6<Scalar>::Zero();   // vx vy vz wx wy wz

  [[nodiscard]] Vec12<Scalar> stacked() const {
    Vec12<Scalar> s;
    s << eta, nu;
    return s;
  }
  static FullStateT from_stacked(const Vec12<Scalar>& s) {
    FullStateT out;
    out.eta = s.template head<6>();
    out.nu = s.template tail<6>();
    return out;
  }
};
using FullState = FullStateT<double>;

struct DynamicsOptions {
  bool coriolis = true;
  Vec6<double> gravity = Vec6<double>::Zero();  // G(eta), constant per mass/inertia
};

template <typename Scalar>
Mat6<Scalar> inertia_matrix(const VehicleParams& p) {
  Vec6<Scalar> d;
  d << Scalar(p.mass - p.added_mass_x), Scalar(p.mass - p.added_mass_y), Scalar(p.mass - p.added_mass_z),
      Scalar(p.inertia_x), Scalar(p.inertia_y), Scalar(p.inertia_z);
  return d.asDiagonal();
}

template <typename Scalar>
Mat6<Scalar> damping_matrix(const VehicleParams& p) {
  Vec6<Scalar> d;
  d << Scalar(p.drag_x), Scalar(p.drag_y), Scalar(p.drag_z), Scalar(p.drag_roll), Scalar(p.drag_pitch),
      Scalar(p.drag_yaw);
  return (-d).asDiagonal();
}

template <typename Scalar>
Mat3<Scalar> skew_block(Scalar a, Scalar b, Scalar c) {
  // [[0, c, -b], [-c, 0, a], [b, -a, 0]]
  Mat3<Scalar> m;
  m << 0, c, -b,
       -c, 0, a,
       b, -a, 0;
  return m;
}

/// Coriolis and centripetal matrix C(nu) = C_R(nu) + C_A(nu).
template <typename Scalar>
Mat6<Scalar> coriolis_matrix(const Vec6<Scalar>& nu, const VehicleParams& p) {
  const Scalar m = Scalar(p.mass);
  const Scalar vx = nu(0), vy = nu(1), vz = nu(2), wx = nu(3), wy = nu(4), wz = nu(5);
  const Mat3<Scalar> cr1 = m * skew_block<Scalar>(vx, vy, vz);
  const Mat3<Scalar> cr2 =
      m * skew_block<Scalar>(Scalar(p.inertia_x) * wx, Scalar(p.inertia_y) * wy, Scalar(p.inertia_z) * wz);
  const Mat3<Scalar> ca1 =
      skew_block<Scalar>(Scalar(p.added_mass_x) * vx, Scalar(p.added_mass_y) * vy, Scalar(p.added_mass_z) * vz);
  const Mat3<Scalar> ca2 =
      skew_block<Scalar>(Scalar(p.drag_roll) * wx, Scalar(p.drag_pitch) * wy, Scalar(p.drag_yaw) * wz);

  Mat6<Scalar> c = Mat6<Scalar>::Zero();
  c.template topRightCorner<3, 3>() = cr1 + ca1;
  c.template bottomLeftCorner<3, 3>() = cr1 + ca1;
  c.template bottomRightCorner<3, 3>() = cr2 + ca2;
  return c;
}

/// Time derivative of the stacked 12-vector (eta, nu).
template <typename Scalar>
Vec12<Scalar> full_dynamics_derivative(const FullStateT<Scalar>& s, const Vec6<Scalar>& u, const Vec6<Scalar>& d,
                                       const VehicleParams& p, const DynamicsOptions& opt = {}) {
  const auto om = rotation_and_transform_matrices<Scalar>(s.eta(3), s.eta(4), s.eta(5));
  Vec12<Scalar> out;
  out.template head<3>() = om.j1 * s.nu.template head<3>();
  out.template segment<3>(3) = om.j2 * s.nu.template tail<3>();

  Mat6<Scalar> cd = damping_matrix<Scalar>(p);
  if (opt.coriolis) cd += coriolis_matrix<Scalar>(s.nu, p);
  const Vec6<Scalar> minv = inertia_matrix<Scalar>(p).diagonal().cwiseInverse();
  out.template tail<6>() =
      -(minv.asDiagonal() * (cd * s.nu)) - opt.gravity.template cast<Scalar>() + u + d;
  return out;
}

namespace detail {
template <typename Scalar>
FullStateT<Scalar> rk4(const FullStateT<Scalar>& s, const Vec6<Scalar>& u, const Vec6<Scalar>& d,
                       const VehicleParams& p, Scalar h, const DynamicsOptions& opt) {
  auto f = [&](const Vec12<Scalar>& x) {
    return full_dynamics_derivative<Scalar>(FullStateT<Scalar>::from_stacked(x), u, d, p, opt);
  };
  const Vec12<Scalar> x0 = s.stacked();
  const Vec12<Scalar> k1 = f(x0);
  const Vec12<Scalar> k2 = f(x0 + h / 2 * k1);
  const Vec12<Scalar> k3 = f(x0 + h / 2 * k2);
  const Vec12<Scalar> k4 = f(x0 + h * k3);
  return FullStateT<Scalar>::from_stacked(x0 + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
}
}  // namespace detail

/// One classical RK4 step of the full dynamics. Validation use only.
template <typename Scalar>
FullStateT<Scalar> full_dynamics_step(const FullStateT<Scalar>& s, const Vec6<Scalar>& u, const Vec6<Scalar>& d,
                                      const VehicleParams& p, Scalar h, const DynamicsOptions& opt = {}) {
  if (!(h > 0)) throw std::invalid_argument("integration step must be positive");
  return detail::rk4(s, u, d, p, h, opt);
}

/// E' = diag(gamma_vx/(m - gamma_vdot_x), gamma_vz/(m - gamma_vdot_z), gamma_wz/J_z), as printed.
template <typename Scalar = double>
Mat3<Scalar> drag_matrix_E(const VehicleParams& p) {
  if (p.mass - p.added_mass_x <= 0 || p.mass - p.added_mass_z <= 0 || p.inertia_z <= 0) {
    throw ParameterError("drag matrix denominators must be positive");
  }
  Vec3<Scalar> d(Scalar(p.drag_x / (p.mass - p.added_mass_x)), Scalar(p.drag_z / (p.mass - p.added_mass_z)),
                 Scalar(p.drag_yaw / p.inertia_z));
  return d.asDiagonal();
}

/// Velocity-drag block of the planner model for (V_x, V_y, V_z).
///
/// Uses E'_11 for both horizontal axes and E'_22 for heave, with the sign
/// taken from the rigid-body damping D = -diag(gamma) so that negative drag
/// coefficients dissipate.
template <typename Scalar = double>
Mat3<Scalar> planner_drag_block(const VehicleParams& p) {
  const Mat3<Scalar> e = drag_matrix_E<Scalar>(p);
  return Vec3<Scalar>(-e(0, 0), -e(0, 0), -e(1, 1)).asDiagonal();
}

/// Position and global velocity of one AUV in the planner model.
template <typename Scalar>
struct LinearStateT {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  Vec3<Scalar> velocity = Vec3<Scalar>::Zero();
};
using LinearState = LinearStateT<double>;

struct UsvState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // the velocity input U_USV
};

/// A_n = [[I, dt I], [0, I - dt E'']] of the discrete AUV model.
inline Eigen::Matrix<double, 6, 6> auv_state_matrix(const VehicleParams& p, double dt) {
  Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Identity();
  a.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
  a.bottomRightCorner<3, 3>() = Eigen::Matrix3d::Identity() - dt * planner_drag_block<double>(p);
  return a;
}

inline Eigen::Matrix<double, 6, 3> auv_input_matrix() {
  Eigen::Matrix<double, 6, 3> b = Eigen::Matrix<double, 6, 3>::Zero();
  b.bottomRows<3>().setIdentity();
  return b;
}

template <typename Scalar>
LinearStateT<Scalar> discrete_step(const LinearStateT<Scalar>& x, const Vec3<Scalar>& input, const VehicleParams& p,
                                   Scalar dt, const Vec3<Scalar>& noise = Vec3<Scalar>::Zero()) {
  if (!(dt > 0)) throw std::invalid_argument("sampling time must be positive");
  LinearStateT<Scalar> out;
  out.position = x.position + dt * x.velocity + noise;
  out.velocity = (Mat3<Scalar>::Identity() - dt * planner_drag_block<Scalar>(p)) * x.velocity + input;
  return out;
}

inline UsvState usv_step(const UsvState& s, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("sampling time must be positive");
  UsvState out = s;
  out.position = s.position + dt * s.velocity;
  return out;
}

inline double usv_heading(const UsvState& s) { return std::atan2(s.velocity.y(), s.velocity.x()); }

struct SurgeHeading {
  double surge;    // m/s
  double heading;  // rad, (-pi, pi]
};

inline SurgeHeading recover_heading_surge(const Eigen::Vector3d& v) {
  if (v.x() == 0.0 && v.y() == 0.0) throw UndefinedHeadingError("heading undefined at zero horizontal speed");
  return {std::hypot(v.x(), v.y()), std::atan2(v.y(), v.x())};
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double w = std::remainder(a, 2 * pi);
  if (w <= -pi) w += 2 * pi;
  return w;
}

/// Heading rate between two consecutive horizontal velocities (rad/s).
inline double heading_change(const Eigen::Vector2d& v_prev, const Eigen::Vector2d& v_cur, double dt) {
  if (v_prev.isZero(0.0) || v_cur.isZero(0.0)) {
    throw UndefinedHeadingError("heading change undefined at zero horizontal speed");
  }
  const double a = std::atan2(v_prev.y(), v_prev.x());
  const double b = std::atan2(v_cur.y(), v_cur.x());
  return wrap_angle(b - a) / dt;
}

/// The two linear rows bounding the change of one horizontal velocity
/// component between consecutive steps:
///
///   s * (V[k] - (1 + a) V[k-1]) <= 0
///   s * (V[k] - (1 - a) V[k-1]) >= 0
///
/// with a = alpha / V_hmax. `orientation` (s = +-1) is the sign the
/// component is expected to keep, so the band stays non-empty for negative
/// velocities. Both rows are linear in (V[k], V[k-1]) jointly.
struct HeadingBandRow {
  double orientation = 1.0;
  double upper_prev_coeff;  // -(1 + a)
  double lower_prev_coeff;  // -(1 - a)
};

struct HeadingBand {
  HeadingBandRow x;
  HeadingBandRow y;

  /// Admissible interval of V[k] for a known V[k-1] along one axis.
  [[nodiscard]] static std::pair<double, double> interval(const HeadingBandRow& row, double prev) {
    const double hi = -row.upper_prev_coeff * prev;
    const double lo = -row.lower_prev_coeff * prev;
    return row.orientation >= 0 ? std::pair{lo, hi} : std::pair{hi, lo};
  }
};

inline HeadingBand heading_rate_linear_constraints(const Eigen::Vector2d& v_ref_prev, const VehicleParams& p) {
  if (!(p.max_horizontal_speed > 0)) throw ParameterError("max_horizontal_speed must be positive");
  const double a = p.heading_band_ratio();
  auto row = [a](double ref) { return HeadingBandRow{ref < 0 ? -1.0 : 1.0, -(1 + a), -(1 - a)}; };
  return {row(v_ref_prev.x()), row(v_ref_prev.y())};
}

}  // namespace auvmpc
