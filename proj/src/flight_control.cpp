#include "hexftc/flight_control.hpp"

#include "hexftc/vehicle_model.hpp"

#include <cmath>

namespace hexftc {

void ControlGains::validate() const {
  for (double k : {gamma1, gamma2, beta1, beta2}) {
    if (!std::isfinite(k) || k <= 0.0) throw DomainError("control gains must be positive");
  }
}

Mat6 ControlGains::rotational_matrix() const {
  Mat6 a = Mat6::Zero();
  a.topRightCorner<3, 3>().setIdentity();
  a.bottomLeftCorner<3, 3>() = -beta1 * Mat3::Identity();
  a.bottomRightCorner<3, 3>() = -beta2 * Mat3::Identity();
  return a;
}

Vec3 translational_virtual_input(const ExtendedEstimate& est, const Vec3& ref_accel, const ControlGains& gains) {
  return -gains.gamma1 * est.position_error - gains.gamma2 * est.velocity_error - est.trans_disturbance +
         ref_accel;
}

AttitudeReference attitude_from_acceleration(const Vec3& f, const VehicleParams& params) {
  const double vz = f.z() - params.gravity;  // must be negative: thrust points up
  const double horiz = std::sqrt(f.x() * f.x() + vz * vz);
  if (!(vz < 0.0) || horiz <= 1e-12) {
    throw SingularityError("commanded thrust direction is not above the horizon");
  }
  AttitudeReference ref;
  // phi_r sign follows R3_y = -sin(phi): a positive f_y needs a positive roll.
  ref.euler = Vec3(std::atan(f.y() / horiz), std::atan(f.x() / vz), 0.0);
  const double tilt = std::cos(ref.euler.x()) * std::cos(ref.euler.y());
  if (tilt <= 1e-9) throw SingularityError("commanded tilt reaches the horizontal");
  ref.thrust = -params.mass * vz / tilt;
  return ref;
}

AttitudeReference attitude_from_acceleration(const Vec3& f, const VehicleParams& params, const TiltGuard& guard) {
  Vec3 fg = f;
  bool guarded = false;
  double up = params.gravity - fg.z();
  if (up < guard.min_vertical_accel) {
    up = guard.min_vertical_accel;
    fg.z() = params.gravity - up;
    guarded = true;
  }
  // cos(tilt) = up / |(fx, fy, up)|
  const double max_horiz = up * std::sqrt(1.0 - guard.min_cos_tilt * guard.min_cos_tilt) / guard.min_cos_tilt;
  const double horiz = fg.head<2>().norm();
  if (horiz > max_horiz) {
    fg.head<2>() *= max_horiz / horiz;
    guarded = true;
  }
  AttitudeReference ref = attitude_from_acceleration(fg, params);
  ref.guarded = guarded;
  return ref;
}

ReferenceRateFilter::ReferenceRateFilter(double time_constant, double dt) : tc_(time_constant), dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("filter sample interval must be positive");
  if (!(time_constant >= 0.0)) throw DomainError("filter time constant must be nonnegative");
}

void ReferenceRateFilter::reset(const Vec3& x0) {
  last_ = x0;
  rate_.setZero();
  primed_ = true;
}

Vec3 ReferenceRateFilter::update(const Vec3& x) {
  if (!primed_) {
    reset(x);
    return rate_;
  }
  rate_ = (tc_ * rate_ + (x - last_)) / (tc_ + dt_);
  last_ = x;
  return rate_;
}

Vec3 rotational_virtual_input(const ExtendedEstimate& est, const ControlGains& gains) {
  return -gains.beta1 * est.attitude_error - gains.beta2 * est.rate_error - est.rot_disturbance;
}

Vec3 rotational_control(const ExtendedEstimate& est, const Vec3& euler, const Vec3& ref_rate,
                        const ControlGains& gains, const Mat3& inertia) {
  const RotationalKinematics kin(euler, inertia);
  const Vec3 fr = rotational_virtual_input(est, gains);
  return inertia * kin.psi_inv * (fr - kin.drift(est.rate_error + ref_rate));
}

RotorCommand mix_pseudo_inverse(const ControlCommand& u_hat, FailureMode mode, const VehicleParams& params) {
  const Mat46 bf = mixer_matrix(params) * failure_matrix(mode);
  const Eigen::Matrix4d gram = bf * bf.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e8) {
    throw RankDeficiencyError("mixer is rank deficient for failure mode " + std::to_string(mode.index()));
  }
  const Vec4 y = gram.llt().solve(u_hat.to_vector());
  return bf.transpose() * y / params.thrust_coeff;
}

}  // namespace hexftc
