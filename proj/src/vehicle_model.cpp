#include "hexftc/vehicle_model.hpp"

#include <cmath>

namespace hexftc {

void VehicleParams::validate() const {
  auto require = [](bool ok, const char* field) {
    if (!ok) throw DomainError(std::string("vehicle.") + field + " is out of range");
  };
  require(std::isfinite(mass) && mass > 0.0, "mass");
  require(std::isfinite(arm_length) && arm_length > 0.0, "arm_length");
  require(std::isfinite(thrust_coeff) && thrust_coeff > 0.0, "thrust_coeff");
  require(std::isfinite(drag_coeff) && drag_coeff > 0.0, "drag_coeff");
  require(std::isfinite(gravity) && gravity > 0.0, "gravity");
  require(std::isfinite(max_rotor_speed) && max_rotor_speed > 0.0, "max_rotor_speed");
  require(inertia.allFinite() && (inertia - inertia.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "inertia");
  require(Eigen::LLT<Mat3>(inertia).info() == Eigen::Success, "inertia");
}

Vec12 VehicleState::to_vector() const {
  Vec12 x;
  x << position, velocity, euler, euler_rates;
  return x;
}

VehicleState VehicleState::from_vector(const Vec12& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9)};
}

namespace {

void check_gimbal(double ctheta, double theta) {
  if (std::abs(ctheta) <= kGimbalTolerance) {
    throw SingularityError("Euler-rate map is singular at pitch = " + std::to_string(theta));
  }
}

}  // namespace

RotationalKinematics::RotationalKinematics(const Vec3& euler, const Mat3& inertia_)
    : inertia(inertia_), inertia_inv(inertia_.inverse()) {
  const double sphi = std::sin(euler.x()), cphi = std::cos(euler.x());
  const double stheta = std::sin(euler.y()), ctheta = std::cos(euler.y());
  check_gimbal(ctheta, euler.y());
  const double ttheta = stheta / ctheta;
  const double sec2 = 1.0 / (ctheta * ctheta);

  psi << 1.0, sphi * ttheta, cphi * ttheta,
         0.0, cphi, -sphi,
         0.0, sphi / ctheta, cphi / ctheta;
  psi_inv << 1.0, 0.0, -stheta,
             0.0, cphi, sphi * ctheta,
             0.0, -sphi, cphi * ctheta;
  d_phi << 0.0, cphi * ttheta, -sphi * ttheta,
           0.0, -sphi, -cphi,
           0.0, cphi / ctheta, -sphi / ctheta;
  d_theta << 0.0, sphi * sec2, cphi * sec2,
             0.0, 0.0, 0.0,
             0.0, sphi * stheta * sec2, cphi * stheta * sec2;
  gain = psi * inertia_inv;
}

Vec3 RotationalKinematics::drift(const Vec3& euler_rates) const {
  const Vec3 body_rate = psi_inv * euler_rates;
  return psi_dot(euler_rates) * body_rate - gain * body_rate.cross(inertia * body_rate);
}

Mat3 euler_rate_matrix(const Vec3& euler) {
  const double sphi = std::sin(euler.x()), cphi = std::cos(euler.x());
  const double ctheta = std::cos(euler.y()), ttheta = std::tan(euler.y());
  check_gimbal(ctheta, euler.y());
  Mat3 psi;
  psi << 1.0, sphi * ttheta, cphi * ttheta,
         0.0, cphi, -sphi,
         0.0, sphi / ctheta, cphi / ctheta;
  return psi;
}

Mat3 euler_rate_matrix_derivative(const Vec3& euler, const Vec3& euler_rates) {
  return RotationalKinematics(euler, Mat3::Identity()).psi_dot(euler_rates);
}

Mat3 rotation_matrix(const Vec3& euler) {
  return (Eigen::AngleAxisd(euler.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(euler.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(euler.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 rotation_third_column(const Vec3& euler) {
  const double sphi = std::sin(euler.x()), cphi = std::cos(euler.x());
  const double stheta = std::sin(euler.y()), ctheta = std::cos(euler.y());
  const double spsi = std::sin(euler.z()), cpsi = std::cos(euler.z());
  return {cphi * stheta * cpsi + sphi * spsi, cphi * stheta * spsi - sphi * cpsi, cphi * ctheta};
}

Mat3 input_gain(const Vec3& euler, const Mat3& inertia) {
  return euler_rate_matrix(euler) * inertia.inverse();
}

Vec3 rotational_drift(const Vec3& rate_error, const Vec3& euler, const Vec3& ref_rate, const Mat3& inertia) {
  return RotationalKinematics(euler, inertia).drift(rate_error + ref_rate);
}

Mat46 mixer_matrix(const VehicleParams& params) {
  const double r = params.arm_length;
  const double c = params.drag_coeff;
  const double h = r * std::sqrt(3.0) / 2.0;
  Mat46 m;
  m << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
       -r / 2, -r, -r / 2, r / 2, r, r / 2,
       h, 0.0, -h, -h, 0.0, h,
       c, -c, c, -c, c, -c;
  return m;
}

Mat6 failure_matrix(FailureMode mode) {
  Vec6 d = Vec6::Ones();
  if (!mode.is_nominal()) d(mode.index() - 1) = 0.0;
  return d.asDiagonal();
}

ControlCommand apply_actuators(const RotorCommand& omega_s, FailureMode mode, const VehicleParams& params) {
  const Vec6 masked = failure_matrix(mode).diagonal().cwiseProduct(omega_s);
  return ControlCommand::from_vector(params.thrust_coeff * mixer_matrix(params) * masked);
}

Vec3 model_mismatch(const RotorCommand& omega_s, FailureMode model, FailureMode truth, const Vec3& euler,
                    const VehicleParams& params) {
  const Vec6 dmask = failure_matrix(truth).diagonal() - failure_matrix(model).diagonal();
  const Vec3 torque = params.thrust_coeff * mixer_matrix(params).bottomRows<3>() * dmask.cwiseProduct(omega_s);
  return input_gain(euler, params.inertia) * torque;
}

RotorCommand saturate_rotor_command(const RotorCommand& omega_s, const VehicleParams& params) {
  const double limit = params.max_rotor_speed * params.max_rotor_speed;
  return omega_s.cwiseMax(-limit).cwiseMin(limit);
}

DisturbanceSignal DisturbanceSignal::none() {
  auto zero = [](double) -> Vec3 { return Vec3::Zero(); };
  return {zero, zero};
}

Vec12 plant_derivative(const VehicleState& state, const ControlCommand& input, const Vec3& sigma_rho,
                       const Vec3& sigma_xi, const VehicleParams& params) {
  Vec12 dx;
  dx.segment<3>(0) = state.velocity;
  dx.segment<3>(3) = -(input.thrust / params.mass) * rotation_third_column(state.euler) +
                     params.gravity * Vec3::UnitZ() + sigma_rho;
  dx.segment<3>(6) = state.euler_rates;
  const RotationalKinematics kin(state.euler, params.inertia);
  dx.segment<3>(9) = kin.drift(state.euler_rates) + kin.gain * input.torque + sigma_xi;
  return dx;
}

Vec12 plant_derivative(const VehicleState& state, const RotorCommand& omega_s, FailureMode true_mode,
                       const DisturbanceSignal& disturbances, double t, const VehicleParams& params) {
  const Vec3 sigma_rho = disturbances.translational ? disturbances.translational(t) : Vec3::Zero();
  const Vec3 sigma_xi = disturbances.rotational ? disturbances.rotational(t) : Vec3::Zero();
  return plant_derivative(state, apply_actuators(omega_s, true_mode, params), sigma_rho, sigma_xi, params);
}

}  // namespace hexftc
