#pragma once

#include "hexftc/types.hpp"

#include <functional>

namespace hexftc {

/// Smallest |cos(pitch)| accepted by the Euler-rate map.
inline constexpr double kGimbalTolerance = 1e-6;

/// Maps body angular velocity to ZYX Euler-angle rates. Throws SingularityError near |pitch| = pi/2.
Mat3 euler_rate_matrix(const Vec3& euler);

/// Time derivative of euler_rate_matrix along the given Euler rates (chain rule, no differencing).
Mat3 euler_rate_matrix_derivative(const Vec3& euler, const Vec3& euler_rates);

/// Body-to-inertial rotation R = Rz(psi) Ry(theta) Rx(phi).
Mat3 rotation_matrix(const Vec3& euler);
Vec3 rotation_third_column(const Vec3& euler);

/// G(theta1) = Psi J^-1, the torque-to-Euler-acceleration gain.
Mat3 input_gain(const Vec3& euler, const Mat3& inertia);

/// Orientation-dependent pieces of the rotational dynamics, evaluated once per attitude.
struct RotationalKinematics {
  RotationalKinematics(const Vec3& euler, const Mat3& inertia);

  /// Drift f for total Euler rates w (= rate error + reference rate).
  Vec3 drift(const Vec3& euler_rates) const;
  Mat3 psi_dot(const Vec3& euler_rates) const { return d_phi * euler_rates.x() + d_theta * euler_rates.y(); }

  Mat3 psi;
  Mat3 psi_inv;
  Mat3 d_phi;    // dPsi/dphi
  Mat3 d_theta;  // dPsi/dtheta
  Mat3 inertia;
  Mat3 inertia_inv;
  Mat3 gain;     // Psi J^-1
};

/// Drift of the rotational tracking-error dynamics,
///   f = dPsi Psi^-1 w - Psi J^-1 (Psi^-1 w x J Psi^-1 w),  w = rate_error + ref_rate.
/// Only the rate part of the tracking error enters, so it is taken directly.
Vec3 rotational_drift(const Vec3& rate_error, const Vec3& euler, const Vec3& ref_rate, const Mat3& inertia);

/// 4x6 map from individual rotor forces to (total thrust, roll, pitch, yaw torque).
Mat46 mixer_matrix(const VehicleParams& params);

/// Diagonal 0/1 mask with a zero at the failed rotor.
Mat6 failure_matrix(FailureMode mode);

/// (u_f, tau) = b M F omega_s, realized through the given (true) failure mode.
ControlCommand apply_actuators(const RotorCommand& omega_s, FailureMode mode, const VehicleParams& params);

/// sigma_m = G b M_tau (F_true - F_model) omega_s: the Euler-acceleration error made by assuming
/// `model` when the vehicle is in `truth`.
Vec3 model_mismatch(const RotorCommand& omega_s, FailureMode model, FailureMode truth, const Vec3& euler,
                    const VehicleParams& params);

/// Clamps every entry to +-max_rotor_speed^2.
RotorCommand saturate_rotor_command(const RotorCommand& omega_s, const VehicleParams& params);

/// Lumped disturbances as functions of time: translational (m/s^2) and rotational (rad/s^2).
struct DisturbanceSignal {
  std::function<Vec3(double)> translational;
  std::function<Vec3(double)> rotational;

  static DisturbanceSignal none();
};

/// Continuous-time truth dynamics in absolute coordinates:
///   p'' = -(u_f/m) R3 + g e_z + sigma_rho(t),   theta'' = f + G tau + sigma_xi(t).
Vec12 plant_derivative(const VehicleState& state, const RotorCommand& omega_s, FailureMode true_mode,
                       const DisturbanceSignal& disturbances, double t, const VehicleParams& params);

/// Same dynamics driven directly by (u_f, tau), bypassing the rotors.
Vec12 plant_derivative(const VehicleState& state, const ControlCommand& input, const Vec3& sigma_rho,
                       const Vec3& sigma_xi, const VehicleParams& params);

}  // namespace hexftc
