#pragma once

#include "hexftc/ehgo_bank.hpp"
#include "hexftc/types.hpp"

namespace hexftc {

struct ControlGains {
  double gamma1 = 4.0;  // translational position gain
  double gamma2 = 4.0;  // translational velocity gain
  double beta1 = 36.0;  // rotational attitude gain
  double beta2 = 12.0;  // rotational rate gain

  void validate() const;
  /// A_xi = [[0, I], [-beta1 I, -beta2 I]].
  Mat6 rotational_matrix() const;
};

/// Limits applied to the commanded thrust direction before it is turned into attitude references.
struct TiltGuard {
  double min_cos_tilt = 0.1;          // cos(phi_r) cos(theta_r) never drops below this
  double min_vertical_accel = 0.981;  // g - f_z is raised to at least this (m/s^2)
};

struct AttitudeReference {
  Vec3 euler = Vec3::Zero();  // (phi_r, theta_r, psi_r = 0)
  double thrust = 0.0;        // u_fd (N)
  bool guarded = false;       // tilt or vertical limit was active
};

/// Virtual translational input f_t = -g1 rho1 - g2 rho2 - sigma_rho + p_r''.
Vec3 translational_virtual_input(const ExtendedEstimate& est, const Vec3& ref_accel, const ControlGains& gains);

/// Attitude references and thrust that realize f_t. Unguarded; throws SingularityError
/// when the thrust direction is horizontal or points upward.
AttitudeReference attitude_from_acceleration(const Vec3& f_t, const VehicleParams& params);

/// Same as above after pulling f_t back into the tilt cone (horizontal part shrunk, vertical kept).
AttitudeReference attitude_from_acceleration(const Vec3& f_t, const VehicleParams& params, const TiltGuard& guard);

/// Causal first-order differentiator s / (T s + 1), backward-Euler discretized, per axis.
class ReferenceRateFilter {
 public:
  ReferenceRateFilter(double time_constant, double dt);

  void reset(const Vec3& x0);
  /// Feeds the next sample, returns the filtered rate.
  Vec3 update(const Vec3& x);
  const Vec3& value() const { return rate_; }
  double time_constant() const { return tc_; }

 private:
  double tc_;
  double dt_;
  bool primed_ = false;
  Vec3 last_ = Vec3::Zero();
  Vec3 rate_ = Vec3::Zero();
};

/// Virtual rotational input f_r = -b1 xi1 - b2 xi2 - varsigma.
Vec3 rotational_virtual_input(const ExtendedEstimate& est, const ControlGains& gains);

/// tau_d = G^-1 (f_r - f(xi2_hat, theta1, ref_rate)).
Vec3 rotational_control(const ExtendedEstimate& est, const Vec3& euler, const Vec3& ref_rate,
                        const ControlGains& gains, const Mat3& inertia);

/// Minimum-norm rotor command with b M F omega_s = u_hat. Throws RankDeficiencyError if M F
/// is rank deficient or worse conditioned than 1e8.
RotorCommand mix_pseudo_inverse(const ControlCommand& u_hat, FailureMode mode, const VehicleParams& params);

}  // namespace hexftc
