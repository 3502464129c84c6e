#pragma once

#include "hexftc/types.hpp"

#include <array>
#include <optional>

namespace hexftc {

/// Observer characteristic polynomial s^3 + a1 s^2 + a2 s + a3 and time-scale epsilon.
struct ObserverGains {
  Vec3 alpha{6.0, 11.0, 6.0};
  double epsilon = 0.01;
  /// Time scale of the position channel; unset means epsilon.
  std::optional<double> epsilon_translational = 0.05;

  double translational_epsilon() const { return epsilon_translational.value_or(epsilon); }

  /// Throws NotHurwitzError / DomainError.
  void validate() const;
};

/// Routh-Hurwitz test for the monic cubic with coefficients alpha.
bool is_hurwitz_cubic(const Vec3& alpha);

/// Stacked injection gain H_j = [a1/eps I; a2/eps^2 I; a3/eps^3 I] (9x3) for the attitude channel.
Eigen::Matrix<double, 9, 3> make_gain_vector(const ObserverGains& gains);

/// One observer's estimate of the extended translational and rotational error states.
struct ExtendedEstimate {
  Vec3 position_error = Vec3::Zero();     // rho_1
  Vec3 velocity_error = Vec3::Zero();     // rho_2
  Vec3 trans_disturbance = Vec3::Zero();  // sigma_rho
  Vec3 attitude_error = Vec3::Zero();     // xi_1
  Vec3 rate_error = Vec3::Zero();         // xi_2
  Vec3 rot_disturbance = Vec3::Zero();    // lumped rotational disturbance incl. model mismatch

  Vec18 to_vector() const;
  static ExtendedEstimate from_vector(const Vec18& x);
  Vec6 rotational_error() const;
};

/// Symmetric clamp limits per estimate block.
struct EstimateBounds {
  double position = 10.0;
  double velocity = 25.0;
  double trans_disturbance = 100.0;
  double attitude = 3.0;
  double rate = 50.0;
  double rot_disturbance = 500.0;

  Vec18 to_vector() const;
  void validate() const;
};

/// Sampled outputs fed to every observer.
struct Measurement {
  Vec3 position_error = Vec3::Zero();  // measured p - p_r
  Vec3 attitude_error = Vec3::Zero();  // measured theta_1 - theta_r
  Vec3 euler = Vec3::Zero();           // measured theta_1
  double t = 0.0;
};

/// Reference quantities the observer model needs.
struct ObserverReferences {
  Vec3 acceleration = Vec3::Zero();   // p_r''
  Vec3 attitude_rate = Vec3::Zero();  // filtered attitude-reference rate
};

/// Right-hand side of the extended high-gain observer for failure model `mode`.
Vec18 observer_derivative(const ExtendedEstimate& est, FailureMode mode, const Measurement& meas,
                          const RotorCommand& omega_s, const ObserverReferences& refs,
                          const ObserverGains& gains, const VehicleParams& params);

ExtendedEstimate saturate_estimates(const ExtendedEstimate& est, const EstimateBounds& bounds);

/// RK4 substeps per sample interval: ceil(10 dt / epsilon), epsilon the faster of the two channels.
int observer_substeps(double dt, double epsilon);

using EstimateBank = std::array<ExtendedEstimate, kModelCount>;

/// Advances all seven observers over one sample interval. The command and references are held;
/// the measured errors are interpolated linearly from `previous` to `meas` across the interval.
/// Estimates are clamped after every substep.
EstimateBank step_bank(const EstimateBank& bank, const Measurement& previous, const Measurement& meas,
                       const RotorCommand& omega_s, const ObserverReferences& refs, double dt,
                       const ObserverGains& gains, const EstimateBounds& bounds, const VehicleParams& params);

/// Stateful wrapper around step_bank that also keeps each observer's latest right-hand side.
class EhgoBank {
 public:
  EhgoBank(ObserverGains gains, EstimateBounds bounds, VehicleParams params);

  /// Position/attitude blocks from the measurement; everything else zero.
  void initialize(const Measurement& meas);
  void step(const Measurement& meas, const RotorCommand& omega_s, const ObserverReferences& refs, double dt);
  /// Re-expresses every attitude and rate estimate against a new held reference.
  void shift_reference(const Vec3& d_attitude, const Vec3& d_rate);

  const ExtendedEstimate& estimate(FailureMode mode) const { return bank_[mode.index()]; }
  const EstimateBank& estimates() const { return bank_; }
  /// Observer right-hand side at the current estimate and the last inputs, with the attitude
  /// block taken relative to a moving reference (the held-reference drift removed).
  const Vec18& derivative(FailureMode mode) const { return derivatives_[mode.index()]; }
  const ObserverGains& gains() const { return gains_; }

 private:
  void refresh_derivatives(const Measurement& meas, const RotorCommand& omega_s, const ObserverReferences& refs);

  ObserverGains gains_;
  EstimateBounds bounds_;
  VehicleParams params_;
  EstimateBank bank_{};
  Measurement last_;
  std::array<Vec18, kModelCount> derivatives_{};
};

}  // namespace hexftc
