#pragma once

#include "hexftc/ehgo_bank.hpp"
#include "hexftc/types.hpp"

#include <array>
#include <optional>

namespace hexftc {

/// Solves P A + A^T P = -I for Hurwitz A (Kronecker form, then symmetrized).
/// Throws NotHurwitzError if A has an eigenvalue with nonnegative real part.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a);

/// 2 xi^T P xi_dot.
double lyapunov_derivative_estimate(const Vec6& xi, const Vec6& xi_dot, const Mat6& p);

/// True when V_dot > a0 - |xi|^2, i.e. the decrease condition is violated.
bool detect(double v_dot, double xi_norm_sq, double a0);

/// argmin over rotors 1..6 of the disturbance-estimate norms; ties go to the lowest index.
FailureMode select_model(const std::array<double, kRotorCount>& norms);

struct SupervisorConfig {
  double a0 = 1.0;          // detection margin
  double dwell = 0.05;      // detection must persist this long before switching (s)
  double start_time = 3.0;  // detector ignores everything before this (s)
  bool enabled = true;      // false: never leave the nominal model
};

enum class SupervisorPhase { Nominal, Armed, Switched };

const char* to_string(SupervisorPhase phase);

/// Quantities computed on each supervisor tick, kept for telemetry.
struct DetectorSignal {
  double v_dot = 0.0;
  double xi_norm_sq = 0.0;
  bool flag = false;
};

class Supervisor {
 public:
  Supervisor(SupervisorConfig config, const Mat6& a_xi);

  /// Evaluates the detector on the nominal observer and advances the state machine.
  /// Returns the model to control with.
  FailureMode tick(const EhgoBank& bank, double t);

  SupervisorPhase phase() const { return phase_; }
  FailureMode selected() const { return selected_; }
  std::optional<double> detect_time() const { return t_detect_; }
  std::optional<double> switch_time() const { return t_switch_; }
  /// Detection time of the episode that led to the switch.
  std::optional<double> armed_time() const { return t_armed_; }
  const DetectorSignal& signal() const { return signal_; }
  const Mat6& lyapunov_matrix() const { return p_; }
  const SupervisorConfig& config() const { return cfg_; }

 private:
  SupervisorConfig cfg_;
  Mat6 p_;
  SupervisorPhase phase_ = SupervisorPhase::Nominal;
  FailureMode selected_;
  std::optional<double> t_detect_;
  std::optional<double> t_armed_;
  std::optional<double> t_switch_;
  DetectorSignal signal_;
};

}  // namespace hexftc
