#pragma once

#include "hexftc/scenario.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hexftc {

enum class Outcome { Recovered, Nominal, Degraded, Crash };

const char* to_string(Outcome outcome);

struct TelemetryRecord {
  double t = 0.0;
  VehicleState state;          // truth, noise free
  Vec3 position_ref = Vec3::Zero();
  Vec3 attitude_ref = Vec3::Zero();  // reference the measurement at this tick was taken against
  Vec3 attitude_ref_rate = Vec3::Zero();
  std::array<double, kModelCount> disturbance_norms{};  // |varsigma_hat| per observer
  double v_dot = 0.0;
  double xi_norm_sq = 0.0;
  bool detect = false;
  SupervisorPhase phase = SupervisorPhase::Nominal;
  int selected = 0;
  int true_mode = 0;
  RotorCommand omega = RotorCommand::Zero();  // applied (saturated) command
  ControlCommand command;                     // desired (u_fd, tau_d)
  bool guarded = false;
  int allocation_iterations = 0;
  // Scaled rotational observer error per model, from truth.
  std::array<Vec9, kModelCount> eta{};
  std::array<Vec3, kModelCount> sigma_m{};
  Vec3 rot_disturbance = Vec3::Zero();  // sigma_xi(t)

  double position_error() const { return (state.position - position_ref).norm(); }
};

struct SimulationResult {
  ScenarioConfig config;  // with a0 and dwell resolved
  double a0 = 0.0;
  double dwell = 0.0;
  std::vector<TelemetryRecord> records;
  Outcome outcome = Outcome::Nominal;
  std::optional<double> t_detect;
  std::optional<double> t_switch;
  int selected = 0;
  std::optional<double> t_crash;
  std::string crash_reason;
  /// Window used for the recovery check and the max position error inside it.
  double window_start = 0.0;
  double window_error = 0.0;

  /// Index of the first record at or after time t (records.size() if none).
  std::size_t index_at(double t) const;
};

/// Failure-free run with a different seed and switching off; returns factor * max(|xi|^2 + V_dot)
/// over t >= start_time.
double calibrate_threshold(const ScenarioConfig& cfg);

/// Runs the closed loop. Never throws for flight-domain problems; those end the run as CRASH.
SimulationResult run_scenario(const ScenarioConfig& cfg);

}  // namespace hexftc
