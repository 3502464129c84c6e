#pragma once

#include "hexftc/allocation.hpp"
#include "hexftc/ehgo_bank.hpp"
#include "hexftc/failure_supervisor.hpp"
#include "hexftc/flight_control.hpp"
#include "hexftc/types.hpp"
#include "hexftc/vehicle_model.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hexftc {

/// Thrown for malformed or out-of-range configuration; `fields` names every offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> fields)
      : Error(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// p_r(t) = offset + amplitude .* sin(frequency t + phase), per axis.
struct TrajectoryConfig {
  Vec3 amplitude{1.0, 0.5, 0.0};
  Vec3 frequency{1.0, 1.0, 1.0};  // rad/s
  Vec3 phase = Vec3::Zero();
  Vec3 offset = Vec3::Zero();

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
};

/// sigma(t) = amplitude * [sin(w t), cos(w t), sin(w t)] for both channels.
struct DisturbanceConfig {
  double rotational_amplitude = 12.0;    // rad/s^2
  double translational_amplitude = 1.0;  // m/s^2
  double frequency = 1.0;                // rad/s

  Vec3 rotational(double t) const;
  Vec3 translational(double t) const;
  DisturbanceSignal signal() const;
};

struct FailureConfig {
  int rotor = 4;  // 0: no failure
  double time = 10.0;

  FailureMode mode() const { return FailureMode(rotor); }
  /// True failure configuration in force at time t.
  FailureMode active(double t) const { return t >= time ? FailureMode(rotor) : FailureMode::nominal(); }
};

struct NoiseConfig {
  double position_std = 1e-5;                  // m
  double attitude_std = 0.001 * M_PI / 180.0;  // rad
};

enum class AllocationPolicy { Always, PostSwitch, Never };

const char* to_string(AllocationPolicy policy);
AllocationPolicy allocation_policy_from_string(const std::string& s);

struct ControlSettings {
  ControlGains gains;
  double filter_time_constant = 0.05;  // s
  TiltGuard guard;
};

struct SupervisorSettings {
  bool enabled = true;
  std::optional<double> a0;  // unset: calibrated from a failure-free run
  double a0_factor = 3.0;
  std::optional<double> dwell;  // unset: 5 epsilon
  double start_time = 3.0;  // past the start-up transient of the position loop
  unsigned calibration_seed_offset = 1000;
};

struct ObserverSettings {
  ObserverGains gains;
  EstimateBounds bounds;
};

struct AllocationSettings {
  AllocationPolicy policy = AllocationPolicy::Never;
  AllocatorConfig solver;
};

struct OutcomeSettings {
  double recovery_window = 2.0;         // s after the switch
  double recovery_tolerance = 0.25;     // m, max position error inside the window
  double crash_position_error = 10.0;   // m
};

struct ScenarioConfig {
  std::string name = "default";
  double duration = 20.0;
  double control_rate = 100.0;
  int plant_substeps = 10;
  unsigned seed = 1;

  VehicleParams vehicle;
  VehicleState initial;
  TrajectoryConfig trajectory;
  DisturbanceConfig disturbance;
  FailureConfig failure;
  NoiseConfig noise;
  ObserverSettings observer;
  ControlSettings control;
  SupervisorSettings supervisor;
  AllocationSettings allocation;
  OutcomeSettings outcome;

  double dt() const { return 1.0 / control_rate; }
  std::size_t ticks() const;
  double dwell() const { return supervisor.dwell.value_or(5.0 * observer.gains.epsilon); }
  /// Throws ConfigError listing every invalid field.
  void validate() const;
};

/// Sinusoidal trajectory, amplitude-12 rotational and amplitude-1 translational disturbances,
/// rotor 4 fails at 10 s, 20 s at 100 Hz, noise on.
ScenarioConfig default_scenario();

struct BuiltinScenario {
  std::string name;
  std::string description;
};

std::vector<BuiltinScenario> builtin_scenarios();
/// Throws ConfigError if unknown.
ScenarioConfig builtin_scenario(const std::string& name);

/// Parses a TOML document. A top-level `base = "<builtin>"` selects the starting point
/// (default: "default"); every other key overrides it. Unknown keys are errors.
ScenarioConfig parse_scenario_toml(const std::string& text, const std::string& origin = "<string>");

/// Loads a builtin by name or a TOML file by path. Throws ConfigError("config not found") otherwise.
ScenarioConfig load_scenario(const std::string& name_or_path);

}  // namespace hexftc
