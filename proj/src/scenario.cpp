#include "hexftc/scenario.hpp"

#include <toml.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace hexftc {

Vec3 TrajectoryConfig::position(double t) const {
  return offset + amplitude.cwiseProduct((frequency * t + phase).array().sin().matrix());
}

Vec3 TrajectoryConfig::velocity(double t) const {
  return amplitude.cwiseProduct(frequency).cwiseProduct((frequency * t + phase).array().cos().matrix());
}

Vec3 TrajectoryConfig::acceleration(double t) const {
  return -amplitude.cwiseProduct(frequency.cwiseAbs2()).cwiseProduct((frequency * t + phase).array().sin().matrix());
}

namespace {

Vec3 sin_cos_sin(double a, double w, double t) { return a * Vec3(std::sin(w * t), std::cos(w * t), std::sin(w * t)); }

}  // namespace

Vec3 DisturbanceConfig::rotational(double t) const { return sin_cos_sin(rotational_amplitude, frequency, t); }
Vec3 DisturbanceConfig::translational(double t) const { return sin_cos_sin(translational_amplitude, frequency, t); }

DisturbanceSignal DisturbanceConfig::signal() const {
  const DisturbanceConfig self = *this;
  return {[self](double t) { return self.translational(t); }, [self](double t) { return self.rotational(t); }};
}

const char* to_string(AllocationPolicy policy) {
  switch (policy) {
    case AllocationPolicy::Always: return "always";
    case AllocationPolicy::PostSwitch: return "post_switch";
    case AllocationPolicy::Never: return "never";
  }
  return "?";
}

AllocationPolicy allocation_policy_from_string(const std::string& s) {
  if (s == "always") return AllocationPolicy::Always;
  if (s == "post_switch") return AllocationPolicy::PostSwitch;
  if (s == "never") return AllocationPolicy::Never;
  throw ConfigError("allocation.mode must be always, post_switch or never", {"allocation.mode"});
}

std::size_t ScenarioConfig::ticks() const {
  return static_cast<std::size_t>(std::llround(duration * control_rate));
}

void ScenarioConfig::validate() const {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const char* field) {
    if (!ok) bad.emplace_back(field);
  };
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  check(positive(duration), "duration");
  check(positive(control_rate), "control_rate");
  check(plant_substeps >= 1, "plant_substeps");

  try { vehicle.validate(); } catch (const DomainError&) { bad.emplace_back("vehicle"); }
  check(initial.to_vector().allFinite() && std::abs(initial.euler.y()) < M_PI / 2 &&
            std::abs(initial.euler.x()) < M_PI / 2,
        "initial");
  check(trajectory.amplitude.allFinite() && trajectory.frequency.allFinite() && trajectory.phase.allFinite() &&
            trajectory.offset.allFinite(),
        "trajectory");
  check(std::isfinite(disturbance.rotational_amplitude), "disturbance.rotational_amplitude");
  check(std::isfinite(disturbance.translational_amplitude), "disturbance.translational_amplitude");
  check(std::isfinite(disturbance.frequency), "disturbance.frequency");
  check(failure.rotor >= 0 && failure.rotor <= kRotorCount, "failure.rotor");
  check(failure.rotor == 0 || (std::isfinite(failure.time) && failure.time >= 0.0 && failure.time <= duration),
        "failure.time");
  check(std::isfinite(noise.position_std) && noise.position_std >= 0.0, "noise.position_std");
  check(std::isfinite(noise.attitude_std) && noise.attitude_std >= 0.0, "noise.attitude_std");
  check(observer.gains.alpha.allFinite() && is_hurwitz_cubic(observer.gains.alpha), "observer.alpha");
  check(positive(observer.gains.epsilon), "observer.epsilon");
  check(!observer.gains.epsilon_translational || positive(*observer.gains.epsilon_translational),
        "observer.epsilon_translational");
  check((observer.bounds.to_vector().array() > 0.0).all(), "observer.bounds");
  const ControlGains& g = control.gains;
  check(positive(g.gamma1), "control.gamma1");
  check(positive(g.gamma2), "control.gamma2");
  check(positive(g.beta1), "control.beta1");
  check(positive(g.beta2), "control.beta2");
  check(std::isfinite(control.filter_time_constant) && control.filter_time_constant >= 0.0,
        "control.filter_time_constant");
  check(control.guard.min_cos_tilt > 0.0 && control.guard.min_cos_tilt < 1.0, "control.min_cos_tilt");
  check(positive(control.guard.min_vertical_accel), "control.min_vertical_accel");
  check(!supervisor.a0 || positive(*supervisor.a0), "supervisor.a0");
  check(positive(supervisor.a0_factor), "supervisor.a0_factor");
  check(!supervisor.dwell || (std::isfinite(*supervisor.dwell) && *supervisor.dwell >= 0.0), "supervisor.dwell");
  check(std::isfinite(supervisor.start_time) && supervisor.start_time >= 0.0, "supervisor.start_time");
  try { allocation.solver.validate(); } catch (const DomainError&) { bad.emplace_back("allocation"); }
  check(positive(outcome.recovery_window), "outcome.recovery_window");
  check(positive(outcome.recovery_tolerance), "outcome.recovery_tolerance");
  check(positive(outcome.crash_position_error), "outcome.crash_position_error");

  if (!bad.empty()) {
    std::string msg = "invalid config fields:";
    for (const auto& f : bad) msg += " " + f;
    throw ConfigError(msg, bad);
  }
}

ScenarioConfig default_scenario() { return ScenarioConfig{}; }

std::vector<BuiltinScenario> builtin_scenarios() {
  return {
      {"default", "sinusoidal trajectory, full disturbances, rotor 4 fails at 10 s"},
      {"nominal", "default without the rotor failure, 30 s"},
      {"calm", "default failure with disturbances and noise off"},
      {"hover", "hold the origin, no disturbances, no noise, no failure"},
      {"noisy", "default with 2 mm / 0.2 deg measurement noise"},
  };
}

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig cfg = default_scenario();
  cfg.name = name;
  if (name == "default") return cfg;
  if (name == "nominal") {
    cfg.failure.rotor = 0;
    cfg.duration = 30.0;
    return cfg;
  }
  if (name == "calm") {
    cfg.disturbance.rotational_amplitude = 0.0;
    cfg.disturbance.translational_amplitude = 0.0;
    cfg.noise = NoiseConfig{0.0, 0.0};
    return cfg;
  }
  if (name == "hover") {
    cfg.trajectory.amplitude.setZero();
    cfg.disturbance.rotational_amplitude = 0.0;
    cfg.disturbance.translational_amplitude = 0.0;
    cfg.noise = NoiseConfig{0.0, 0.0};
    cfg.failure.rotor = 0;
    cfg.duration = 10.0;
    return cfg;
  }
  if (name == "noisy") {
    cfg.noise = NoiseConfig{0.002, 0.2 * M_PI / 180.0};
    return cfg;
  }
  throw ConfigError("unknown scenario '" + name + "'", {"base"});
}

namespace {

/// Reads one TOML table, remembering which keys were consumed and which were malformed.
class TableReader {
 public:
  TableReader(const toml::table* table, std::string prefix, std::vector<std::string>& errors)
      : table_(table), prefix_(std::move(prefix)), errors_(errors) {}

  void read(const std::string& key, double& out) {
    if (auto node = take(key)) {
      if (auto v = node->value<double>()) out = *v;
      else fail(key);
    }
  }

  void read(const std::string& key, std::optional<double>& out) {
    double v = out.value_or(0.0);
    if (has(key)) {
      read(key, v);
      out = v;
    }
  }

  void read(const std::string& key, int& out) {
    if (auto node = take(key)) {
      if (auto v = node->value<int64_t>()) out = static_cast<int>(*v);
      else fail(key);
    }
  }

  void read(const std::string& key, unsigned& out) {
    if (auto node = take(key)) {
      auto v = node->value<int64_t>();
      if (v && *v >= 0) out = static_cast<unsigned>(*v);
      else fail(key);
    }
  }

  void read(const std::string& key, bool& out) {
    if (auto node = take(key)) {
      if (auto v = node->value<bool>()) out = *v;
      else fail(key);
    }
  }

  void read(const std::string& key, std::string& out) {
    if (auto node = take(key)) {
      if (auto v = node->value<std::string>()) out = *v;
      else fail(key);
    }
  }

  template <int N>
  void read(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    auto node = take(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr || arr->size() != static_cast<std::size_t>(N)) return fail(key);
    for (int k = 0; k < N; ++k) {
      auto v = (*arr)[static_cast<std::size_t>(k)].value<double>();
      if (!v) return fail(key);
      out(k) = *v;
    }
  }

  void read_rotor_map(const std::string& key, std::array<int, kRotorCount>& out) {
    auto node = take(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr || arr->size() != kRotorCount) return fail(key);
    for (int k = 0; k < kRotorCount; ++k) {
      auto v = (*arr)[static_cast<std::size_t>(k)].value<int64_t>();
      if (!v) return fail(key);
      out[k] = static_cast<int>(*v);
    }
  }

  /// A number, or the string "auto" which clears the value.
  void read_number_or_auto(const std::string& key, std::optional<double>& out) {
    if (auto node = take(key)) {
      if (auto v = node->value<double>()) out = *v;
      else if (node->value<std::string>() == std::optional<std::string>("auto")) out.reset();
      else fail(key);
    }
  }

  bool has(const std::string& key) const { return table_ && table_->contains(key); }

  TableReader sub(const std::string& key) {
    const toml::node* node = take(key);
    const toml::table* t = node ? node->as_table() : nullptr;
    if (node && !t) fail(key);
    return TableReader(t, path(key), errors_);
  }

  void fail(const std::string& key) { errors_.push_back(path(key)); }

  /// Reports any key that nothing consumed.
  void finish() {
    if (!table_) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (!seen_.count(key)) errors_.push_back(path(key));
    }
  }

 private:
  const toml::node* take(const std::string& key) {
    if (!table_) return nullptr;
    seen_.insert(key);
    return table_->get(key);
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const toml::table* table_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_scenario(TableReader& root, ScenarioConfig& cfg) {
  root.read("name", cfg.name);
  root.read("duration", cfg.duration);
  root.read("control_rate", cfg.control_rate);
  root.read("plant_substeps", cfg.plant_substeps);
  root.read("seed", cfg.seed);

  {
    TableReader t = root.sub("vehicle");
    VehicleParams& v = cfg.vehicle;
    t.read("mass", v.mass);
    Vec3 diag = v.inertia.diagonal();
    if (t.has("inertia")) {
      t.read("inertia", diag);
      v.inertia = diag.asDiagonal();
    }
    t.read("arm_length", v.arm_length);
    t.read("thrust_coeff", v.thrust_coeff);
    t.read("drag_coeff", v.drag_coeff);
    t.read("gravity", v.gravity);
    t.read("max_rotor_speed", v.max_rotor_speed);
    t.finish();
  }
  {
    TableReader t = root.sub("initial");
    t.read("position", cfg.initial.position);
    t.read("velocity", cfg.initial.velocity);
    t.read("euler", cfg.initial.euler);
    t.read("euler_rates", cfg.initial.euler_rates);
    t.finish();
  }
  {
    TableReader t = root.sub("trajectory");
    t.read("amplitude", cfg.trajectory.amplitude);
    t.read("frequency", cfg.trajectory.frequency);
    t.read("phase", cfg.trajectory.phase);
    t.read("offset", cfg.trajectory.offset);
    t.finish();
  }
  {
    TableReader t = root.sub("disturbance");
    t.read("rotational_amplitude", cfg.disturbance.rotational_amplitude);
    t.read("translational_amplitude", cfg.disturbance.translational_amplitude);
    t.read("frequency", cfg.disturbance.frequency);
    t.finish();
  }
  {
    TableReader t = root.sub("failure");
    t.read("rotor", cfg.failure.rotor);
    t.read("time", cfg.failure.time);
    t.finish();
  }
  {
    TableReader t = root.sub("noise");
    t.read("position_std", cfg.noise.position_std);
    double deg = cfg.noise.attitude_std * 180.0 / M_PI;
    if (t.has("attitude_std_deg")) {
      t.read("attitude_std_deg", deg);
      cfg.noise.attitude_std = deg * M_PI / 180.0;
    }
    t.finish();
  }
  {
    TableReader t = root.sub("observer");
    t.read("alpha", cfg.observer.gains.alpha);
    t.read("epsilon", cfg.observer.gains.epsilon);
    t.read_number_or_auto("epsilon_translational", cfg.observer.gains.epsilon_translational);
    TableReader b = t.sub("bounds");
    EstimateBounds& eb = cfg.observer.bounds;
    b.read("position", eb.position);
    b.read("velocity", eb.velocity);
    b.read("trans_disturbance", eb.trans_disturbance);
    b.read("attitude", eb.attitude);
    b.read("rate", eb.rate);
    b.read("rot_disturbance", eb.rot_disturbance);
    b.finish();
    t.finish();
  }
  {
    TableReader t = root.sub("control");
    t.read("gamma1", cfg.control.gains.gamma1);
    t.read("gamma2", cfg.control.gains.gamma2);
    t.read("beta1", cfg.control.gains.beta1);
    t.read("beta2", cfg.control.gains.beta2);
    t.read("filter_time_constant", cfg.control.filter_time_constant);
    t.read("min_cos_tilt", cfg.control.guard.min_cos_tilt);
    t.read("min_vertical_accel", cfg.control.guard.min_vertical_accel);
    t.finish();
  }
  {
    TableReader t = root.sub("supervisor");
    t.read("enabled", cfg.supervisor.enabled);
    t.read_number_or_auto("a0", cfg.supervisor.a0);
    t.read("a0_factor", cfg.supervisor.a0_factor);
    t.read("dwell", cfg.supervisor.dwell);
    t.read("start_time", cfg.supervisor.start_time);
    t.read("calibration_seed_offset", cfg.supervisor.calibration_seed_offset);
    t.finish();
  }
  {
    TableReader t = root.sub("allocation");
    std::string mode = to_string(cfg.allocation.policy);
    t.read("mode", mode);
    try {
      cfg.allocation.policy = allocation_policy_from_string(mode);
    } catch (const ConfigError&) {
      t.fail("mode");
    }
    AllocatorConfig& s = cfg.allocation.solver;
    t.read("lambda", s.lambda);
    t.read("weights", s.weights);
    t.read("delta", s.delta);
    t.read("down_fraction", s.down_fraction);
    t.read("max_iterations", s.max_iterations);
    t.read_rotor_map("opposite", s.opposite);
    t.finish();
  }
  {
    TableReader t = root.sub("outcome");
    t.read("recovery_window", cfg.outcome.recovery_window);
    t.read("recovery_tolerance", cfg.outcome.recovery_tolerance);
    t.read("crash_position_error", cfg.outcome.crash_position_error);
    t.finish();
  }
}

}  // namespace

ScenarioConfig parse_scenario_toml(const std::string& text, const std::string& origin) {
  toml::table doc;
  try {
    doc = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << origin << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str(), {});
  }
  std::string base = "default";
  if (auto b = doc["base"].value<std::string>()) base = *b;
  else if (doc.contains("base")) throw ConfigError("base must be a scenario name", {"base"});
  ScenarioConfig cfg = builtin_scenario(base);

  std::vector<std::string> errors;
  TableReader root(&doc, "", errors);
  std::string ignored;
  root.read("base", ignored);
  read_scenario(root, cfg);
  root.finish();
  if (!errors.empty()) {
    std::string msg = "invalid config fields:";
    for (const auto& f : errors) msg += " " + f;
    throw ConfigError(msg, errors);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  for (const auto& b : builtin_scenarios()) {
    if (b.name == name_or_path) return builtin_scenario(name_or_path);
  }
  const std::filesystem::path p(name_or_path);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(p, ec)) throw ConfigError("config not found: " + name_or_path, {});
  std::ifstream in(p);
  if (!in) throw ConfigError("config not found: " + name_or_path, {});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_toml(ss.str(), name_or_path);
}

}  // namespace hexftc
