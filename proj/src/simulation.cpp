#include "hexftc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hexftc {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Recovered: return "RECOVERED";
    case Outcome::Nominal: return "NOMINAL";
    case Outcome::Degraded: return "DEGRADED";
    case Outcome::Crash: return "CRASH";
  }
  return "?";
}

std::size_t SimulationResult::index_at(double t) const {
  const auto it = std::lower_bound(records.begin(), records.end(), t - 1e-9,
                                   [](const TelemetryRecord& r, double v) { return r.t < v; });
  return static_cast<std::size_t>(it - records.begin());
}

namespace {

VehicleState integrate_plant(const VehicleState& s0, const RotorCommand& omega, const ScenarioConfig& cfg,
                             const DisturbanceSignal& dist, double t0, double dt) {
  const int n = cfg.plant_substeps;
  const double h = dt / n;
  Vec12 x = s0.to_vector();
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * h;
    const FailureMode mode = cfg.failure.active(t + 1e-12);
    auto rhs = [&](const Vec12& y, double tt) {
      return plant_derivative(VehicleState::from_vector(y), omega, mode, dist, tt, cfg.vehicle);
    };
    const Vec12 k1 = rhs(x, t);
    const Vec12 k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h);
    const Vec12 k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h);
    const Vec12 k4 = rhs(x + h * k3, t + h);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return VehicleState::from_vector(x);
}

std::optional<std::string> domain_violation(const VehicleState& s, const Vec3& p_ref, const ScenarioConfig& cfg) {
  if (!s.to_vector().allFinite()) return "non-finite state";
  if (std::cos(s.euler.x()) * std::cos(s.euler.y()) < cfg.control.guard.min_cos_tilt) return "tilt outside guard cone";
  if ((s.position - p_ref).norm() > cfg.outcome.crash_position_error) return "position error limit";
  return std::nullopt;
}

struct ScaledError {
  Vec9 eta;
  Vec3 sigma_m;
};

ScaledError observer_error(const ExtendedEstimate& est, FailureMode model, FailureMode truth, const VehicleState& s,
                           const Vec3& att_ref, const Vec3& ref_rate, const RotorCommand& omega,
                           const Vec3& sigma_xi, const ScenarioConfig& cfg) {
  const double eps = cfg.observer.gains.epsilon;
  ScaledError e;
  e.sigma_m = model_mismatch(omega, model, truth, s.euler, cfg.vehicle);
  e.eta << (s.euler - att_ref - est.attitude_error) / (eps * eps),
      (s.euler_rates - ref_rate - est.rate_error) / eps, sigma_xi + e.sigma_m - est.rot_disturbance;
  return e;
}

SimulationResult simulate(const ScenarioConfig& cfg, double a0) {
  SimulationResult res;
  res.config = cfg;
  res.a0 = a0;
  res.dwell = cfg.dwell();
  res.config.supervisor.a0 = a0;
  res.config.supervisor.dwell = res.dwell;

  const double dt = cfg.dt();
  const std::size_t n = cfg.ticks();
  const DisturbanceSignal dist = cfg.disturbance.signal();
  const VehicleParams& params = cfg.vehicle;

  EhgoBank bank(cfg.observer.gains, cfg.observer.bounds, params);
  SupervisorConfig sc;
  sc.a0 = a0;
  sc.dwell = res.dwell;
  sc.start_time = cfg.supervisor.start_time;
  sc.enabled = cfg.supervisor.enabled;
  Supervisor supervisor(sc, cfg.control.gains.rotational_matrix());
  Allocator allocator(cfg.allocation.solver, params);
  ReferenceRateFilter filter(cfg.control.filter_time_constant, dt);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise3 = [&](double sd) -> Vec3 {
    Vec3 v(normal(rng), normal(rng), normal(rng));
    return v * sd;
  };

  VehicleState state = cfg.initial;
  Vec3 att_ref = Vec3::Zero();
  Vec3 ref_rate = Vec3::Zero();
  Vec3 prev_ref_accel = Vec3::Zero();
  RotorCommand omega = RotorCommand::Zero();
  res.records.reserve(n + 1);

  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Vec3 p_ref = cfg.trajectory.position(t);
    const Vec3 ref_accel = cfg.trajectory.acceleration(t);

    Measurement meas;
    meas.t = t;
    const Vec3 p_meas = state.position + noise3(cfg.noise.position_std);
    meas.euler = state.euler + noise3(cfg.noise.attitude_std);
    meas.position_error = p_meas - p_ref;
    meas.attitude_error = meas.euler - att_ref;

    TelemetryRecord rec;
    rec.t = t;
    rec.state = state;
    rec.position_ref = p_ref;
    rec.attitude_ref = att_ref;
    rec.attitude_ref_rate = ref_rate;
    const FailureMode truth_prev = k == 0 ? FailureMode::nominal() : cfg.failure.active(t - dt + 1e-12);
    rec.true_mode = cfg.failure.active(t + 1e-12).index();

    try {
      if (k == 0) bank.initialize(meas);
      else bank.step(meas, omega, ObserverReferences{prev_ref_accel, ref_rate}, dt);
      const FailureMode model = supervisor.tick(bank, t);

      rec.rot_disturbance = dist.rotational(t);
      for (int i = 0; i < kModelCount; ++i) {
        const ExtendedEstimate& e = bank.estimate(FailureMode(i));
        rec.disturbance_norms[i] = e.rot_disturbance.norm();
        const ScaledError se = observer_error(e, FailureMode(i), truth_prev, state, att_ref, ref_rate, omega,
                                              rec.rot_disturbance, cfg);
        rec.eta[i] = se.eta;
        rec.sigma_m[i] = se.sigma_m;
      }
      rec.v_dot = supervisor.signal().v_dot;
      rec.xi_norm_sq = supervisor.signal().xi_norm_sq;
      rec.detect = supervisor.signal().flag;
      rec.phase = supervisor.phase();
      rec.selected = model.index();

      const ExtendedEstimate& est = bank.estimate(model);
      const Vec3 f_t = translational_virtual_input(est, ref_accel, cfg.control.gains);
      const AttitudeReference aref = attitude_from_acceleration(f_t, params, cfg.control.guard);
      if (k == 0) filter.reset(aref.euler);
      const Vec3 new_rate = filter.update(aref.euler);
      bank.shift_reference(aref.euler - att_ref, new_rate - ref_rate);
      const Vec3 tau = rotational_control(est, meas.euler, new_rate, cfg.control.gains, params.inertia);
      const ControlCommand u_hat{aref.thrust, tau};

      const bool use_allocation =
          cfg.allocation.policy == AllocationPolicy::Always ||
          (cfg.allocation.policy == AllocationPolicy::PostSwitch && supervisor.phase() == SupervisorPhase::Switched);
      RotorCommand cmd;
      if (use_allocation) {
        cmd = allocator.allocate(u_hat, model);
        rec.allocation_iterations = allocator.last().iterations;
      } else {
        cmd = mix_pseudo_inverse(u_hat, model, params);
      }
      omega = saturate_rotor_command(cmd, params);
      rec.omega = omega;
      rec.command = u_hat;
      rec.guarded = aref.guarded;

      att_ref = aref.euler;
      ref_rate = new_rate;
      prev_ref_accel = ref_accel;
      res.records.push_back(rec);

      if (k == n) break;
      state = integrate_plant(state, omega, cfg, dist, t, dt);
      if (auto why = domain_violation(state, cfg.trajectory.position(t + dt), cfg)) {
        res.t_crash = t + dt;
        res.crash_reason = *why;
        break;
      }
    } catch (const SingularityError& e) {
      res.records.push_back(rec);
      res.t_crash = t;
      res.crash_reason = e.what();
      break;
    }
  }

  res.t_detect = supervisor.armed_time() ? supervisor.armed_time() : supervisor.detect_time();
  res.t_switch = supervisor.switch_time();
  res.selected = supervisor.selected().index();

  if (res.t_crash) {
    res.outcome = Outcome::Crash;
    return res;
  }
  if (cfg.failure.rotor == 0) {
    res.outcome = Outcome::Nominal;
    return res;
  }
  res.window_start = res.t_switch ? *res.t_switch : std::max(cfg.failure.time, 0.0);
  const double window_end = res.window_start + cfg.outcome.recovery_window;
  res.window_error = 0.0;
  for (std::size_t k = res.index_at(res.window_start); k < res.records.size() && res.records[k].t <= window_end + 1e-9;
       ++k) {
    res.window_error = std::max(res.window_error, res.records[k].position_error());
  }
  const bool window_fits = window_end <= cfg.duration + 1e-9;
  res.outcome = window_fits && res.window_error < cfg.outcome.recovery_tolerance ? Outcome::Recovered
                                                                                  : Outcome::Degraded;
  return res;
}

}  // namespace

double calibrate_threshold(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.failure.rotor = 0;
  c.seed = cfg.seed + cfg.supervisor.calibration_seed_offset;
  c.supervisor.enabled = false;
  const SimulationResult r = simulate(c, 1.0);
  double worst = 0.0;
  for (const auto& rec : r.records) {
    if (rec.t >= cfg.supervisor.start_time) worst = std::max(worst, rec.xi_norm_sq + rec.v_dot);
  }
  return cfg.supervisor.a0_factor * std::max(worst, 1e-6);
}

SimulationResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const double a0 = cfg.supervisor.a0 ? *cfg.supervisor.a0 : calibrate_threshold(cfg);
  return simulate(cfg, a0);
}

}  // namespace hexftc
