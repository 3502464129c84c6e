// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

#include "hexftc/allocation.hpp"
#include "hexftc/analysis.hpp"
#include "hexftc/failure_supervisor.hpp"
#include "hexftc/flight_control.hpp"
#include "hexftc/report.hpp"
#include "hexftc/simulation.hpp"
#include "hexftc/vehicle_model.hpp"

#include "../oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace hexftc;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string opt(const std::optional<double>& t) { return t ? fmt("%.3f", *t) : std::string("none"); }

Verdict default_recovery() {
  const ScenarioConfig cfg = builtin_scenario("default");
  const auto t0 = std::chrono::steady_clock::now();
  const SimulationResult r = run_scenario(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double tf = cfg.failure.time;
  const bool fired_after = r.t_detect && *r.t_detect >= tf;
  const bool latency = r.t_switch && *r.t_switch - tf <= 0.15 + 1e-9;
  std::ostringstream d;
  d << to_string(r.outcome) << " i_t=" << r.selected << " t_detect=" << opt(r.t_detect) << " t_s=" << opt(r.t_switch)
    << " window_err=" << fmt("%.4f", r.window_error) << " wall=" << fmt("%.2fs", wall);
  return {fired_after && r.selected == 4 && r.outcome == Outcome::Recovered && r.window_error < 0.25 && latency &&
              wall < 10.0,
          d.str()};
}

Verdict norm_ordering() {
  bool ok = true;
  std::ostringstream d;
  for (int star = 1; star <= kRotorCount; ++star) {
    ScenarioConfig cfg = builtin_scenario("default");
    cfg.failure.rotor = star;
    const SimulationResult r = run_scenario(cfg);
    int bad = 0, total = 0;
    if (r.t_switch) {
      for (std::size_t k = r.index_at(*r.t_switch); k < r.records.size() && r.records[k].t <= *r.t_switch + 2.0 + 1e-9;
           ++k) {
        const auto& n = r.records[k].disturbance_norms;
        int best = 1;
        for (int i = 2; i <= kRotorCount; ++i) {
          if (n[i] < n[best]) best = i;
        }
        ++total;
        if (best != star) ++bad;
      }
    }
    const bool this_ok = r.selected == star && r.t_switch && bad == 0;
    ok = ok && this_ok;
    d << " " << star << ":sel=" << r.selected << ",misordered=" << bad << "/" << total;
  }
  return {ok, d.str()};
}

Verdict no_false_positives() {
  bool ok = true;
  std::ostringstream d;
  int fired = 0;
  for (unsigned seed = 1; seed <= 10; ++seed) {
    ScenarioConfig cfg = builtin_scenario("nominal");
    cfg.seed = seed;
    const SimulationResult r = run_scenario(cfg);
    bool any = r.outcome != Outcome::Nominal;
    for (const auto& rec : r.records) any = any || rec.detect;
    if (any) {
      ++fired;
      d << " seed" << seed << ":" << to_string(r.outcome) << ",t_detect=" << opt(r.t_detect);
    }
    ok = ok && !any;
  }
  d << " fired in " << fired << "/10 runs of 30 s";
  return {ok, d.str()};
}

Verdict controllability_table() {
  const VehicleParams p;
  bool ok = true;
  std::ostringstream d;
  d << "single:";
  for (int i = 0; i < kModelCount; ++i) {
    const auto c = controllability_single_failure(FailureMode(i), p);
    ok = ok && c.rank == 6 && c.controllable;
    d << c.rank;
  }
  d << " paired:";
  for (int i = 1; i <= kRotorCount; ++i) {
    const auto c = controllability_paired_disable(FailureMode(i), p);
    ok = ok && c.rank < 6 && !c.controllable;
    d << c.rank;
  }
  return {ok, d.str()};
}

// RMS of |varsigma - varsigma_hat| for the model matching the truth, over [5, 10) s of the
// failure-free part of the default scenario.
double steady_disturbance_error(double eps) {
  ScenarioConfig cfg = builtin_scenario("default");
  cfg.failure.rotor = 0;
  cfg.duration = 10.0;
  cfg.noise = NoiseConfig{0.0, 0.0};
  cfg.observer.gains.epsilon = eps;
  cfg.supervisor.enabled = false;
  cfg.supervisor.a0 = 1.0;
  const SimulationResult r = run_scenario(cfg);
  double sum = 0.0;
  int n = 0;
  for (const auto& rec : r.records) {
    if (rec.t < 5.0 || rec.t >= 10.0) continue;
    sum += rec.eta[0].tail<3>().squaredNorm();
    ++n;
  }
  return std::sqrt(sum / std::max(n, 1));
}

Verdict observer_bound() {
  const AnalysisReport rep = analyze_scenario(builtin_scenario("default"));
  const double e1 = steady_disturbance_error(0.01), e2 = steady_disturbance_error(0.005);
  const double ratio = e1 / e2;
  std::ostringstream d;
  d << "c=" << fmt("%.4g", rep.bound.c) << " max|eta|/bound=" << fmt("%.4g", rep.bound_max_ratio)
    << " steady err eps=0.01:" << fmt("%.4g", e1) << " eps=0.005:" << fmt("%.4g", e2) << " ratio=" << fmt("%.3f", ratio)
    << " (noise off)";
  return {rep.bound.c > 0.0 && rep.bound_holds && ratio >= 1.6 && ratio <= 2.4, d.str()};
}

Verdict epsilon_regimes() {
  const ScenarioConfig cfg = builtin_scenario("default");
  const auto rows = epsilon_sweep(cfg, 0.002, 0.05, 8);
  std::ostringstream d;
  const SweepRow* smallest = nullptr;
  for (const auto& row : rows) {
    d << " " << fmt("%.4g", row.epsilon) << ":" << to_string(row.with_switching) << "/" << to_string(row.without_switching);
    if (!smallest && row.with_switching != Outcome::Crash) smallest = &row;
  }
  const bool part1 = smallest && smallest->without_switching == Outcome::Recovered;

  ScenarioConfig off = cfg;
  off.supervisor.enabled = false;
  const SimulationResult no_switch = run_scenario(off);
  const AnalysisReport rep = analyze_scenario(cfg);
  const bool deadline = rep.run.t_switch && rep.t_s_max_error.empty() && *rep.run.t_switch < rep.t_s_max;
  const bool part2 =
      no_switch.outcome == Outcome::Crash && rep.run.outcome == Outcome::Recovered && deadline;
  d << " | smallest stable eps=" << (smallest ? fmt("%.4g", smallest->epsilon) : std::string("none"))
    << " without switching " << (smallest ? to_string(smallest->without_switching) : "-")
    << " | default eps: without " << to_string(no_switch.outcome) << ", with " << to_string(rep.run.outcome)
    << " t_s=" << opt(rep.run.t_switch) << " t_s_max="
    << (rep.t_s_max_error.empty() ? fmt("%.4f", rep.t_s_max) : "n/a (" + rep.t_s_max_error + ")");
  // diagnostic only: the same sweep without switching once rotor speed limits stop binding
  ScenarioConfig loose = off;
  loose.vehicle.max_rotor_speed = 3000.0;
  d << " | omega_max 3000 without switching:";
  for (double eps : {0.005, 0.01, 0.02, 0.035, 0.05}) {
    loose.observer.gains.epsilon = eps;
    d << " " << fmt("%.4g", eps) << ":" << to_string(run_scenario(loose).outcome);
  }
  return {part1 && part2, d.str()};
}

Verdict allocation_solver() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const VehicleParams params;
  double worst_obj = 0.0, worst_kkt = 0.0, worst_pinv = 0.0, worst_tik = 0.0, worst_bias = 0.0;
  int unconverged = 0;
  for (int n = 0; n < 200; ++n) {
    AllocationProblem p;
    const FailureMode mode(static_cast<int>(u01(rng) * 7) % 7);
    p.effectiveness = mixer_matrix(params) * failure_matrix(mode);
    p.weights = Vec4(1.0 + 9.0 * u01(rng), 1.0 + 9.0 * u01(rng), 1.0 + 9.0 * u01(rng), 0.5 + u01(rng));
    p.lambda = std::pow(10.0, 3.0 * u01(rng));
    p.desired = Vec4(5.0 + 20.0 * u01(rng), 2.0 * u01(rng) - 1.0, 2.0 * u01(rng) - 1.0, 0.2 * u01(rng) - 0.1);
    for (int j = 0; j < 6; ++j) {
      const double lo = -6.0 * u01(rng), hi = 1.0 + 6.0 * u01(rng);
      p.lower(j) = lo;
      p.upper(j) = hi;
    }
    if (!mode.is_nominal()) p.lower(mode.index() - 1) = p.upper(mode.index() - 1) = 0.0;
    const AllocationResult res = allocate(p, std::nullopt, 100);
    if (!res.converged) ++unconverged;
    const Mat6 h = p.hessian();
    const Vec6 x = oracle::fista_box_qp<6>(h, p.linear_term(), p.lower, p.upper);
    const double fo = p.objective(x), fa = p.objective(res.forces);
    worst_obj = std::max(worst_obj, (fa - fo) / std::max(1.0, std::abs(fo)));
    worst_kkt = std::max(worst_kkt, kkt_residual(p, res.forces));
  }
  // Interior, heavily weighted: the pseudo-inverse solution.
  for (int n = 0; n < 50; ++n) {
    AllocationProblem p;
    const FailureMode mode(n % 7);
    p.effectiveness = mixer_matrix(params) * failure_matrix(mode);
    p.weights = Vec4::Ones();
    p.lambda = 1e6;
    p.desired = Vec4(10.0 + 10.0 * u01(rng), 0.4 * u01(rng) - 0.2, 0.4 * u01(rng) - 0.2, 0.04 * u01(rng) - 0.02);
    p.lower = Vec6::Constant(-1e3);
    p.upper = Vec6::Constant(1e3);
    if (!mode.is_nominal()) p.lower(mode.index() - 1) = p.upper(mode.index() - 1) = 0.0;
    const AllocationResult res = allocate(p);
    const Eigen::VectorXd ref = oracle::least_norm(p.effectiveness, p.desired);
    worst_pinv = std::max(worst_pinv, (res.forces - ref).cwiseAbs().maxCoeff());
    // exact optimum of the penalized problem, to tell solver error from the finite-lambda bias
    const Eigen::MatrixXd bm = p.effectiveness;
    const Eigen::VectorXd tik =
        (Eigen::MatrixXd::Identity(6, 6) / p.lambda + bm.transpose() * bm).ldlt().solve(bm.transpose() * p.desired);
    worst_tik = std::max(worst_tik, (res.forces - tik).cwiseAbs().maxCoeff());
    worst_bias = std::max(worst_bias, (tik - ref).cwiseAbs().maxCoeff());
    worst_kkt = std::max(worst_kkt, kkt_residual(p, res.forces));
  }
  std::ostringstream d;
  d << "worst objective gap " << fmt("%.2e", worst_obj) << ", worst pinv gap " << fmt("%.2e", worst_pinv)
    << " (vs penalized optimum " << fmt("%.2e", worst_tik) << ", penalty bias " << fmt("%.2e", worst_bias) << ")"
    << ", worst KKT " << fmt("%.2e", worst_kkt) << ", unconverged " << unconverged;
  return {worst_obj <= 1e-6 && worst_pinv <= 1e-3 && worst_kkt <= 1e-8 && unconverged == 0, d.str()};
}

Verdict mixer_identities() {
  const VehicleParams params;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_mix = 0.0, worst_sigma = 0.0;
  for (int i = 0; i < kModelCount; ++i) {
    const FailureMode mode(i);
    for (int n = 0; n < 100; ++n) {
      const ControlCommand cmd{15.0 + 5.0 * u(rng), Vec3(0.5 * u(rng), 0.5 * u(rng), 0.1 * u(rng))};
      const ControlCommand back = apply_actuators(mix_pseudo_inverse(cmd, mode, params), mode, params);
      worst_mix = std::max(worst_mix, (back.to_vector() - cmd.to_vector()).cwiseAbs().maxCoeff());

      Vec6 omega;
      for (int j = 0; j < 6; ++j) omega(j) = 5e5 * u(rng);
      const Vec3 euler(0.4 * u(rng), 0.4 * u(rng), u(rng));
      const FailureMode truth(1 + n % 6);
      const Mat3 g = input_gain(euler, params.inertia);
      const Vec3 expected =
          g * (apply_actuators(omega, truth, params).torque - apply_actuators(omega, mode, params).torque);
      worst_sigma = std::max(worst_sigma, (model_mismatch(omega, mode, truth, euler, params) - expected).norm());
    }
  }
  std::ostringstream d;
  d << "apply(mix(u)) - u: " << fmt("%.2e", worst_mix) << ", sigma_m: " << fmt("%.2e", worst_sigma);
  return {worst_mix <= 1e-9 && worst_sigma <= 1e-9, d.str()};
}

Verdict lyapunov_solves() {
  const Mat6 a_xi = ControlGains{}.rotational_matrix();
  const Mat9 lam = observer_error_matrix(ObserverGains{}.alpha);
  const Eigen::MatrixXd p1 = solve_lyapunov(a_xi), p2 = solve_lyapunov(lam);
  auto residual = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& a) {
    return (p * a + a.transpose() * p + Eigen::MatrixXd::Identity(a.rows(), a.cols())).norm();
  };
  const double r1 = residual(p1, a_xi), r2 = residual(p2, lam);
  const Eigen::MatrixXd q1 = oracle::lyapunov_by_quadrature(a_xi), q2 = oracle::lyapunov_by_quadrature(lam);
  const double d1 = (p1 - q1).cwiseAbs().maxCoeff() / std::max(1.0, q1.cwiseAbs().maxCoeff());
  const double d2 = (p2 - q2).cwiseAbs().maxCoeff() / std::max(1.0, q2.cwiseAbs().maxCoeff());
  std::ostringstream d;
  d << "residual A_xi " << fmt("%.2e", r1) << ", Lambda " << fmt("%.2e", r2) << "; quadrature gap "
    << fmt("%.2e", d1) << ", " << fmt("%.2e", d2);
  return {r1 <= 1e-10 && r2 <= 1e-10 && d1 <= 1e-6 && d2 <= 1e-6, d.str()};
}

Verdict selection_property() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int qualifying = 0, correct = 0, tried = 0, switched = 0;
  while (qualifying < 50 && tried < 400) {
    ++tried;
    ScenarioConfig cfg = builtin_scenario("default");
    cfg.failure.rotor = 1 + static_cast<int>(u01(rng) * 6) % 6;
    cfg.failure.time = 4.0 + 10.0 * u01(rng);
    cfg.duration = cfg.failure.time + 3.0;
    cfg.seed = static_cast<unsigned>(rng() % 100000);
    cfg.disturbance.rotational_amplitude = 12.0 * (0.25 + 0.75 * u01(rng));
    const SimulationResult r = run_scenario(cfg);
    if (!r.t_switch) continue;
    ++switched;
    const auto& rec = r.records[r.index_at(*r.t_switch)];
    const int star = cfg.failure.rotor;
    std::vector<double> sigma, eta3;
    for (int i = 1; i <= kRotorCount; ++i) {
      if (i == star) continue;
      sigma.push_back(rec.sigma_m[i].norm());
      eta3.push_back(rec.eta[i].tail<3>().norm());
    }
    if (!selection_condition(sigma, rec.rot_disturbance.norm(), eta3, rec.eta[star].tail<3>().norm())) continue;
    ++qualifying;
    if (r.selected == star) ++correct;
  }
  std::ostringstream d;
  d << correct << "/" << qualifying << " correct where the condition held (" << tried << " scenarios run, "
    << switched << " switched)";
  return {qualifying >= 50 && correct == qualifying, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, default_recovery},       {2, norm_ordering},   {3, no_false_positives}, {4, controllability_table},
      {5, observer_bound},          {6, epsilon_regimes}, {7, allocation_solver},  {8, mixer_identities},
      {9, lyapunov_solves},      {10, selection_property}};
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
