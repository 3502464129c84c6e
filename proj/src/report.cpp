#include "hexftc/report.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hexftc {

AnalysisReport analyze_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  AnalysisReport rep;
  const VehicleParams& params = cfg.vehicle;
  for (int i = 0; i < kModelCount; ++i) rep.single[i] = controllability_single_failure(FailureMode(i), params);
  for (int i = 1; i <= kRotorCount; ++i) rep.paired[i - 1] = controllability_paired_disable(FailureMode(i), params);

  const Vec3& alpha = cfg.observer.gains.alpha;
  rep.alpha_hurwitz = is_hurwitz_cubic(alpha);
  const Mat6 a_xi = cfg.control.gains.rotational_matrix();
  rep.p_xi = solve_lyapunov(a_xi);
  rep.lyapunov_residual_xi = (rep.p_xi * a_xi + a_xi.transpose() * rep.p_xi + Mat6::Identity()).norm();
  rep.c_xi = domain_level(rep.p_xi, cfg.control.guard.min_cos_tilt);
  const double eps = cfg.observer.gains.epsilon;
  if (rep.alpha_hurwitz) {
    const Mat9 lam = observer_error_matrix(alpha);
    const Mat9 p_eta = solve_lyapunov(lam);
    rep.lyapunov_residual_eta = (p_eta * lam + lam.transpose() * p_eta + Mat9::Identity()).norm();
  }

  rep.has_failure = cfg.failure.rotor != 0;
  if (!rep.has_failure) return rep;
  rep.run = run_scenario(cfg);
  const auto& recs = rep.run.records;
  const double t_f = cfg.failure.time;
  const int star = cfg.failure.rotor;

  // Domain visited once the take-off transient is over, padded by 20 %.
  double tilt = 0.0, rate = 0.0;
  for (const auto& r : recs) {
    if (r.t < cfg.supervisor.start_time) continue;
    tilt = std::max({tilt, std::abs(r.state.euler.x()), std::abs(r.state.euler.y())});
    rate = std::max(rate, r.state.euler_rates.cwiseAbs().maxCoeff());
  }
  rep.lipschitz = estimate_drift_lipschitz(params.inertia, std::min(1.2 * tilt, 1.5), 1.2 * rate, 20000, cfg.seed);

  std::vector<double> ts;
  std::array<std::vector<Vec3>, kModelCount> lumped;
  for (const auto& r : recs) {
    if (r.t <= t_f + 1e-9) continue;
    ts.push_back(r.t);
    for (int i = 0; i < kModelCount; ++i) lumped[i].push_back(r.rot_disturbance + r.sigma_m[i]);
  }
  for (int i = 0; i < kModelCount; ++i) rep.disturbance_rate[i] = estimate_rate_bound(ts, lumped[i]);

  rep.bound = make_bound_params(alpha, eps, rep.lipschitz, rep.disturbance_rate[star]);
  const std::size_t k0 = rep.run.index_at(t_f + 0.5 * cfg.dt());
  if (k0 < recs.size()) {
    rep.bound_start = recs[k0].t;
    const Vec9& eta0 = recs[k0].eta[star];
    rep.v_eta_start = eta0.dot(rep.bound.p_eta * eta0);
    if (rep.bound.c > 0.0) {
      rep.bound_holds = true;
      for (std::size_t k = k0; k < recs.size() && recs[k].t <= t_f + 1.0 + 1e-9; ++k) {
        const double b = observer_error_bound(rep.v_eta_start, rep.bound, recs[k].t - rep.bound_start);
        const double ratio = recs[k].eta[star].norm() / b;
        rep.bound_max_ratio = std::max(rep.bound_max_ratio, ratio);
        if (ratio > 1.0) rep.bound_holds = false;
      }
    }
  }

  const std::size_t kf = rep.run.index_at(t_f);
  if (kf < recs.size()) {
    const auto& r = recs[kf];
    Vec6 xi;
    xi << r.state.euler - r.attitude_ref, r.state.euler_rates - r.attitude_ref_rate;
    rep.a = 1.1 * xi.dot(rep.p_xi * xi);
  }
  rep.level_ok = std::sqrt(rep.a) < rep.c_xi;
  rep.t_s_max = std::numeric_limits<double>::quiet_NaN();
  if (kf >= recs.size()) {
    rep.t_s_max_error = "run ended before the failure";
  } else if (!rep.level_ok) {
    rep.t_s_max_error = "sqrt(a) >= c_xi";
  } else if (!(rep.bound.c > 0.0)) {
    rep.t_s_max_error = "c <= 0";
  } else {
    // Until the switch the controller runs on the model that was selected when the rotor failed,
    // so the perturbation comes from that observer's error, which enters V_xi scaled by epsilon.
    const auto& rf = recs[kf];
    const int used = rf.selected;
    const BoundParams bp = make_bound_params(alpha, eps, rep.lipschitz, rep.disturbance_rate[used]);
    const ControlGains gains = cfg.control.gains;
    const double lip = rep.lipschitz, v0 = rf.eta[used].dot(bp.p_eta * rf.eta[used]), t0 = rf.t;
    auto delta = [&](double s) {
      return eps * delta_max_bound(observer_error_bound(v0, bp, std::max(0.0, s - t0)), gains, lip, eps);
    };
    try {
      rep.t_s_max = max_switching_time(rep.p_xi, rep.a, rep.c_xi, t_f, delta);
    } catch (const Error& e) {
      rep.t_s_max_error = e.what();
    }
  }
  return rep;
}

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

}  // namespace

std::string format_report(const AnalysisReport& rep) {
  std::ostringstream o;
  o << "controllability (single failure):";
  for (int i = 0; i < kModelCount; ++i) o << " " << i << ":" << rep.single[i].rank;
  o << "\ncontrollability (paired disable):";
  for (int i = 0; i < kRotorCount; ++i) o << " " << i + 1 << ":" << rep.paired[i].rank;
  o << "\nobserver polynomial Hurwitz: " << (rep.alpha_hurwitz ? "yes" : "no")
    << "\nLyapunov residual A_xi: " << fmt(rep.lyapunov_residual_xi)
    << "  Lambda: " << fmt(rep.lyapunov_residual_eta) << "\nc_xi: " << fmt(rep.c_xi) << "\n";
  if (!rep.has_failure) {
    o << "no failure configured; bound checks skipped\n";
    return o.str();
  }
  const auto& r = rep.run;
  o << "run: " << to_string(r.outcome) << " i_t=" << r.selected
    << " t_switch=" << (r.t_switch ? fmt(*r.t_switch) : "none") << "\n"
    << "L_eta: " << fmt(rep.lipschitz) << "\nDelta_max:";
  for (int i = 0; i < kModelCount; ++i) o << " " << fmt(rep.disturbance_rate[i]);
  o << "\nbound constants: c=" << fmt(rep.bound.c) << " kappa=" << fmt(rep.bound.kappa)
    << " lambda(P_eta)=[" << fmt(rep.bound.lambda_min) << ", " << fmt(rep.bound.lambda_max) << "]\n"
    << "observer bound from t=" << fmt(rep.bound_start) << ": max |eta|/bound = " << fmt(rep.bound_max_ratio)
    << (rep.bound_holds ? " (holds)" : " (violated)") << "\n"
    << "a=" << fmt(rep.a) << " sqrt(a)<c_xi: " << (rep.level_ok ? "yes" : "no") << "\n"
    << "t_s_max: " << (rep.t_s_max_error.empty() ? fmt(rep.t_s_max) : "n/a (" + rep.t_s_max_error + ")") << "\n";
  return o.str();
}

std::string report_json(const AnalysisReport& rep) {
  nlohmann::json j;
  for (int i = 0; i < kModelCount; ++i) j["single_failure_rank"].push_back(rep.single[i].rank);
  for (int i = 0; i < kRotorCount; ++i) j["paired_disable_rank"].push_back(rep.paired[i].rank);
  j["alpha_hurwitz"] = rep.alpha_hurwitz;
  j["lyapunov_residual_xi"] = rep.lyapunov_residual_xi;
  j["lyapunov_residual_eta"] = rep.lyapunov_residual_eta;
  j["c_xi"] = rep.c_xi;
  if (rep.has_failure) {
    j["outcome"] = to_string(rep.run.outcome);
    j["selected"] = rep.run.selected;
    j["t_switch"] = rep.run.t_switch ? nlohmann::json(*rep.run.t_switch) : nlohmann::json(nullptr);
    j["lipschitz"] = rep.lipschitz;
    j["disturbance_rate"] = rep.disturbance_rate;
    j["c"] = rep.bound.c;
    j["kappa"] = rep.bound.kappa;
    j["bound_max_ratio"] = rep.bound_max_ratio;
    j["bound_holds"] = rep.bound_holds;
    j["a"] = rep.a;
    j["level_ok"] = rep.level_ok;
    if (rep.t_s_max_error.empty()) {
      j["t_s_max"] = std::isinf(rep.t_s_max) ? nlohmann::json("inf") : nlohmann::json(rep.t_s_max);
    } else {
      j["t_s_max"] = nullptr;
      j["t_s_max_error"] = rep.t_s_max_error;
    }
  }
  return j.dump();
}

std::vector<SweepRow> epsilon_sweep(const ScenarioConfig& cfg, double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw DomainError("sweep needs 0 < lo <= hi and n >= 1");
  std::vector<SweepRow> rows;
  for (int k = 0; k < n; ++k) {
    SweepRow row;
    row.epsilon = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
    ScenarioConfig c = cfg;
    c.observer.gains.epsilon = row.epsilon;
    c.supervisor.enabled = true;
    const SimulationResult on = run_scenario(c);
    row.with_switching = on.outcome;
    row.selected = on.selected;
    row.t_switch = on.t_switch;
    c.supervisor.enabled = false;
    row.without_switching = run_scenario(c).outcome;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hexftc
