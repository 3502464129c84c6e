#pragma once

#include "hexftc/analysis.hpp"
#include "hexftc/simulation.hpp"

#include <array>
#include <string>
#include <vector>

namespace hexftc {

/// Theory quantities evaluated for one scenario, partly from a simulated failure run.
struct AnalysisReport {
  std::array<ControllabilityResult, kModelCount> single{};
  std::array<ControllabilityResult, kRotorCount> paired{};

  bool alpha_hurwitz = false;
  double lyapunov_residual_xi = 0.0;
  double lyapunov_residual_eta = 0.0;
  Mat6 p_xi = Mat6::Zero();
  double c_xi = 0.0;

  // Everything below needs a failure in the scenario.
  bool has_failure = false;
  SimulationResult run;
  double lipschitz = 0.0;
  std::array<double, kModelCount> disturbance_rate{};  // Delta_max per model after the failure
  BoundParams bound;                                   // for the true model
  double bound_start = 0.0;                            // first sample after t_f
  double v_eta_start = 0.0;
  double bound_max_ratio = 0.0;  // max |eta(t)| / bound(t) over [bound_start, t_f + 1]
  bool bound_holds = false;
  double a = 0.0;                // 1.1 V_xi(t_f)
  bool level_ok = false;         // sqrt(a) < c_xi
  double t_s_max = 0.0;
  std::string t_s_max_error;
};

AnalysisReport analyze_scenario(const ScenarioConfig& cfg);

std::string format_report(const AnalysisReport& report);
std::string report_json(const AnalysisReport& report);

struct SweepRow {
  double epsilon = 0.0;
  Outcome with_switching = Outcome::Nominal;
  int selected = 0;
  std::optional<double> t_switch;
  Outcome without_switching = Outcome::Nominal;
};

/// n values of epsilon spaced evenly in [lo, hi]; each value is run with and without switching.
std::vector<SweepRow> epsilon_sweep(const ScenarioConfig& cfg, double lo, double hi, int n);

}  // namespace hexftc
