#include "hexftc/telemetry_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace hexftc {

std::vector<std::string> csv_columns() {
  std::vector<std::string> c = {"t", "x", "y", "z", "vx", "vy", "vz", "phi", "theta", "psi",
                                "phi_dot", "theta_dot", "psi_dot", "x_ref", "y_ref", "z_ref",
                                "phi_ref", "theta_ref", "pos_err"};
  for (int i = 0; i < kModelCount; ++i) c.push_back("dist_norm_" + std::to_string(i));
  for (const char* s : {"v_dot", "xi_norm_sq", "detect", "phase", "selected", "true_mode"}) c.emplace_back(s);
  for (int j = 1; j <= kRotorCount; ++j) c.push_back("omega_s_" + std::to_string(j));
  for (const char* s : {"u_f", "tau_x", "tau_y", "tau_z", "guarded", "alloc_iters", "eta_norm_true"}) {
    c.emplace_back(s);
  }
  return c;
}

std::vector<double> csv_row(const TelemetryRecord& r) {
  std::vector<double> v;
  v.reserve(48);
  v.push_back(r.t);
  const Vec12 x = r.state.to_vector();
  v.insert(v.end(), x.data(), x.data() + 12);
  v.insert(v.end(), r.position_ref.data(), r.position_ref.data() + 3);
  v.push_back(r.attitude_ref.x());
  v.push_back(r.attitude_ref.y());
  v.push_back(r.position_error());
  v.insert(v.end(), r.disturbance_norms.begin(), r.disturbance_norms.end());
  v.push_back(r.v_dot);
  v.push_back(r.xi_norm_sq);
  v.push_back(r.detect ? 1.0 : 0.0);
  v.push_back(static_cast<double>(r.phase));
  v.push_back(r.selected);
  v.push_back(r.true_mode);
  v.insert(v.end(), r.omega.data(), r.omega.data() + kRotorCount);
  v.push_back(r.command.thrust);
  v.insert(v.end(), r.command.torque.data(), r.command.torque.data() + 3);
  v.push_back(r.guarded ? 1.0 : 0.0);
  v.push_back(r.allocation_iterations);
  v.push_back(r.eta[r.true_mode].norm());
  return v;
}

void write_csv(const std::vector<TelemetryRecord>& records, std::ostream& out) {
  const auto cols = csv_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  char buf[32];
  for (const auto& r : records) {
    const auto row = csv_row(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.9g", row[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

void write_csv(const std::vector<TelemetryRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open telemetry file for writing: " + path);
  write_csv(records, out);
  if (!out) throw Error("failed writing telemetry file: " + path);
}

namespace {

nlohmann::json optional_time(const std::optional<double>& t) {
  return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
}

nlohmann::json summary(const SimulationResult& r) {
  nlohmann::json j;
  j["scenario"] = r.config.name;
  j["outcome"] = to_string(r.outcome);
  j["selected"] = r.selected;
  j["t_detect"] = optional_time(r.t_detect);
  j["t_switch"] = optional_time(r.t_switch);
  j["t_crash"] = optional_time(r.t_crash);
  j["crash_reason"] = r.crash_reason;
  j["a0"] = r.a0;
  j["dwell"] = r.dwell;
  j["failure_rotor"] = r.config.failure.rotor;
  j["failure_time"] = r.config.failure.time;
  j["epsilon"] = r.config.observer.gains.epsilon;
  j["window_start"] = r.window_start;
  j["window_error"] = r.window_error;
  j["ticks"] = r.records.size();
  return j;
}

}  // namespace

std::string summary_json(const SimulationResult& result) { return summary(result).dump(); }

void write_json(const SimulationResult& result, const std::string& path) {
  nlohmann::json j = summary(result);
  const auto cols = csv_columns();
  nlohmann::json series = nlohmann::json::object();
  std::vector<std::vector<double>> data(cols.size());
  for (const auto& r : result.records) {
    const auto row = csv_row(r);
    for (std::size_t k = 0; k < row.size(); ++k) data[k].push_back(row[k]);
  }
  for (std::size_t k = 0; k < cols.size(); ++k) series[cols[k]] = data[k];
  j["telemetry"] = series;
  std::ofstream out(path);
  if (!out) throw Error("cannot open telemetry file for writing: " + path);
  out << j.dump() << '\n';
  if (!out) throw Error("failed writing telemetry file: " + path);
}

}  // namespace hexftc
