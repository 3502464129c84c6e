#include "hexftc/cli.hpp"

#include "hexftc/report.hpp"
#include "hexftc/telemetry_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hexftc {

namespace {

int fail(std::ostream& err, int code, const std::string& kind, const std::string& message,
         const std::vector<std::string>& fields = {}) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  if (!fields.empty()) j["fields"] = fields;
  err << j.dump() << '\n';
  return code;
}

std::string format_time(const std::optional<double>& t) {
  if (!t) return "none";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *t);
  return buf;
}

struct EpsilonRange {
  double lo = 0.0, hi = 0.0;
  int n = 0;
};

EpsilonRange parse_range(const std::string& s) {
  EpsilonRange r;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw ConfigError("--epsilon must look like lo:hi:n", {"epsilon"});
  }
  if (!(r.lo > 0.0) || !(r.hi >= r.lo) || r.n < 1) throw ConfigError("--epsilon needs 0 < lo <= hi, n >= 1", {"epsilon"});
  return r;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hexrotor fault-tolerant control simulator", "hexsim"};
  app.require_subcommand(1);

  std::string config;
  std::string csv_path, json_path;
  std::optional<unsigned> seed;
  bool no_switching = false;
  std::string allocation_mode;

  auto* run = app.add_subcommand("run", "simulate a scenario and write telemetry");
  run->add_option("config", config, "built-in scenario name or TOML file")->required();
  run->add_option("--out", csv_path, "CSV telemetry path");
  run->add_option("--json", json_path, "JSON telemetry path");
  run->add_option("--seed", seed, "override the noise seed");
  run->add_flag("--no-switching", no_switching, "keep the nominal model for the whole run");
  run->add_option("--allocation", allocation_mode, "always | post_switch | never");

  auto* analyze = app.add_subcommand("analyze", "controllability, observer bounds and switching deadline");
  analyze->add_option("config", config, "built-in scenario name or TOML file")->required();
  analyze->add_option("--json", json_path, "also write the report as JSON");

  std::string eps_range;
  auto* sweep = app.add_subcommand("sweep", "epsilon study with and without model switching");
  sweep->add_option("config", config, "built-in scenario name or TOML file")->required();
  sweep->add_option("--epsilon", eps_range, "lo:hi:n")->required();

  auto* list = app.add_subcommand("scenarios", "list built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, 2, "usage", e.what());
  }

  try {
    if (*list) {
      for (const auto& s : builtin_scenarios()) out << s.name << "\t" << s.description << "\n";
      return 0;
    }
    ScenarioConfig cfg = load_scenario(config);
    if (*run) {
      if (seed) cfg.seed = *seed;
      if (no_switching) cfg.supervisor.enabled = false;
      if (!allocation_mode.empty()) cfg.allocation.policy = allocation_policy_from_string(allocation_mode);
      const auto t0 = std::chrono::steady_clock::now();
      const SimulationResult res = run_scenario(cfg);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!csv_path.empty()) write_csv(res.records, csv_path);
      if (!json_path.empty()) write_json(res, json_path);
      out << to_string(res.outcome) << " i_t=" << res.selected << " t_detect=" << format_time(res.t_detect)
          << " t_s=" << format_time(res.t_switch);
      if (res.t_crash) out << " t_crash=" << format_time(res.t_crash) << " (" << res.crash_reason << ")";
      char buf[64];
      std::snprintf(buf, sizeof buf, " window_err=%.4f wall=%.2fs", res.window_error, wall);
      out << buf << "\n";
      return 0;
    }
    if (*analyze) {
      const AnalysisReport rep = analyze_scenario(cfg);
      out << format_report(rep);
      if (!json_path.empty()) {
        std::ofstream f(json_path);
        if (!f) throw Error("cannot open report file for writing: " + json_path);
        f << report_json(rep) << '\n';
      }
      return 0;
    }
    if (*sweep) {
      const EpsilonRange r = parse_range(eps_range);
      const auto rows = epsilon_sweep(cfg, r.lo, r.hi, r.n);
      out << "epsilon\twith_switching\ti_t\tt_s\twithout_switching\n";
      for (const auto& row : rows) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.5g", row.epsilon);
        out << buf << "\t" << to_string(row.with_switching) << "\t" << row.selected << "\t"
            << format_time(row.t_switch) << "\t" << to_string(row.without_switching) << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail(err, 2, "config", e.what(), e.fields());
  } catch (const std::exception& e) {
    return fail(err, 1, "runtime", e.what());
  }
  return fail(err, 2, "usage", "no subcommand");
}

}  // namespace hexftc
