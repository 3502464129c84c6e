#include "hexftc/allocation.hpp"
#include "hexftc/analysis.hpp"
#include "hexftc/failure_supervisor.hpp"
#include "hexftc/flight_control.hpp"
#include "hexftc/report.hpp"
#include "hexftc/simulation.hpp"
#include "hexftc/telemetry_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hexftc;

namespace {

py::object from_json(const std::string& s) { return py::module_::import("json").attr("loads")(s); }

ScenarioConfig resolve(const std::string& config, bool is_toml) {
  return is_toml ? parse_scenario_toml(config) : load_scenario(config);
}

py::dict run(const std::string& config, bool toml, std::optional<unsigned> seed, bool no_switching,
             std::optional<std::string> allocation) {
  ScenarioConfig cfg = resolve(config, toml);
  if (seed) cfg.seed = *seed;
  if (no_switching) cfg.supervisor.enabled = false;
  if (allocation) cfg.allocation.policy = allocation_policy_from_string(*allocation);
  SimulationResult res;
  {
    py::gil_scoped_release release;
    res = run_scenario(cfg);
  }
  py::dict out = from_json(summary_json(res));
  const auto cols = csv_columns();
  std::vector<std::vector<double>> data(cols.size());
  for (const auto& rec : res.records) {
    const auto row = csv_row(rec);
    for (std::size_t k = 0; k < row.size(); ++k) data[k].push_back(row[k]);
  }
  py::dict tel;
  for (std::size_t k = 0; k < cols.size(); ++k) tel[py::str(cols[k])] = data[k];
  out["telemetry"] = tel;
  return out;
}

py::object analyze(const std::string& config, bool toml) {
  const ScenarioConfig cfg = resolve(config, toml);
  AnalysisReport rep;
  {
    py::gil_scoped_release release;
    rep = analyze_scenario(cfg);
  }
  return from_json(report_json(rep));
}

py::list sweep(const std::string& config, double lo, double hi, int n, bool toml) {
  const ScenarioConfig cfg = resolve(config, toml);
  std::vector<SweepRow> rows;
  {
    py::gil_scoped_release release;
    rows = epsilon_sweep(cfg, lo, hi, n);
  }
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["epsilon"] = r.epsilon;
    d["with_switching"] = to_string(r.with_switching);
    d["selected"] = r.selected;
    d["t_switch"] = r.t_switch;
    d["without_switching"] = to_string(r.without_switching);
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hexrotor fault-tolerant control simulator";

  // pybind11 tries translators newest first, so the subclass goes last
  py::register_exception<Error>(m, "HexftcError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("scenarios", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : builtin_scenarios()) out.emplace_back(s.name, s.description);
    return out;
  });
  m.def("run", &run, py::arg("config") = "default", py::kw_only(), py::arg("toml") = false,
        py::arg("seed") = py::none(), py::arg("no_switching") = false, py::arg("allocation") = py::none(),
        "Simulate a built-in scenario, a TOML path, or (toml=True) a TOML document. Returns the outcome "
        "summary with a 'telemetry' dict of columns.");
  m.def("analyze", &analyze, py::arg("config") = "default", py::kw_only(), py::arg("toml") = false);
  m.def("sweep", &sweep, py::arg("config"), py::arg("lo"), py::arg("hi"), py::arg("n"), py::kw_only(),
        py::arg("toml") = false);

  m.def(
      "allocate",
      [](const Mat46& b, const Vec4& u, const Vec6& lower, const Vec6& upper, const Vec4& weights, double lam) {
        AllocationProblem p;
        p.effectiveness = b;
        p.desired = u;
        p.lower = lower;
        p.upper = upper;
        p.weights = weights;
        p.lambda = lam;
        p.validate();
        const AllocationResult r = allocate(p);
        return py::make_tuple(r.forces, r.iterations, r.converged, kkt_residual(p, r.forces));
      },
      py::arg("effectiveness"), py::arg("desired"), py::arg("lower"), py::arg("upper"),
      py::arg("weights") = Vec4(10, 10, 10, 1), py::arg("lam") = 1e4,
      "Box-constrained allocation. Returns (forces, iterations, converged, kkt_residual).");
  m.def(
      "mix", [](double thrust, const Vec3& torque, int mode) {
        return mix_pseudo_inverse({thrust, torque}, FailureMode(mode), VehicleParams{});
      },
      py::arg("thrust"), py::arg("torque"), py::arg("mode") = 0);
  m.def(
      "mixer_matrix", [] { return mixer_matrix(VehicleParams{}); });
  m.def(
      "controllability_rank",
      [](int mode, bool paired) {
        const VehicleParams p;
        return paired ? controllability_paired_disable(FailureMode(mode), p).rank
                      : controllability_single_failure(FailureMode(mode), p).rank;
      },
      py::arg("mode"), py::arg("paired") = false);
  m.def("solve_lyapunov", &solve_lyapunov, py::arg("a"));
  m.def(
      "select_model", [](const std::array<double, kRotorCount>& norms) { return select_model(norms).index(); },
      py::arg("norms"));
}
