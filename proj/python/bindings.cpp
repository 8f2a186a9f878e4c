#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include "uvoc/alphabeta_oracle.hpp"
#include "uvoc/droop_model.hpp"
#include "uvoc/run_scenario.hpp"

namespace py = pybind11;
using namespace uvoc;

namespace {

struct Loaded {
  ParamSet params;
  Scenario scenario;
};

Loaded load(const std::string& case_name, const std::string& config) {
  Loaded l{load_params(config), {}};
  std::string base = case_name;
  for (const auto& [k, v] : l.params.scenario.entries)
    if (k == "base") base = v;
  l.scenario = apply_overrides(builtin_scenario(base), l.params.scenario);
  return l;
}

py::dict trajectory(const SimulationResult& r) {
  std::vector<double> t, v, delta, i, vpoc, x_r, p, q;
  std::vector<int> x_f;
  for (const auto& row : r.rows) {
    t.push_back(row.t);
    v.push_back(row.v_pu);
    delta.push_back(row.delta);
    i.push_back(row.i_pu);
    vpoc.push_back(row.vpoc_pu);
    x_f.push_back(row.x_f);
    x_r.push_back(row.x_r);
    p.push_back(row.p_pu);
    q.push_back(row.q_pu);
  }
  py::list events;
  for (const auto& e : r.events) events.append(py::make_tuple(e.t, e.name));
  py::dict d;
  d["t"] = t;
  d["v_pu"] = v;
  d["delta"] = delta;
  d["i_pu"] = i;
  d["vpoc_pu"] = vpoc;
  d["x_f"] = x_f;
  d["x_r"] = x_r;
  d["p_pu"] = p;
  d["q_pu"] = q;
  d["events"] = events;
  d["status"] = to_string(r.status);
  d["diagnostic"] = r.diagnostic;
  return d;
}

py::dict cycle_dict(const CycleResult& c) {
  py::dict d;
  d["status"] = to_string(c.status);
  d["period_s"] = c.period;
  d["convergence_ratio"] = c.convergence_ratio;
  d["periods_s"] = c.periods;
  d["diagnostic"] = c.diagnostic;
  return d;
}

py::dict sweep_dict(const SweepReport& r) {
  py::list points;
  for (const auto& p : r.points) {
    py::dict pt;
    pt["tau_s"] = p.tau;
    pt["final_distance"] = p.final_distance;
    pt["converged"] = p.converged;
    points.append(pt);
  }
  py::dict d;
  d["converged"] = r.converged;
  d["points_total"] = r.points.size();
  d["target_delta"] = r.target_delta;
  d["target_v_pu"] = r.target_v_pu;
  d["points"] = points;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "uVOC transient-stability toolkit";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  m.def("builtin_cases", &builtin_scenario_names);

  m.def("describe_params", [](const std::string& config) { return describe(load_params(config)); },
        py::arg("config") = "");

  m.def("feasibility_bound", &feasibility_bound, py::arg("v_th"), py::arg("z_th"), py::arg("i_lim"));

  m.def(
      "thevenin_split",
      [](double z, double xr) {
        const auto s = thevenin_split({1.0, 1.0, z, xr});
        return py::make_tuple(s.r_th, s.x_th);
      },
      py::arg("z_th_mag"), py::arg("x_over_r"));

  m.def(
      "simulate",
      [](const std::string& case_name, bool oracle, const std::string& config) {
        const auto l = load(case_name, config);
        py::gil_scoped_release nogil;
        auto r = oracle ? simulate_oracle(l.scenario, l.params) : simulate_reduced(l.scenario, l.params);
        py::gil_scoped_acquire gil;
        return trajectory(r);
      },
      py::arg("case") = "case1", py::arg("oracle") = false, py::arg("config") = "");

  m.def(
      "equilibria",
      [](const std::string& case_name, const std::string& phase, std::size_t resolution, const std::string& config) {
        const auto l = load(case_name, config);
        const auto ph = parse_phase(phase);
        PhaseAnalysis pa;
        {
          py::gil_scoped_release nogil;
          pa = analyze_phase(l.scenario, l.params, ph, default_mode(l.scenario, ph), Domain{}, resolution);
        }
        py::list out;
        for (const auto& eq : pa.equilibria.equilibria) {
          py::dict d;
          d["delta"] = eq.delta;
          d["v_pu"] = eq.v_pu;
          d["kind"] = to_string(eq.kind);
          d["saddle"] = eq.saddle;
          d["eigs"] = std::vector<std::complex<double>>{eq.eigs[0], eq.eigs[1]};
          out.append(d);
        }
        return out;
      },
      py::arg("case") = "case1", py::arg("phase") = "pre", py::arg("resolution") = 256, py::arg("config") = "");

  m.def(
      "limit_cycle",
      [](const std::string& case_name, const std::string& current_model, const std::string& config) {
        const auto l = load(case_name, config);
        const auto cm = current_model == "quasi-static" ? CurrentModel::QuasiStatic : CurrentModel::Dynamic;
        py::gil_scoped_release nogil;
        auto fc = fault_limit_cycle(l.scenario, l.params, cm);
        py::gil_scoped_acquire gil;
        return cycle_dict(fc.cycle);
      },
      py::arg("case") = "case3", py::arg("current_model") = "dynamic", py::arg("config") = "");

  m.def(
      "clearing_sweep",
      [](const std::string& case_name, std::size_t points, const std::string& config) {
        const auto l = load(case_name, config);
        py::gil_scoped_release nogil;
        const auto fc = fault_limit_cycle(l.scenario, l.params, CurrentModel::Dynamic);
        auto rep = fault_clearing_sweep(l.scenario, l.params, fc, points);
        py::gil_scoped_acquire gil;
        return sweep_dict(rep);
      },
      py::arg("case") = "case3", py::arg("points") = 12, py::arg("config") = "");

  m.def(
      "droop_sweep",
      [](std::size_t points) {
        py::gil_scoped_release nogil;
        auto demo = droop::run_cca_demo(droop::SwingParams{}, points);
        py::gil_scoped_acquire gil;
        return sweep_dict(demo.sweep);
      },
      py::arg("points") = 12);
}
