#include "uvoc/run_scenario.hpp"

#include <cmath>

#include "uvoc/alphabeta_oracle.hpp"

namespace uvoc {

PhaseAnalysis analyze_phase(const Scenario& s, const ParamSet& params, Phase phase, OperatingMode mode,
                            const Domain& domain, std::size_t resolution) {
  const auto sys = phase_system(s, params, phase, mode, CurrentModel::QuasiStatic);
  const auto field = planar_field(sys);
  PhaseAnalysis out;
  out.mode = mode;
  out.surface = sample_surfaces(field, domain, resolution);
  out.equilibria = find_equilibria(out.surface, field, domain);
  return out;
}

SweepConfig reduced_sweep_config(const SiParams& p) {
  SweepConfig sc;
  sc.delta_index = reduced::kDelta;
  sc.v_index = reduced::kV;
  sc.v_scale = p.v0;
  sc.integrator.rtol = 1e-9;
  sc.integrator.atol = 1e-9;
  return sc;
}

FaultCycle fault_limit_cycle(const Scenario& s, const ParamSet& params, CurrentModel cm, double t_max) {
  const auto eq = pre_fault_equilibrium(s, params);
  const auto pre = phase_system(s, params, Phase::PreFault, OperatingMode::Unconstrained, cm);
  auto sys = phase_system(s, params, Phase::Fault, default_mode(s, Phase::Fault), cm);
  const double v0 = sys.params.v0;

  solver::State y0{eq.v_pu * v0, eq.delta};
  if (cm == CurrentModel::Dynamic) {
    const auto i = pre.steady_current(y0[0], y0[1]);
    y0.push_back(i.real());
    y0.push_back(i.imag());
  }

  CycleConfig cc;
  cc.t_max = t_max;
  cc.integrator.rtol = 1e-10;
  cc.integrator.atol = 1e-8;
  cc.section = winding_section(eq.delta);
  cc.return_index = reduced::kV;
  cc.return_scale = v0;
  cc.collapse = [v0](double, std::span<const double> y) { return y[reduced::kV] - 0.01 * v0; };
  cc.at_rest = [sys](std::span<const double> y) {
    std::vector<double> dy(y.size());
    try {
      sys.rhs(y, dy);
    } catch (const DegenerateVoltage&) {
      return false;
    }
    return std::abs(dy[reduced::kDelta]) < 1e-6 && std::abs(dy[reduced::kV]) < 1e-6 * sys.params.v0;
  };
  const solver::Rhs rhs = [sys](double, std::span<const double> y, std::span<double> dy) { sys.rhs(y, dy); };
  return {detect_limit_cycle(rhs, y0, cc), sys, eq};
}

SweepReport fault_clearing_sweep(const Scenario& s, const ParamSet& params, const FaultCycle& fc, std::size_t m,
                                 double horizon) {
  const auto post = phase_system(s, params, Phase::PostFault, OperatingMode::Unconstrained, fc.system.current_model);
  const solver::Rhs rhs = [post](double, std::span<const double> y, std::span<double> dy) { post.rhs(y, dy); };
  auto sc = reduced_sweep_config(post.params);
  sc.horizon = horizon;
  return clearing_sweep(fc.cycle, rhs, fc.pre_fault.delta, fc.pre_fault.v_pu, m, sc);
}

namespace {

io::Json steady_json(const SteadyState& ss) {
  return io::Json{{"v_pu", ss.v_pu}, {"delta", ss.delta}, {"i_pu", ss.i_pu}, {"vpoc_pu", ss.vpoc_pu}};
}

}  // namespace

RunReport run_scenario(const Scenario& s, const ParamSet& params, const std::filesystem::path& out_dir,
                       const RunOptions& opt) {
  RunReport rep;
  auto emit = [&](const std::string& name, const std::string& content) {
    const auto path = out_dir / name;
    io::write_text(path, content);
    rep.files.push_back(path);
  };
  io::Json& sum = rep.summary;
  sum["scenario"] = s.name;

  const auto sim = simulate_reduced(s, params);
  emit("trajectory.csv", io::trajectory_csv(sim));
  emit("trajectory.gp", io::trajectory_plot_script("trajectory.csv"));
  sum["status"] = to_string(sim.status);
  if (!sim.diagnostic.empty()) sum["diagnostic"] = sim.diagnostic;
  if (sim.status != RunStatus::Completed) rep.ok = false;
  sum["events"] = io::events_json(sim);
  if (!sim.rows.empty()) sum["fault_steady_state"] = steady_json(fault_steady_state(sim, s));

  if (opt.oracle) {
    const auto orc = simulate_oracle(s, params);
    emit("oracle.csv", io::trajectory_csv(orc));
    sum["oracle_status"] = to_string(orc.status);
    if (!orc.rows.empty()) sum["oracle_fault_steady_state"] = steady_json(fault_steady_state(orc, s));
    if (orc.status != RunStatus::Completed) rep.ok = false;
  }

  io::Json eq_counts;
  bool fault_has_equilibrium = true;
  for (const auto& [phase, tag] : {std::pair{Phase::PreFault, "pre"}, std::pair{Phase::Fault, "fault"}}) {
    const auto pa = analyze_phase(s, params, phase, default_mode(s, phase), opt.domain, opt.resolution);
    const std::string t = tag;
    emit("surface_" + t + ".csv", io::surface_csv(pa.surface));
    emit("surface_" + t + ".gp", io::surface_plot_script("surface_" + t + ".csv", s.name + " " + t));
    emit("equilibria_" + t + ".json", io::dump_json(io::equilibria_json(pa.equilibria)));
    eq_counts[t] = pa.equilibria.equilibria.size();
    if (phase == Phase::Fault) fault_has_equilibrium = !pa.equilibria.equilibria.empty();
  }
  sum["equilibria"] = eq_counts;

  if (!fault_has_equilibrium) {
    io::Json periods;
    for (const auto& [cm, tag] : {std::pair{CurrentModel::Dynamic, "dynamic"},
                                  std::pair{CurrentModel::QuasiStatic, "quasi_static"}}) {
      const auto fc = fault_limit_cycle(s, params, cm);
      periods[tag] = io::cycle_json(fc.cycle);
      if (cm == CurrentModel::Dynamic) {
        emit("orbit.csv", io::orbit_csv(fc.cycle, reduced::kDelta, reduced::kV, fc.system.params.v0));
        emit("cycle.json", io::dump_json(io::Json{{"period_s", fc.cycle.period},
                                                  {"convergence_ratio", fc.cycle.convergence_ratio}}));
        emit("orbit.gp", io::orbit_plot_script("orbit.csv"));
      }
    }
    sum["limit_cycle"] = periods;
  }
  emit("summary.json", io::dump_json(sum));
  return rep;
}

}  // namespace uvoc
