#include "uvoc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uvoc {

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Collapse: return "collapse";
    case RunStatus::IntegrationFailure: return "integration-failure";
  }
  return "?";
}

const SampleRow& SimulationResult::sample_before(double t) const {
  if (rows.empty()) throw std::out_of_range("empty simulation result");
  auto it = std::lower_bound(rows.begin(), rows.end(), t, [](const SampleRow& r, double tv) { return r.t < tv; });
  if (it == rows.end()) return rows.back();
  if (it->t > t) return it == rows.begin() ? *it : *std::prev(it);
  return *it;  // first row at exactly t is the pre-switch sample
}

void Scenario::validate() const {
  if (clear_time && !(fault_time < *clear_time)) throw std::invalid_argument("scenario: fault_time must precede clear_time");
  if (!(t_end > 0.0)) throw std::invalid_argument("scenario: t_end must be positive");
  if (!(fault_time >= 0.0)) throw std::invalid_argument("scenario: fault_time must be non-negative");
}

Setpoints Scenario::setpoints(const PerUnitBase& base) const {
  return {p0_pu * base.s_base, q0_pu * base.s_base};
}

std::vector<std::string> builtin_scenario_names() {
  return {"case1", "case2-unprotected", "case2-protected", "case3"};
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.pre_fault = GridThevenin{};
  if (name == "case1") {
    s.pre_fault.z_th_mag = 0.52;
    s.fault = s.pre_fault;
    s.fault.v_th = 0.6;
    s.p0_pu = 0.38;
    s.fault_time = 0.2;
    s.clear_time = 1.2;
    s.t_end = 2.0;
    s.fsm_enabled = false;
    s.q0_boost = false;
  } else if (name == "case2-unprotected" || name == "case2-protected") {
    s.pre_fault.z_th_mag = 0.1;
    s.fault = s.pre_fault;
    s.fault.v_th = 0.5;
    s.p0_pu = 0.27;
    s.fault_time = 0.2;
    s.clear_time = 1.2;
    s.t_end = 2.0;
    const bool prot = name == "case2-protected";
    s.limiter_enabled = prot;
    s.fsm_enabled = prot;
    s.q0_boost = prot;
  } else if (name == "case3") {
    s.pre_fault.z_th_mag = 0.52;
    s.fault = s.pre_fault;
    s.fault.v_th = 0.5;
    s.p0_pu = 0.8;
    s.fault_time = 0.2;
    s.clear_time = 2.2;
    s.t_end = 3.0;
    s.q0_boost = true;
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return s;
}

namespace {

double to_number(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw std::invalid_argument("scenario key '" + key + "' expects a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("scenario key '" + key + "' expects a boolean");
}

}  // namespace

Scenario apply_overrides(Scenario s, const ScenarioSection& section) {
  for (const auto& [key, value] : section.entries) {
    if (key == "name") s.name = value;
    else if (key == "base") continue;
    else if (key == "fault_time") s.fault_time = to_number(key, value);
    else if (key == "clear_time") s.clear_time = value == "none" ? std::nullopt : std::optional(to_number(key, value));
    else if (key == "t_end") s.t_end = to_number(key, value);
    else if (key == "p0_pu") s.p0_pu = to_number(key, value);
    else if (key == "q0_pu") s.q0_pu = to_number(key, value);
    else if (key == "v_th_pre_pu") s.pre_fault.v_th = to_number(key, value);
    else if (key == "v_th_fault_pu") s.fault.v_th = to_number(key, value);
    else if (key == "z_th_mag_pu") s.pre_fault.z_th_mag = s.fault.z_th_mag = to_number(key, value);
    else if (key == "x_over_r") s.pre_fault.x_over_r = s.fault.x_over_r = to_number(key, value);
    else if (key == "limiter") s.limiter_enabled = to_bool(key, value);
    else if (key == "fsm") s.fsm_enabled = to_bool(key, value);
    else if (key == "q0_boost") s.q0_boost = to_bool(key, value);
    else if (key == "current_model") {
      if (value == "dynamic") s.model.current_model = CurrentModel::Dynamic;
      else if (value == "quasi-static") s.model.current_model = CurrentModel::QuasiStatic;
      else throw std::invalid_argument("current_model must be dynamic or quasi-static");
    } else {
      throw std::invalid_argument("unknown scenario key '" + key + "'");
    }
  }
  s.validate();
  return s;
}

SiParams scenario_params(const Scenario& s, const ParamSet& params) {
  auto p = resolve(params.converter, params.control);
  p.q0_boost = s.q0_boost;
  return p;
}

Phase parse_phase(const std::string& text) {
  if (text == "pre") return Phase::PreFault;
  if (text == "fault") return Phase::Fault;
  if (text == "post") return Phase::PostFault;
  throw std::invalid_argument("phase must be pre, fault or post");
}

GridSi phase_grid(const Scenario& s, Phase phase, const PerUnitBase& base) {
  return resolve(phase == Phase::Fault ? s.fault : s.pre_fault, base);
}

OperatingMode default_mode(const Scenario& s, Phase phase) {
  if (phase == Phase::Fault && s.limiter_enabled && s.fsm_enabled) return OperatingMode::Constrained;
  return OperatingMode::Unconstrained;
}

ReducedSystem phase_system(const Scenario& s, const ParamSet& params, Phase phase, OperatingMode mode,
                           CurrentModel cm) {
  const auto p = scenario_params(s, params);
  const auto g = phase_grid(s, phase, p.base);
  const auto sp = s.setpoints(p.base);
  return mode == OperatingMode::Constrained ? make_constrained(p, g, sp, cm) : make_unconstrained(p, g, sp, cm);
}

Equilibrium pre_fault_equilibrium(const Scenario& s, const ParamSet& params) {
  const auto sys = phase_system(s, params, Phase::PreFault, OperatingMode::Unconstrained, CurrentModel::QuasiStatic);
  const auto field = planar_field(sys);
  const Domain dom;
  const auto surf = sample_surfaces(field, dom, 128);
  const auto found = find_equilibria(surf, field, dom);
  const Equilibrium* best = nullptr;
  for (const auto& e : found.equilibria) {
    if (e.kind != EquilibriumKind::Stable) continue;
    if (!best || e.v_pu > best->v_pu) best = &e;
  }
  if (!best) throw std::runtime_error("scenario '" + s.name + "' has no stable pre-fault equilibrium");
  return *best;
}

namespace {

struct Mode {
  Phase phase = Phase::PreFault;
  FaultFsmState fsm;
};

double ramp_signal(const Mode& m, double t, double t_ramp) { return ramp_at(m.fsm, t, t_ramp); }

}  // namespace

SimulationResult simulate_reduced(const Scenario& s, const ParamSet& params, const SimulationOptions& opt) {
  s.validate();
  const auto p = scenario_params(s, params);
  const auto sp = s.setpoints(p.base);
  const GridSi grid_pre = phase_grid(s, Phase::PreFault, p.base);
  const GridSi grid_fault = phase_grid(s, Phase::Fault, p.base);
  const CurrentModel cm = opt.current_model.value_or(s.model.current_model);

  auto system_for = [&](const Mode& m, double t) {
    ReducedSystem sys{p, m.phase == Phase::Fault ? grid_fault : grid_pre, sp, cm,
                      ModeSignals{m.fsm.x_f, ramp_signal(m, t, p.t_ramp), s.limiter_enabled, false}};
    return sys;
  };

  const auto eq = pre_fault_equilibrium(s, params);
  Mode mode;
  solver::State y{eq.v_pu * p.v0, eq.delta};
  if (cm == CurrentModel::Dynamic) {
    const auto i = system_for(mode, 0.0).steady_current(y[0], y[1]);
    y.push_back(i.real());
    y.push_back(i.imag());
  }

  SimulationResult out;
  auto push_row = [&](const Mode& m, double t, const solver::State& st) {
    const auto sys = system_for(m, t);
    SampleRow r{};
    r.t = t;
    r.v_pu = st[reduced::kV] / p.v0;
    r.delta = st[reduced::kDelta];
    r.x_f = m.fsm.x_f ? 1 : 0;
    r.x_r = sys.signals.x_r;
    try {
      const auto i = sys.current(st);
      const auto pq = sys.power(st);
      r.i_pu = std::abs(i) / p.base.i_base;
      r.vpoc_pu = std::abs(sys.v_poc(st)) / p.base.v_base;
      r.p_pu = pq.p / p.base.s_base;
      r.q_pu = pq.q / p.base.s_base;
    } catch (const DegenerateVoltage&) {
      r.i_pu = r.vpoc_pu = r.p_pu = r.q_pu = std::nan("");
    }
    out.rows.push_back(r);
  };

  auto level_update = [&](Mode& m, double t, const solver::State& st) {
    if (!s.fsm_enabled) return;
    const auto sys = system_for(m, t);
    const double i_peak = std::numbers::sqrt2 * std::abs(sys.current(st));
    const double v_peak = std::numbers::sqrt2 * std::abs(sys.v_poc(st));
    const bool was = m.fsm.x_f;
    m.fsm = fsm_update(m.fsm, i_peak, v_peak, t, p);
    if (m.fsm.x_f != was) out.events.push_back({t, m.fsm.x_f ? "latch" : "release"});
  };

  double t = 0.0;
  push_row(mode, t, y);
  for (std::size_t seg = 0; seg < opt.max_segments && t < s.t_end; ++seg) {
    const Mode m = mode;
    const solver::Rhs rhs = [&](double tt, std::span<const double> yy, std::span<double> dy) {
      system_for(m, tt).rhs(yy, dy, ramp_signal(m, tt, p.t_ramp));
    };
    std::vector<solver::EventSpec> ev;
    const auto stop = solver::EventAction::Stop;
    const auto rising = solver::Direction::Rising;
    if (m.phase == Phase::PreFault && s.fault_time > t) {
      ev.push_back({"fault", [&](double tt, std::span<const double>) { return tt - s.fault_time; }, rising, stop, {}});
    }
    if (m.phase == Phase::Fault && s.clear_time) {
      ev.push_back({"clear", [&](double tt, std::span<const double>) { return tt - *s.clear_time; }, rising, stop, {}});
    }
    if (s.fsm_enabled && !m.fsm.x_f) {
      ev.push_back({"latch",
                    [&](double tt, std::span<const double> yy) {
                      return std::abs(system_for(m, tt).current(yy)) - p.i_thresh;
                    },
                    rising, stop, {}});
    }
    if (s.fsm_enabled && m.fsm.x_f) {
      ev.push_back({"release",
                    [&](double tt, std::span<const double> yy) {
                      return std::abs(system_for(m, tt).v_poc(yy)) - p.v_thresh;
                    },
                    rising, stop, {}});
    }
    if (!m.fsm.x_f && m.fsm.x_r > 0.0 && m.fsm.clear_time) {
      const double t_done = *m.fsm.clear_time + p.t_ramp;
      ev.push_back({"ramp-end", [t_done](double tt, std::span<const double>) { return tt - t_done; }, rising, stop, {}});
    }
    const double v_floor = 0.01 * p.v0;
    ev.push_back({"collapse", [v_floor](double, std::span<const double> yy) { return yy[reduced::kV] - v_floor; },
                  solver::Direction::Falling, stop, {}});

    solver::Trajectory traj;
    try {
      auto icfg = opt.integrator;
      icfg.store_dense = false;
      traj = solver::integrate(rhs, y, t, s.t_end, icfg, ev);
    } catch (const DegenerateVoltage& e) {
      out.status = RunStatus::Collapse;
      out.diagnostic = e.what();
      break;
    } catch (const solver::IntegrationError& e) {
      out.status = RunStatus::IntegrationFailure;
      out.diagnostic = e.what();
      break;
    }
    for (std::size_t k = 1; k < traj.t.size(); ++k) push_row(m, traj.t[k], traj.y[k]);
    t = traj.t_end();
    y = traj.back();
    if (!traj.stopped_by) break;

    const std::string& name = ev[*traj.stopped_by].name;
    out.events.push_back({t, name});
    if (name == "collapse") {
      out.status = RunStatus::Collapse;
      out.diagnostic = "voltage collapse at t=" + std::to_string(t);
      break;
    }
    if (name == "fault") mode.phase = Phase::Fault;
    else if (name == "clear") mode.phase = Phase::PostFault;
    else if (name == "latch") mode.fsm = FaultFsmState{true, 1.0, std::nullopt};
    else if (name == "release") mode.fsm = FaultFsmState{false, 1.0, t};
    else if (name == "ramp-end") mode.fsm = FaultFsmState{false, 0.0, std::nullopt};
    try {
      level_update(mode, t, y);
      push_row(mode, t, y);
    } catch (const DegenerateVoltage& e) {
      out.status = RunStatus::Collapse;
      out.diagnostic = e.what();
      break;
    }
  }
  return out;
}

SteadyState fault_steady_state(const SimulationResult& r, const Scenario& s) {
  const auto& row = s.clear_time ? r.sample_before(*s.clear_time) : r.rows.back();
  return {row.v_pu, row.delta, row.i_pu, row.vpoc_pu};
}

}  // namespace uvoc
