#include "uvoc/alphabeta_oracle.hpp"

#include <cmath>
#include <numbers>

namespace uvoc {

namespace oracle {

Plant plant(const SiParams& p, const GridSi& grid) { return {p.l12 + grid.l_th, p.r12 + grid.r_th}; }

Phasor source_voltage(const GridSi& grid, double t) {
  return std::polar(std::numbers::sqrt2 * grid.v_th, grid.omega_g * t);
}

Phasor virtual_drop(std::span<const double> y, double x_r, const SiParams& p) {
  const Phasor i{y[2], y[3]};
  const Phasor yr{y[4], y[5]};
  const Phasor w{y[6], y[7]};
  return yr + x_r * p.omega_b * p.lv0 * (i - w);
}

void full_rhs(double t, std::span<const double> y, std::span<double> dydt, const Inputs& in, const SiParams& p) {
  const Phasor v{y[0], y[1]};
  const Phasor i{y[2], y[3]};
  const Phasor yr{y[4], y[5]};
  const Phasor w{y[6], y[7]};

  ControllerState cs;
  cs.v = v;
  cs.fsm = FaultFsmState{in.fsm.x_f, in.x_r, in.fsm.clear_time};
  const auto g = gain_schedule(cs.fsm, in.setpoints, p);
  const Phasor i0sat = saturated_reference(cs, in.setpoints, p, in.limiter);
  const Phasor dv = oscillator_rhs(v, i0sat, i, g.eta, g.mu, p);
  const Phasor vr = modulation_voltage(cs, i, i0sat, virtual_drop(y, in.x_r, p), p);
  const auto pl = plant(p, in.grid);
  const Phasor di = (vr - source_voltage(in.grid, t) - pl.r_phys * i) / pl.l_phys;
  const Phasor dyr = p.omega_b * (p.rv0 * i - yr);
  const Phasor dw = p.omega_b * (i - w);

  dydt[0] = dv.real();
  dydt[1] = dv.imag();
  dydt[2] = di.real();
  dydt[3] = di.imag();
  dydt[4] = dyr.real();
  dydt[5] = dyr.imag();
  dydt[6] = dw.real();
  dydt[7] = dw.imag();
}

}  // namespace oracle

Phasor measure_vpoc(std::span<const double> y, const GridSi& grid, double t) {
  const Phasor i{y[2], y[3]};
  return oracle::source_voltage(grid, t) + Phasor(grid.r_th, grid.omega_g * grid.l_th) * i;
}

std::array<double, oracle::kDim> oracle_initial_state(double v_rms, double delta, Phasor i_rms, const GridSi& grid,
                                                      const SiParams& p) {
  const Phasor v = std::polar(std::numbers::sqrt2 * v_rms, delta);
  const Phasor i = std::numbers::sqrt2 * i_rms;
  const Phasor lp = p.omega_b / (kJ * grid.omega_g + p.omega_b);
  const Phasor yr = p.rv0 * lp * i;
  const Phasor w = lp * i;
  return {v.real(), v.imag(), i.real(), i.imag(), yr.real(), yr.imag(), w.real(), w.imag()};
}

SimulationResult simulate_oracle(const Scenario& s, const ParamSet& params, const solver::IntegratorConfig& cfg) {
  s.validate();
  const auto p = scenario_params(s, params);
  const auto sp = s.setpoints(p.base);
  const GridSi grid_pre = phase_grid(s, Phase::PreFault, p.base);
  const GridSi grid_fault = phase_grid(s, Phase::Fault, p.base);

  struct Mode {
    Phase phase = Phase::PreFault;
    FaultFsmState fsm;
  };
  auto inputs_for = [&](const Mode& m, double t) {
    return oracle::Inputs{m.phase == Phase::Fault ? grid_fault : grid_pre, m.fsm, sp, s.limiter_enabled,
                          ramp_at(m.fsm, t, p.t_ramp)};
  };

  const auto eq = pre_fault_equilibrium(s, params);
  const auto red = phase_system(s, params, Phase::PreFault, OperatingMode::Unconstrained, CurrentModel::QuasiStatic);
  ReducedSystem red_lim = red;
  red_lim.signals.limiter = s.limiter_enabled;
  const Phasor i0 = red_lim.steady_current(eq.v_pu * p.v0, eq.delta);
  const auto init = oracle_initial_state(eq.v_pu * p.v0, eq.delta, i0, grid_pre, p);
  solver::State y(init.begin(), init.end());

  SimulationResult out;
  double delta_prev = eq.delta;
  auto push_row = [&](const Mode& m, double t, const solver::State& st) {
    const auto in = inputs_for(m, t);
    const Phasor v{st[0], st[1]};
    const Phasor i{st[2], st[3]};
    const double raw = std::arg(v * std::polar(1.0, -in.grid.omega_g * t));
    const double delta = delta_prev + std::remainder(raw - delta_prev, 2.0 * std::numbers::pi);
    delta_prev = delta;
    const Phasor sc = 0.5 * static_cast<double>(p.n) * v * std::conj(i);
    SampleRow r{};
    r.t = t;
    r.v_pu = std::abs(v) / std::numbers::sqrt2 / p.v0;
    r.delta = delta;
    r.i_pu = std::abs(i) / std::numbers::sqrt2 / p.base.i_base;
    r.vpoc_pu = std::abs(measure_vpoc(st, in.grid, t)) / std::numbers::sqrt2 / p.base.v_base;
    r.x_f = m.fsm.x_f ? 1 : 0;
    r.x_r = in.x_r;
    r.p_pu = sc.real() / p.base.s_base;
    r.q_pu = sc.imag() / p.base.s_base;
    out.rows.push_back(r);
  };

  const double i_trip = std::numbers::sqrt2 * p.i_thresh;
  const double v_release = std::numbers::sqrt2 * p.v_thresh;
  auto level_update = [&](Mode& m, double t, const solver::State& st) {
    if (!s.fsm_enabled) return;
    const auto in = inputs_for(m, t);
    const double i_norm = std::hypot(st[2], st[3]);
    const double v_norm = std::abs(measure_vpoc(st, in.grid, t));
    const bool was = m.fsm.x_f;
    m.fsm = fsm_update(m.fsm, i_norm, v_norm, t, p);
    if (m.fsm.x_f != was) out.events.push_back({t, m.fsm.x_f ? "latch" : "release"});
  };

  Mode mode;
  double t = 0.0;
  push_row(mode, t, y);
  for (std::size_t seg = 0; seg < 20000 && t < s.t_end; ++seg) {
    const Mode m = mode;
    const solver::Rhs rhs = [&](double tt, std::span<const double> yy, std::span<double> dy) {
      oracle::full_rhs(tt, yy, dy, inputs_for(m, tt), p);
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
      ev.push_back({"latch", [&](double, std::span<const double> yy) { return std::hypot(yy[2], yy[3]) - i_trip; },
                    rising, stop, {}});
    }
    if (s.fsm_enabled && m.fsm.x_f) {
      ev.push_back({"release",
                    [&](double tt, std::span<const double> yy) {
                      return std::abs(measure_vpoc(yy, inputs_for(m, tt).grid, tt)) - v_release;
                    },
                    rising, stop, {}});
    }
    if (!m.fsm.x_f && m.fsm.x_r > 0.0 && m.fsm.clear_time) {
      const double t_done = *m.fsm.clear_time + p.t_ramp;
      ev.push_back({"ramp-end", [t_done](double tt, std::span<const double>) { return tt - t_done; }, rising, stop, {}});
    }
    const double v_floor = 0.01 * std::numbers::sqrt2 * p.v0;
    ev.push_back({"collapse", [v_floor](double, std::span<const double> yy) { return std::hypot(yy[0], yy[1]) - v_floor; },
                  solver::Direction::Falling, stop, {}});

    solver::Trajectory traj;
    try {
      auto icfg = cfg;
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
    level_update(mode, t, y);
    push_row(mode, t, y);
  }
  return out;
}

}  // namespace uvoc
