#include "uvoc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uvoc {

Phasor current_reference(Phasor v, const Setpoints& sp, int n, double v_floor) {
  const double norm2 = std::norm(v);
  if (std::sqrt(norm2) < v_floor) throw DegenerateVoltage(std::abs(v));
  return 2.0 * Phasor(sp.p0, -sp.q0) * v / (static_cast<double>(n) * norm2);
}

Phasor circular_limit(Phasor i0, double i_m_peak) {
  const double mag = std::abs(i0);
  if (mag <= i_m_peak) return i0;
  return i0 * (i_m_peak / mag);
}

Setpoints effective_setpoints(const FaultFsmState& fsm, const Setpoints& configured, const SiParams& p) {
  if (fsm.x_f && p.q0_boost) {
    const double s2 = p.s_rated * p.s_rated - configured.p0 * configured.p0;
    return {configured.p0, std::sqrt(std::max(0.0, s2))};
  }
  return configured;
}

Gains gain_schedule(const FaultFsmState& fsm, const Setpoints& configured, const SiParams& p) {
  return {p.eta0 * (1.0 + fsm.x_r / p.tau_f), (1.0 - fsm.x_r) * p.mu0,
          effective_setpoints(fsm, configured, p).q0};
}

Phasor oscillator_rhs(Phasor v, Phasor i0_sat, Phasor i_meas, double eta, double mu, const SiParams& p) {
  const double v0_peak2 = 2.0 * p.v0 * p.v0;
  return kJ * p.omega0 * v + kJ * eta * (i0_sat - i_meas) + mu * (v0_peak2 - std::norm(v)) * v;
}

Phasor saturated_reference(const ControllerState& state, const Setpoints& configured, const SiParams& p, bool limiter) {
  const auto sp = effective_setpoints(state.fsm, configured, p);
  const Phasor i0 = current_reference(state.v, sp, p.n);
  return limiter ? circular_limit(i0, std::numbers::sqrt2 * p.i_m) : i0;
}

Phasor oscillator_rhs(const ControllerState& state, Phasor i_meas, const Setpoints& configured, const SiParams& p,
                      bool limiter) {
  const auto g = gain_schedule(state.fsm, configured, p);
  return oscillator_rhs(state.v, saturated_reference(state, configured, p, limiter), i_meas, g.eta, g.mu, p);
}

Phasor virtual_impedance_step(VirtualImpedanceState& zv, Phasor i_meas, double dt, double x_r, const SiParams& p) {
  const double two_over_t = 2.0 / dt;
  const double den = two_over_t + p.omega_b;
  const double a = (two_over_t - p.omega_b) / den;
  zv.r_branch = a * zv.r_branch + (p.rv0 * p.omega_b / den) * (i_meas + zv.prev_i);
  zv.l_branch = a * zv.l_branch + (p.lv0 * p.omega_b * two_over_t / den) * (i_meas - zv.prev_i);
  zv.prev_i = i_meas;
  return zv.r_branch + x_r * zv.l_branch;
}

Phasor virtual_impedance_at(double omega, double x_r, const SiParams& p) {
  const Phasor s = kJ * omega;
  return (p.rv0 + x_r * s * p.lv0) / (s / p.omega_b + 1.0);
}

Phasor modulation_voltage(const ControllerState& state, Phasor i_meas, Phasor i0_sat, Phasor zv_drop,
                          const SiParams& p) {
  const double r0_eff = state.fsm.x_f ? p.r0 : 0.0;
  return state.v + r0_eff * (i0_sat - i_meas) - zv_drop;
}

double ramp_at(const FaultFsmState& fsm, double t, double t_ramp) {
  if (fsm.x_f) return 1.0;
  if (!fsm.clear_time) return fsm.x_r;
  return std::clamp(1.0 - (t - *fsm.clear_time) / t_ramp, 0.0, 1.0);
}

FaultFsmState fsm_update(const FaultFsmState& fsm, double i_norm, double v_poc_norm, double t, const SiParams& p) {
  FaultFsmState next = fsm;
  const double i_trip = std::numbers::sqrt2 * p.i_thresh;
  const double v_release = std::numbers::sqrt2 * p.v_thresh;

  if (i_norm > i_trip) {
    next.x_f = true;
    next.x_r = 1.0;
    next.clear_time.reset();
  }
  // A trip with a healthy terminal voltage releases at once and only restarts the ramp.
  if (next.x_f && v_poc_norm > v_release) {
    next.x_f = false;
    next.clear_time = t;
  }
  if (!next.x_f && next.x_r > 0.0) {
    // A ramp that never saw a release (hand-built state) starts from now.
    if (!next.clear_time) next.clear_time = t;
    next.x_r = std::min(next.x_r, ramp_at(next, t, p.t_ramp));
  }
  return next;
}

}  // namespace uvoc
