#pragma once

#include <complex>
#include <optional>
#include <stdexcept>

#include "uvoc/param_model.hpp"

namespace uvoc {

/// Space vector in the stationary alpha-beta frame (re = alpha, im = beta). Also
/// used for synchronous-frame complex quantities.
using Phasor = std::complex<double>;

inline constexpr Phasor kJ{0.0, 1.0};

class DegenerateVoltage : public std::runtime_error {
 public:
  explicit DegenerateVoltage(double norm)
      : std::runtime_error("oscillator voltage norm " + std::to_string(norm) + " below floor"), norm_(norm) {}
  [[nodiscard]] double norm() const { return norm_; }

 private:
  double norm_;
};

struct Setpoints {
  double p0 = 0.0;  // W
  double q0 = 0.0;  // var

  [[nodiscard]] double s0() const { return std::hypot(p0, q0); }
};

struct FaultFsmState {
  bool x_f = false;
  double x_r = 0.0;
  std::optional<double> clear_time;
};

/// Trapezoidal-rule discretization of the two first-order branches of
/// Z_v(s) = R_v0/(s/w_b + 1) + x_r * s L_v0/(s/w_b + 1).
struct VirtualImpedanceState {
  Phasor r_branch{};  // V
  Phasor l_branch{};  // V, before x_r scaling
  Phasor prev_i{};
};

struct ControllerState {
  Phasor v{};
  VirtualImpedanceState zv{};
  FaultFsmState fsm{};
};

struct Gains {
  double eta;
  double mu;
  double q0;  // effective reactive set-point (var)
};

/// i0 = 2 (P0 - j Q0) v / (N |v|^2), peak amps.
Phasor current_reference(Phasor v, const Setpoints& sp, int n, double v_floor = 1e-6);

Phasor circular_limit(Phasor i0, double i_m_peak);

/// eta = eta0 (1 + x_r/tau_f), mu = (1 - x_r) mu0; Q0 boosted to sqrt(S_rated^2 - P0^2)
/// while x_f is latched and boosting is enabled.
Gains gain_schedule(const FaultFsmState& fsm, const Setpoints& configured, const SiParams& p);

/// Set-points actually fed to the reference generator for the given fsm state.
Setpoints effective_setpoints(const FaultFsmState& fsm, const Setpoints& configured, const SiParams& p);

/// dv/dt = j w0 v + j eta (i0sat - i) + mu (V0_peak^2 - |v|^2) v with explicit gains.
Phasor oscillator_rhs(Phasor v, Phasor i0_sat, Phasor i_meas, double eta, double mu, const SiParams& p);

/// Full control law: reference generation, optional circular limiter, gain schedule.
Phasor oscillator_rhs(const ControllerState& state, Phasor i_meas, const Setpoints& configured, const SiParams& p,
                      bool limiter = true);

/// Saturated (or raw when the limiter is disabled) reference for the given state.
Phasor saturated_reference(const ControllerState& state, const Setpoints& configured, const SiParams& p, bool limiter);

/// Advances the Z_v filter states by dt and returns the virtual-impedance voltage drop.
/// The inductive branch state is always updated; only its output is scaled by x_r.
Phasor virtual_impedance_step(VirtualImpedanceState& zv, Phasor i_meas, double dt, double x_r, const SiParams& p);

/// Continuous-time Z_v(j w) at an angular frequency (ohm), inductive branch scaled by x_r.
Phasor virtual_impedance_at(double omega, double x_r, const SiParams& p);

/// v_r = v + R0_eff (i0sat - i) - zv_drop, with R0 active only while x_f is latched.
Phasor modulation_voltage(const ControllerState& state, Phasor i_meas, Phasor i0_sat, Phasor zv_drop,
                          const SiParams& p);

/// Over-current latch at |i| > sqrt(2) I_T, release at |v_poc| > sqrt(2) V_T, then
/// a linear x_r ramp to zero over t_ramp. Norms are peak values.
FaultFsmState fsm_update(const FaultFsmState& fsm, double i_norm, double v_poc_norm, double t, const SiParams& p);

/// x_r at time t for a released fsm (closed-form ramp).
double ramp_at(const FaultFsmState& fsm, double t, double t_ramp);

}  // namespace uvoc
