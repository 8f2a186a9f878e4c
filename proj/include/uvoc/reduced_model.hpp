#pragma once

#include <array>
#include <span>
#include <stdexcept>

#include "uvoc/controller.hpp"
#include "uvoc/param_model.hpp"

namespace uvoc {

/// Synchronous-frame reduced-order model. State layout: [V, delta] for the
/// quasi-static current model, [V, delta, I_d, I_q] for the dynamic one. V and
/// currents are RMS SI quantities; the frame rotates at omega_g aligned with v_TH.
namespace reduced {

inline constexpr std::size_t kV = 0;
inline constexpr std::size_t kDelta = 1;
inline constexpr std::size_t kId = 2;
inline constexpr std::size_t kIq = 3;

class SingularNetwork : public std::runtime_error {
 public:
  SingularNetwork() : std::runtime_error("network impedance is zero") {}
};

class UndefinedSaturation : public std::runtime_error {
 public:
  UndefinedSaturation() : std::runtime_error("saturated reference needs S0 > 0") {}
};

}  // namespace reduced

struct NetworkAggregate {
  double r_e;  // ohm
  double l_e;  // H
  double x_e;  // ohm at omega_g
};

struct EffectiveVirtualImpedance {
  double r_v;  // ohm
  double l_v;  // H
};

enum class OperatingMode { Unconstrained, Constrained };
enum class CurrentModel { QuasiStatic, Dynamic };

struct ModelMode {
  OperatingMode mode = OperatingMode::Unconstrained;
  CurrentModel current_model = CurrentModel::QuasiStatic;
};

struct PowerFlow {
  double p;  // W
  double q;  // var
};

/// r_v = Re Z_v(j w0), l_v = Im Z_v(j w0) / w0, inductive branch scaled by x_r.
EffectiveVirtualImpedance effective_virtual_impedance(const SiParams& p, double x_r);

/// R_e = R_v + R_1 + R_2 + R_TH (+ R_0 when the active resistance is in series),
/// L_e = L_v + L_1 + L_2 + L_TH.
NetworkAggregate network_aggregate(const SiParams& p, const GridSi& grid, double x_r, bool active_resistance);

/// Real/reactive power for the algebraic steady-state current, unconstrained case.
PowerFlow quasi_static_pq_unconstrained(double v, double delta, double v_th, const NetworkAggregate& net, int n);

/// Constrained case including the (V R0 I_m / S0)(.) terms of the saturated reference.
PowerFlow quasi_static_pq_constrained(double v, double delta, const Setpoints& sp, double v_th,
                                      const NetworkAggregate& net, double r0, double i_m, int n);

/// Saturated synchronous-frame reference (I_d0, I_q0), RMS.
std::array<double, 2> saturated_reference_dq(double delta, const Setpoints& sp, double i_m);

/// Largest PoC voltage reachable with |i| <= i_lim behind z_th (all per-unit).
double feasibility_bound(double v_th, double z_th_mag, double i_lim);

/// Signals of the fault-management subsystem as seen by the reduced model.
struct ModeSignals {
  bool x_f = false;
  double x_r = 0.0;
  bool limiter = false;          // circular limiter in the reference path
  bool force_saturation = false; // reference always on the I_m circle
};

/// Full description of one reduced-model vector field.
struct ReducedSystem {
  SiParams params;
  GridSi grid;
  Setpoints setpoints;  // configured (before any Q0 boost)
  CurrentModel current_model = CurrentModel::QuasiStatic;
  ModeSignals signals;
  double v_floor_ratio = 0.01;

  /// State dimension for the selected current model.
  [[nodiscard]] std::size_t dim() const { return current_model == CurrentModel::Dynamic ? 4 : 2; }

  /// Uses the mode signals held in `signals`.
  void rhs(std::span<const double> y, std::span<double> dydt) const;

  /// Same field with a time-varying ramp signal (x_r overridden).
  void rhs(std::span<const double> y, std::span<double> dydt, double x_r_override) const;

  [[nodiscard]] PowerFlow power(std::span<const double> y) const;
  [[nodiscard]] Phasor current(std::span<const double> y) const;       // RMS, dq
  [[nodiscard]] Phasor reference(std::span<const double> y) const;     // RMS, dq
  [[nodiscard]] Phasor v_poc(std::span<const double> y) const;         // RMS, dq
  [[nodiscard]] NetworkAggregate network() const;
  [[nodiscard]] Gains gains() const;
  [[nodiscard]] Setpoints effective_setpoints() const;

  /// Steady-state current for given (V, delta), i.e. the algebraic solution of
  /// the current dynamics with dI/dt = 0.
  [[nodiscard]] Phasor steady_current(double v, double delta) const;
};

ReducedSystem make_unconstrained(const SiParams& p, const GridSi& g, const Setpoints& sp, CurrentModel cm);
ReducedSystem make_constrained(const SiParams& p, const GridSi& g, const Setpoints& sp, CurrentModel cm);

/// Unconstrained (V, delta) dynamics (state [V, delta] or [V, delta, I_d, I_q]).
std::array<double, 2> rhs_unconstrained(std::span<const double> y, const Setpoints& sp, const GridSi& grid,
                                        const NetworkAggregate& net, const SiParams& p, CurrentModel cm);

/// Constrained (V, delta) dynamics with the scaled set-points N V I_m P0/S0, N V I_m Q0/S0.
std::array<double, 2> rhs_constrained(std::span<const double> y, const Setpoints& sp, const GridSi& grid,
                                      const NetworkAggregate& net, const SiParams& p, CurrentModel cm);

/// Current dynamics (dI_d/dt, dI_q/dt); the R0 forcing and saturated reference are
/// present only in constrained mode.
std::array<double, 2> rhs_current_dynamic(std::span<const double> y, OperatingMode mode, const Setpoints& sp,
                                          const GridSi& grid, const NetworkAggregate& net, const SiParams& p);

}  // namespace uvoc
