#pragma once

#include <numbers>
#include <optional>

#include "uvoc/analysis.hpp"

namespace uvoc::droop {

/// Second-order droop (swing-equation) comparison model in per-unit:
///   d(delta)/dt = w,  tau dw/dt = -w + m_p (P0 - E V_TH sin(delta) / X).
/// Coefficients are illustrative, not calibrated to the uVOC parameters.
struct SwingParams {
  double tau = 2.0;                                 // s
  double m_p = 2.0 * std::numbers::pi * 60.0 * 0.05;  // rad/s per pu (5% droop)
  double p0 = 0.8;                                  // pu
  double e = 1.0;                                   // pu
  double x = 0.52;                                  // pu
  double v_pre = 1.0;                               // pu
  double v_fault = 0.3;                             // pu
};

double p_max(const SwingParams& sp, double v_th);

solver::Rhs swing_rhs(const SwingParams& sp, double v_th);

/// Stable equilibrium angle for the given source voltage, if P0 <= P_max.
std::optional<double> stable_angle(const SwingParams& sp, double v_th);

struct CcaDemo {
  CycleResult fault_cycle;
  SweepReport sweep;
  double target_delta = 0.0;
};

/// Fault-on winding orbit of the swing model, then clearing from m uniform points on it.
CcaDemo run_cca_demo(const SwingParams& sp, std::size_t m, double horizon = 30.0);

}  // namespace uvoc::droop
