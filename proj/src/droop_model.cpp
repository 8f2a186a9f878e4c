#include "uvoc/droop_model.hpp"

#include <cmath>
#include <stdexcept>

namespace uvoc::droop {

double p_max(const SwingParams& sp, double v_th) { return sp.e * v_th / sp.x; }

solver::Rhs swing_rhs(const SwingParams& sp, double v_th) {
  const double pm = p_max(sp, v_th);
  return [sp, pm](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = (-y[1] + sp.m_p * (sp.p0 - pm * std::sin(y[0]))) / sp.tau;
  };
}

std::optional<double> stable_angle(const SwingParams& sp, double v_th) {
  const double ratio = sp.p0 / p_max(sp, v_th);
  if (std::abs(ratio) > 1.0) return std::nullopt;
  return std::asin(ratio);
}

CcaDemo run_cca_demo(const SwingParams& sp, std::size_t m, double horizon) {
  const auto pre = stable_angle(sp, sp.v_pre);
  if (!pre) throw std::invalid_argument("swing model has no pre-fault equilibrium");
  if (stable_angle(sp, sp.v_fault)) throw std::invalid_argument("swing model fault keeps an equilibrium");

  CcaDemo demo;
  demo.target_delta = *pre;
  CycleConfig cc;
  cc.t_max = 60.0;
  cc.section = winding_section(*pre, 0);
  cc.return_index = 1;
  cc.return_scale = sp.m_p;
  demo.fault_cycle = detect_limit_cycle(swing_rhs(sp, sp.v_fault), {*pre, 0.0}, cc);
  if (demo.fault_cycle.status != CycleStatus::Cycle) {
    throw std::runtime_error("swing model fault orbit not periodic: " + demo.fault_cycle.diagnostic);
  }
  SweepConfig sc;
  sc.horizon = horizon;
  sc.delta_index = 0;
  sc.v_index = 1;
  demo.sweep = clearing_sweep(demo.fault_cycle, swing_rhs(sp, sp.v_pre), *pre, 0.0, m, sc);
  return demo;
}

}  // namespace uvoc::droop
