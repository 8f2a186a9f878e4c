#include "uvoc/reduced_model.hpp"

#include <cmath>

namespace uvoc {

using reduced::kDelta;
using reduced::kId;
using reduced::kIq;
using reduced::kV;

EffectiveVirtualImpedance effective_virtual_impedance(const SiParams& p, double x_r) {
  const Phasor z = virtual_impedance_at(p.omega0, x_r, p);
  return {z.real(), z.imag() / p.omega0};
}

NetworkAggregate network_aggregate(const SiParams& p, const GridSi& grid, double x_r, bool active_resistance) {
  const auto zv = effective_virtual_impedance(p, x_r);
  NetworkAggregate net{};
  net.r_e = zv.r_v + p.r12 + grid.r_th + (active_resistance ? p.r0 : 0.0);
  net.l_e = zv.l_v + p.l12 + grid.l_th;
  net.x_e = grid.omega_g * net.l_e;
  return net;
}

PowerFlow quasi_static_pq_unconstrained(double v, double delta, double v_th, const NetworkAggregate& net, int n) {
  const double den = net.r_e * net.r_e + net.x_e * net.x_e;
  if (den == 0.0) throw reduced::SingularNetwork();
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  const double nn = static_cast<double>(n);
  return {nn * (v * v * net.r_e - v * v_th * (net.r_e * c - net.x_e * s)) / den,
          nn * (v * v * net.x_e - v * v_th * (net.x_e * c + net.r_e * s)) / den};
}

PowerFlow quasi_static_pq_constrained(double v, double delta, const Setpoints& sp, double v_th,
                                      const NetworkAggregate& net, double r0, double i_m, int n) {
  const double s0 = sp.s0();
  if (s0 == 0.0) throw reduced::UndefinedSaturation();
  auto pq = quasi_static_pq_unconstrained(v, delta, v_th, net, n);
  const double den = net.r_e * net.r_e + net.x_e * net.x_e;
  const double k = static_cast<double>(n) * v * r0 * i_m / s0 / den;
  pq.p += k * (net.r_e * sp.p0 - net.x_e * sp.q0);
  pq.q += k * (net.x_e * sp.p0 + net.r_e * sp.q0);
  return pq;
}

std::array<double, 2> saturated_reference_dq(double delta, const Setpoints& sp, double i_m) {
  const double s0 = sp.s0();
  if (s0 == 0.0) throw reduced::UndefinedSaturation();
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return {i_m / s0 * (sp.p0 * c + sp.q0 * s), i_m / s0 * (sp.p0 * s - sp.q0 * c)};
}

double feasibility_bound(double v_th, double z_th_mag, double i_lim) { return v_th + z_th_mag * i_lim; }

namespace {

void check_floor(double v, const SiParams& p, double ratio) {
  if (!(v >= ratio * p.v0)) throw DegenerateVoltage(std::numbers::sqrt2 * v);
}

// Reference current in the synchronous frame (RMS) for the given signals.
Phasor reference_dq(double v, double delta, const Setpoints& sp, const SiParams& p, const ModeSignals& sig) {
  const Phasor rot = std::polar(1.0, delta);
  const Phasor i0 = Phasor(sp.p0, -sp.q0) * rot / (static_cast<double>(p.n) * v);
  if (sig.force_saturation) {
    const double s0 = sp.s0();
    if (s0 == 0.0) throw reduced::UndefinedSaturation();
    return p.i_m * Phasor(sp.p0, -sp.q0) * rot / s0;
  }
  if (sig.limiter) return circular_limit(i0, p.i_m);
  return i0;
}

}  // namespace

NetworkAggregate ReducedSystem::network() const { return network_aggregate(params, grid, signals.x_r, signals.x_f); }

Gains ReducedSystem::gains() const {
  return gain_schedule(FaultFsmState{signals.x_f, signals.x_r, {}}, setpoints, params);
}

Setpoints ReducedSystem::effective_setpoints() const {
  return uvoc::effective_setpoints(FaultFsmState{signals.x_f, signals.x_r, {}}, setpoints, params);
}

Phasor ReducedSystem::reference(std::span<const double> y) const {
  check_floor(y[kV], params, v_floor_ratio);
  return reference_dq(y[kV], y[kDelta], effective_setpoints(), params, signals);
}

Phasor ReducedSystem::steady_current(double v, double delta) const {
  const auto net = network();
  const Phasor z(net.r_e, net.x_e);
  if (std::abs(z) == 0.0) throw reduced::SingularNetwork();
  const double r0f = signals.x_f ? params.r0 : 0.0;
  const Phasor i0 = reference_dq(v, delta, effective_setpoints(), params, signals);
  return (std::polar(v, delta) + r0f * i0 - grid.v_th) / z;
}

Phasor ReducedSystem::current(std::span<const double> y) const {
  if (current_model == CurrentModel::Dynamic) return {y[kId], y[kIq]};
  check_floor(y[kV], params, v_floor_ratio);
  return steady_current(y[kV], y[kDelta]);
}

PowerFlow ReducedSystem::power(std::span<const double> y) const {
  const Phasor s = static_cast<double>(params.n) * std::polar(y[kV], y[kDelta]) * std::conj(current(y));
  return {s.real(), s.imag()};
}

Phasor ReducedSystem::v_poc(std::span<const double> y) const {
  return grid.v_th + Phasor(grid.r_th, grid.omega_g * grid.l_th) * current(y);
}

void ReducedSystem::rhs(std::span<const double> y, std::span<double> dydt) const { rhs(y, dydt, signals.x_r); }

void ReducedSystem::rhs(std::span<const double> y, std::span<double> dydt, double x_r) const {
  const double v = y[kV];
  const double delta = y[kDelta];
  check_floor(v, params, v_floor_ratio);

  const FaultFsmState fsm{signals.x_f, x_r, {}};
  const auto g = gain_schedule(fsm, setpoints, params);
  const auto sp = uvoc::effective_setpoints(fsm, setpoints, params);
  const auto net = network_aggregate(params, grid, x_r, signals.x_f);
  const double nn = static_cast<double>(params.n);

  const Phasor rot = std::polar(1.0, delta);
  const Phasor i0 = reference_dq(v, delta, sp, params, signals);
  const double r0f = signals.x_f ? params.r0 : 0.0;
  const Phasor forcing = v * rot + r0f * i0 - grid.v_th;

  Phasor i;
  if (current_model == CurrentModel::Dynamic) {
    i = {y[kId], y[kIq]};
    const Phasor di = (forcing - Phasor(net.r_e, grid.omega_g * net.l_e) * i) / net.l_e;
    dydt[kId] = di.real();
    dydt[kIq] = di.imag();
  } else {
    const Phasor z(net.r_e, net.x_e);
    if (std::abs(z) == 0.0) throw reduced::SingularNetwork();
    i = forcing / z;
  }

  const Phasor s = nn * v * rot * std::conj(i);
  const Phasor ref = nn * v * i0 * std::conj(rot);  // P0s - j Q0s
  const double p_ref = ref.real();
  const double q_ref = -ref.imag();

  dydt[kV] = 2.0 * g.mu * v * (params.v0 * params.v0 - v * v) + g.eta * (q_ref - s.imag()) / (nn * v);
  dydt[kDelta] = params.omega0 - grid.omega_g + g.eta * (p_ref - s.real()) / (nn * v * v);
}

ReducedSystem make_unconstrained(const SiParams& p, const GridSi& g, const Setpoints& sp, CurrentModel cm) {
  ReducedSystem sys{p, g, sp, cm, ModeSignals{false, 0.0, false, false}};
  return sys;
}

ReducedSystem make_constrained(const SiParams& p, const GridSi& g, const Setpoints& sp, CurrentModel cm) {
  ReducedSystem sys{p, g, sp, cm, ModeSignals{true, 1.0, true, true}};
  return sys;
}

std::array<double, 2> rhs_unconstrained(std::span<const double> y, const Setpoints& sp, const GridSi& grid,
                                        const NetworkAggregate& net, const SiParams& p, CurrentModel cm) {
  const double v = y[kV];
  const double delta = y[kDelta];
  check_floor(v, p, 0.01);
  const double nn = static_cast<double>(p.n);
  PowerFlow pq{};
  if (cm == CurrentModel::Dynamic) {
    const double vd = v * std::cos(delta);
    const double vq = v * std::sin(delta);
    pq = {nn * (vd * y[kId] + vq * y[kIq]), nn * (vq * y[kId] - vd * y[kIq])};
  } else {
    pq = quasi_static_pq_unconstrained(v, delta, grid.v_th, net, p.n);
  }
  return {2.0 * p.mu0 * v * (p.v0 * p.v0 - v * v) + p.eta0 * (sp.q0 - pq.q) / (nn * v),
          p.omega0 - grid.omega_g + p.eta0 * (sp.p0 - pq.p) / (nn * v * v)};
}

std::array<double, 2> rhs_constrained(std::span<const double> y, const Setpoints& sp, const GridSi& grid,
                                      const NetworkAggregate& net, const SiParams& p, CurrentModel cm) {
  const double v = y[kV];
  const double delta = y[kDelta];
  check_floor(v, p, 0.01);
  const double s0 = sp.s0();
  if (s0 == 0.0) throw reduced::UndefinedSaturation();
  const double nn = static_cast<double>(p.n);
  const double eta = p.eta0 * (1.0 + 1.0 / p.tau_f);
  PowerFlow pq{};
  if (cm == CurrentModel::Dynamic) {
    const double vd = v * std::cos(delta);
    const double vq = v * std::sin(delta);
    pq = {nn * (vd * y[kId] + vq * y[kIq]), nn * (vq * y[kId] - vd * y[kIq])};
  } else {
    pq = quasi_static_pq_constrained(v, delta, sp, grid.v_th, net, p.r0, p.i_m, p.n);
  }
  const double scale = nn * v * p.i_m / s0;
  return {eta * (scale * sp.q0 - pq.q) / (nn * v), p.omega0 - grid.omega_g + eta * (scale * sp.p0 - pq.p) / (nn * v * v)};
}

std::array<double, 2> rhs_current_dynamic(std::span<const double> y, OperatingMode mode, const Setpoints& sp,
                                          const GridSi& grid, const NetworkAggregate& net, const SiParams& p) {
  const double v = y[kV];
  const double delta = y[kDelta];
  const double id = y[kId];
  const double iq = y[kIq];
  double fd = v * std::cos(delta) - grid.v_th;
  double fq = v * std::sin(delta);
  if (mode == OperatingMode::Constrained) {
    const auto [id0, iq0] = saturated_reference_dq(delta, sp, p.i_m);
    fd += p.r0 * id0;
    fq += p.r0 * iq0;
  }
  const double a = net.r_e / net.l_e;
  return {-a * id + grid.omega_g * iq + fd / net.l_e, -grid.omega_g * id - a * iq + fq / net.l_e};
}

}  // namespace uvoc
