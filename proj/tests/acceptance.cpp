// Acceptance run: one PASS/FAIL line per criterion. With an argument (e.g. "AC6")
// only that criterion runs; the exit status is nonzero when any executed check fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "uvoc/alphabeta_oracle.hpp"
#include "uvoc/run_scenario.hpp"

using namespace uvoc;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

const ParamSet& params() {
  static const ParamSet ps = load_params("");
  return ps;
}

Verdict ac1() {
  const auto s = builtin_scenario("case1");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = simulate_reduced(s, params());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto ss = fault_steady_state(r, s);
  const bool i_ok = within(ss.i_pu, 0.63, 0.05);
  const bool v_ok = within(ss.vpoc_pu, 0.92, 0.03);
  return {r.status == RunStatus::Completed && i_ok && v_ok && secs < 10.0,
          "|i| = " + num(ss.i_pu) + " pu (0.63 +- 0.05) " + (i_ok ? "ok" : "OUT") + ", |v_poc| = " +
              num(ss.vpoc_pu) + " pu (0.92 +- 0.03) " + (v_ok ? "ok" : "OUT") + ", runtime " + num(secs, 3) + " s"};
}

Verdict ac2() {
  const auto s = builtin_scenario("case2-unprotected");
  const auto r = simulate_reduced(s, params());
  const auto ss = fault_steady_state(r, s);
  const bool ok = r.status == RunStatus::Completed && within(ss.i_pu, 2.0, 0.15) && within(ss.vpoc_pu, 0.7, 0.05);
  return {ok, "|i| = " + num(ss.i_pu) + " pu (2.0 +- 0.15), |v_poc| = " + num(ss.vpoc_pu) + " pu (0.7 +- 0.05)"};
}

Verdict ac3() {
  const auto s = builtin_scenario("case2-protected");
  const auto r = simulate_reduced(s, params());
  double t_latch = -1.0;
  for (const auto& e : r.events)
    if (e.name == "latch") {
      t_latch = e.t;
      break;
    }
  if (t_latch < 0.0) return {false, "over-current latch never fired"};
  // Detection transient: two fundamental cycles after the latch.
  const double settle = t_latch + 2.0 / 60.0;
  double worst = 0.0;
  for (const auto& row : r.rows)
    if (row.t >= settle && row.t < *s.clear_time) worst = std::max(worst, std::abs(row.i_pu - 1.2) / 1.2);
  const auto pa = analyze_phase(s, params(), Phase::Fault, default_mode(s, Phase::Fault));
  std::size_t stable = 0;
  for (const auto& eq : pa.equilibria.equilibria) stable += eq.kind == EquilibriumKind::Stable;
  const bool ok = r.status == RunStatus::Completed && worst <= 0.05 && stable >= 1;
  return {ok, "latch at " + num(t_latch, 5) + " s, max | |i| - 1.2 |/1.2 after transient = " + num(worst, 3) +
                  " (<= 0.05), stable fault equilibria: " + std::to_string(stable)};
}

Verdict ac4() {
  const double b = feasibility_bound(0.5, 0.1, 1.2);
  const double err = std::abs(b - 0.62);
  return {err <= 2.0 * std::numeric_limits<double>::epsilon(), "feasibility_bound(0.5, 0.1, 1.2) = " + num(b, 17)};
}

Verdict ac5() {
  const auto s = builtin_scenario("case3");
  const auto pre = analyze_phase(s, params(), Phase::PreFault, OperatingMode::Unconstrained);
  const auto fault = analyze_phase(s, params(), Phase::Fault, default_mode(s, Phase::Fault));
  std::size_t st = 0, un = 0;
  for (const auto& eq : pre.equilibria.equilibria) {
    st += eq.kind == EquilibriumKind::Stable;
    un += eq.kind == EquilibriumKind::Unstable;
  }
  const bool ok = pre.equilibria.equilibria.size() == 2 && st == 1 && un == 1 && fault.equilibria.equilibria.empty();
  return {ok, "pre-fault: " + std::to_string(pre.equilibria.equilibria.size()) + " equilibria (" + std::to_string(st) +
                  " stable, " + std::to_string(un) + " unstable), fault: " +
                  std::to_string(fault.equilibria.equilibria.size()) + " at 256x256"};
}

Verdict ac6() {
  const auto s = builtin_scenario("case3");
  const auto dyn = fault_limit_cycle(s, params(), CurrentModel::Dynamic);
  const auto qs = fault_limit_cycle(s, params(), CurrentModel::QuasiStatic);
  const bool cyc = dyn.cycle.status == CycleStatus::Cycle;
  const bool ok = cyc && within(dyn.cycle.period, 0.393, 0.0393);
  return {ok, "period " + num(dyn.cycle.period * 1e3, 5) + " ms (393 +- 10%, dynamic-current model, " +
                  to_string(dyn.cycle.status) + "); quasi-static model " + num(qs.cycle.period * 1e3, 5) + " ms"};
}

Verdict ac7() {
  const auto s = builtin_scenario("case3");
  const auto fc = fault_limit_cycle(s, params(), CurrentModel::Dynamic);
  if (fc.cycle.status != CycleStatus::Cycle) return {false, "no limit cycle to sweep"};
  const auto rep = fault_clearing_sweep(s, params(), fc, 12);
  // Post-fault equilibrium versus a_s.
  const auto post = analyze_phase(s, params(), Phase::PostFault, OperatingMode::Unconstrained);
  double gap = 1e9;
  for (const auto& eq : post.equilibria.equilibria)
    if (eq.kind == EquilibriumKind::Stable)
      gap = std::min(gap, std::hypot(wrap_angle(eq.delta - fc.pre_fault.delta), eq.v_pu - fc.pre_fault.v_pu));
  const bool ok = rep.converged == 12 && gap <= 1e-3;
  return {ok, std::to_string(rep.converged) + "/12 clearing points converge; post-fault vs a_s distance " + num(gap, 3)};
}

Verdict ac8() {
  const auto& ps = params();
  const auto p = resolve(ps.converter, ps.control);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const bool constrained = k % 2 == 1;
    const GridSi grid = resolve(GridThevenin{0.3 + 0.8 * u(rng), p.omega0, 0.05 + 0.6 * u(rng), 20.0}, p.base);
    const double v = (0.2 + 1.2 * u(rng)) * p.v0;
    const double delta = (2.0 * u(rng) - 1.0) * std::numbers::pi;
    const Setpoints sp{(0.05 + 0.95 * u(rng)) * p.p_rated, (u(rng) - 0.5) * p.p_rated};
    const auto net = network_aggregate(p, grid, constrained ? 1.0 : u(rng), constrained);
    const auto mode = constrained ? OperatingMode::Constrained : OperatingMode::Unconstrained;
    auto f = [&](double id, double iq) {
      const double y[4] = {v, delta, id, iq};
      return rhs_current_dynamic(y, mode, sp, grid, net, p);
    };
    const auto b = f(0, 0), c1 = f(1, 0), c2 = f(0, 1);
    const double a11 = c1[0] - b[0], a21 = c1[1] - b[1], a12 = c2[0] - b[0], a22 = c2[1] - b[1];
    const double det = a11 * a22 - a12 * a21;
    const double id = (-b[0] * a22 + a12 * b[1]) / det, iq = (-a11 * b[1] + a21 * b[0]) / det;
    const double vd = v * std::cos(delta), vq = v * std::sin(delta);
    const double pd = p.n * (vd * id + vq * iq), qd = p.n * (vq * id - vd * iq);
    const auto qs = constrained ? quasi_static_pq_constrained(v, delta, sp, grid.v_th, net, p.r0, p.i_m, p.n)
                                : quasi_static_pq_unconstrained(v, delta, grid.v_th, net, p.n);
    const double scale = std::max({std::abs(pd), std::abs(qd), 1.0});
    worst = std::max(worst, std::max(std::abs(qs.p - pd), std::abs(qs.q - qd)) / scale);
  }
  return {worst <= 1e-9, "max relative (P, Q) mismatch over 1000 points per mode = " + num(worst, 3) + " (<= 1e-9)"};
}

Verdict ac9() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"case1", "case2-protected"}) {
    const auto s = builtin_scenario(name);
    const auto red = simulate_reduced(s, params());
    const auto orc = simulate_oracle(s, params());
    if (red.status != RunStatus::Completed || orc.status != RunStatus::Completed) {
      ok = false;
      detail += std::string(name) + ": run failed; ";
      continue;
    }
    const auto a = fault_steady_state(red, s);
    const auto b = fault_steady_state(orc, s);
    const double dv = std::abs(a.v_pu - b.v_pu) / std::abs(a.v_pu);
    const double dd = std::abs(wrap_angle(a.delta - b.delta)) / std::abs(a.delta);
    const double di = std::abs(a.i_pu - b.i_pu) / std::abs(a.i_pu);
    const double worst = std::max({dv, dd, di});
    ok = ok && worst <= 0.02;
    detail += std::string(name) + ": dV " + num(dv, 2) + ", ddelta " + num(dd, 2) + ", di " + num(di, 2) + "; ";
  }
  return {ok, detail + "tolerance 2%"};
}

Verdict ac10() {
  const solver::Rhs osc = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  auto err = [&](double h) {
    solver::IntegratorConfig cfg;
    cfg.adaptive = false;
    cfg.h_init = h;
    cfg.store_dense = false;
    const auto tr = solver::integrate(osc, {1.0, 0.0}, 0.0, 2.0, cfg);
    return std::hypot(tr.back()[0] - std::cos(2.0), tr.back()[1] + std::sin(2.0));
  };
  const double order = std::log10(err(0.1) / err(0.01));

  const solver::Rhs ramp = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; };
  std::vector<solver::EventSpec> ev{{"half", [](double, std::span<const double> y) { return y[0] - 0.5; },
                                     solver::Direction::Rising, solver::EventAction::Stop, {}}};
  const auto tr = solver::integrate(ramp, {0.0}, 0.0, 2.0, solver::IntegratorConfig{}, ev);
  const double loc = std::abs(tr.t_end() - 0.5);
  return {order >= 4.7 && loc < 1e-9, "order " + num(order, 4) + " (>= 4.7), event error " + num(loc, 3) + " s (< 1e-9)"};
}

Verdict ac11() {
  const auto& ps = params();
  const auto p = resolve(ps.converter, ps.control);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t limiter_bad = 0, fsm_bad = 0, droop_bad = 0, norm_bad = 0;
  const int n = 1000;

  for (int k = 0; k < n; ++k) {
    const double lim = std::exp(std::log(1e-3) + u(rng) * std::log(1e6));
    const Phasor i0 = std::polar(std::exp(std::log(1e-4) + u(rng) * std::log(1e8)), (2 * u(rng) - 1) * std::numbers::pi);
    const Phasor out = circular_limit(i0, lim);
    const bool ok = std::abs(out) <= lim * (1 + 1e-14) &&
                    (std::abs(i0) <= lim ? out == i0 : std::abs(std::arg(out / i0)) < 1e-12);
    limiter_bad += !ok;
  }

  const double trip = std::numbers::sqrt2 * p.i_thresh, rel = std::numbers::sqrt2 * p.v_thresh;
  for (int run = 0; run < n; ++run) {
    FaultFsmState s;
    double t = 0.0;
    for (int k = 0; k < 20; ++k) {
      t += 1e-3 + 0.05 * u(rng);
      const double i = 1.5 * u(rng) * trip, v = 1.5 * u(rng) * rel;
      const auto next = fsm_update(s, i, v, t, p);
      bool ok = next.x_r >= 0.0 && next.x_r <= 1.0 && (!next.x_f || next.x_r == 1.0);
      if (i > trip && v <= rel) ok = ok && next.x_f;
      if (!s.x_f && i <= trip) ok = ok && !next.x_f && next.x_r <= s.x_r;
      fsm_bad += !ok;
      s = next;
    }
  }

  for (int k = 0; k < n; ++k) {
    const double vrms = (0.2 + 1.3 * u(rng)) * p.v0;
    const Phasor v = std::polar(std::numbers::sqrt2 * vrms, (2 * u(rng) - 1) * std::numbers::pi);
    const Phasor i = std::polar(60.0 * u(rng), (2 * u(rng) - 1) * std::numbers::pi);
    const Setpoints sp{(2 * u(rng) - 1) * 9000.0, (2 * u(rng) - 1) * 9000.0};
    const double eta = 1.0 + 300.0 * u(rng), mu = 2e-3 * u(rng);
    const Phasor dv = oscillator_rhs(v, current_reference(v, sp, p.n), i, eta, mu, p);
    const Phasor s = 0.5 * p.n * v * std::conj(i);
    const double vdot = std::real(dv * std::conj(v)) / std::abs(v) / std::numbers::sqrt2;
    const double a = 2.0 * mu * vrms * (p.v0 * p.v0 - vrms * vrms), b = eta * (sp.q0 - s.imag()) / (p.n * vrms);
    droop_bad += !(std::abs(vdot - (a + b)) <= 1e-6 * (std::abs(a) + std::abs(b) + 1.0));
  }

  for (int k = 0; k < n; ++k) {
    const double c1 = 10 * u(rng) - 5, c2 = 10 * u(rng) - 5, s1 = std::exp(20 * u(rng) - 10);
    const PlanarField f = [=](double d, double v) { return std::array{s1 * (std::sin(d + c1) + c2 * v), v * v - c2 * d}; };
    const auto g = sample_surfaces(f, Domain{}, 16, 16);
    double m1 = 0, m2 = 0;
    for (std::size_t j = 0; j < g.ddelta.size(); ++j) {
      m1 = std::max(m1, std::abs(g.ddelta[j]));
      m2 = std::max(m2, std::abs(g.dv[j]));
    }
    norm_bad += !(std::abs(m1 - 1.0) < 1e-15 && std::abs(m2 - 1.0) < 1e-15);
  }
  const bool ok = limiter_bad + fsm_bad + droop_bad + norm_bad == 0;
  return {ok, "violations over 1000 samples each: limiter " + std::to_string(limiter_bad) + ", fsm " +
                  std::to_string(fsm_bad) + ", droop identity " + std::to_string(droop_bad) + ", normalization " +
                  std::to_string(norm_bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1", {"Case I fault steady state", ac1}},
      {"AC2", {"Case II unprotected steady state", ac2}},
      {"AC3", {"Case II protected current clamp and equilibrium", ac3}},
      {"AC4", {"feasibility bound", ac4}},
      {"AC5", {"Case III equilibrium topology", ac5}},
      {"AC6", {"Case III limit-cycle period", ac6}},
      {"AC7", {"clearing sweep recovers a_s", ac7}},
      {"AC8", {"quasi-static / dynamic-current equivalence", ac8}},
      {"AC9", {"alpha-beta oracle agreement", ac9}},
      {"AC10", {"integrator order and event localization", ac10}},
      {"AC11", {"invariant property suites", ac11}},
  };
  const std::vector<std::string> order{"AC1", "AC2", "AC3", "AC4", "AC5", "AC6", "AC7", "AC8", "AC9", "AC10", "AC11"};

  std::vector<std::string> selected;
  for (int k = 1; k < argc; ++k) {
    if (!criteria.contains(argv[k])) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[k]);
      return 2;
    }
    selected.emplace_back(argv[k]);
  }
  if (selected.empty()) selected = order;

  int failed = 0;
  for (const auto& id : selected) {
    const auto& [title, fn] = criteria.at(id);
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%-4s %s  %s: %s\n", id.c_str(), v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", selected.size() - failed, selected.size());
  return failed == 0 ? 0 : 1;
}
