#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gen.hpp"
#include "uvoc/controller.hpp"

using namespace uvoc;

namespace {

SiParams defaults() { return resolve(ConverterParams{}, ControlParams{}); }

}  // namespace

TEST_CASE("current reference") {
  const auto z = current_reference({169.71, 0.0}, {0.0, 0.0}, 3);
  CHECK(z == Phasor{});

  const auto a = current_reference({169.71, 0.0}, {7500.0, 0.0}, 3);
  CHECK(a.real() == doctest::Approx(2.0 * 7500.0 / (3.0 * 169.71)).epsilon(1e-14));
  CHECK(a.real() == doctest::Approx(29.46).epsilon(1e-3));
  CHECK(a.imag() == 0.0);

  const auto b = current_reference({169.71, 0.0}, {0.0, 7500.0}, 3);
  CHECK(b.real() == doctest::Approx(0.0));
  CHECK(b.imag() == doctest::Approx(-29.46).epsilon(1e-3));

  CHECK_THROWS_AS(current_reference({1e-9, 0.0}, {1.0, 0.0}, 3), DegenerateVoltage);
  CHECK_THROWS_AS(current_reference({0.5, 0.0}, {1.0, 0.0}, 3, 1.0), DegenerateVoltage);
}

TEST_CASE("circular limit examples") {
  CHECK(circular_limit({0.5, 0.0}, 1.2) == Phasor{0.5, 0.0});
  const auto a = circular_limit({3.0, 4.0}, 1.0);
  CHECK(a.real() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(a.imag() == doctest::Approx(0.8).epsilon(1e-15));
  const auto b = circular_limit({0.0, -2.4}, 1.2);
  CHECK(b.real() == 0.0);
  CHECK(b.imag() == doctest::Approx(-1.2).epsilon(1e-15));
}

TEST_CASE("property: circular limiter magnitude and angle") {
  testgen::Gen g(21);
  for (int k = 0; k < testgen::kSamples; ++k) {
    const double lim = g.magnitude(1e-3, 1e3);
    const Phasor i0 = std::polar(g.magnitude(1e-4, 1e4), g.uniform(-std::numbers::pi, std::numbers::pi));
    const Phasor out = circular_limit(i0, lim);
    CHECK(std::abs(out) <= lim * (1.0 + 1e-14));
    if (std::abs(i0) <= lim) {
      CHECK(out == i0);
    } else {
      CHECK(std::abs(out) == doctest::Approx(lim).epsilon(1e-14));
      CHECK(std::abs(std::arg(out / i0)) < 1e-12);
    }
  }
}

TEST_CASE("oscillator rhs") {
  const auto p = defaults();
  const double vhat = std::numbers::sqrt2 * p.v0;
  const Phasor v{vhat, 0.0};
  const Phasor i0{10.0, -3.0};

  const auto rot = oscillator_rhs(v, i0, i0, 50.0, 1e-3, p);
  CHECK(rot.real() == doctest::Approx(0.0));
  CHECK(rot.imag() == doctest::Approx(p.omega0 * vhat).epsilon(1e-14));
  CHECK(rot.imag() == doctest::Approx(63972.0).epsilon(1e-3));

  const Phasor small = 0.8 * std::polar(vhat, 0.7);
  const auto grow = oscillator_rhs(small, i0, i0, 50.0, 1e-3, p);
  CHECK(std::real(grow * std::conj(small)) > 0.0);
}

TEST_CASE("property: droop identity of the oscillator") {
  const auto p = defaults();
  testgen::Gen g(22);
  for (int k = 0; k < testgen::kSamples; ++k) {
    const int n = g.coin() ? 3 : 1;
    const double vrms = g.uniform(0.2, 1.5) * p.v0;
    const double theta = g.uniform(-std::numbers::pi, std::numbers::pi);
    const Phasor v = std::polar(std::numbers::sqrt2 * vrms, theta);
    const Phasor i = g.phasor(60.0);
    const Setpoints sp{g.uniform(-9000.0, 9000.0), g.uniform(-9000.0, 9000.0)};
    const double eta = g.uniform(1.0, 300.0);
    const double mu = g.uniform(0.0, 2e-3);

    const Phasor dv = oscillator_rhs(v, current_reference(v, sp, n), i, eta, mu, p);
    const Phasor s = 0.5 * n * v * std::conj(i);
    const double nn = n;

    // V = |v|/sqrt2 and theta: project dv onto the radial and tangential directions.
    const double vdot = std::real(dv * std::conj(v)) / std::abs(v) / std::numbers::sqrt2;
    const double thetadot = std::imag(dv * std::conj(v)) / std::norm(v);
    const double vdot_ref = 2.0 * mu * vrms * (p.v0 * p.v0 - vrms * vrms) + eta * (sp.q0 - s.imag()) / (nn * vrms);
    const double wdot_ref = p.omega0 + eta * (sp.p0 - s.real()) / (nn * vrms * vrms);
    const double vscale = std::abs(2.0 * mu * vrms * (p.v0 * p.v0 - vrms * vrms)) +
                          std::abs(eta * (sp.q0 - s.imag()) / (nn * vrms)) + 1.0;
    CHECK(std::abs(vdot - vdot_ref) <= 1e-6 * vscale);
    CHECK(thetadot == doctest::Approx(wdot_ref).epsilon(1e-6));
  }
}

TEST_CASE("virtual impedance") {
  const auto p = defaults();
  const double zb = p.base.z_base;
  const Phasor z0 = virtual_impedance_at(p.omega0, 0.0, p);
  const double ratio = p.omega0 / p.omega_b;
  CHECK(z0.real() / zb == doctest::Approx(0.04 / (1.0 + ratio * ratio)).epsilon(1e-13));
  CHECK(z0.real() / zb == doctest::Approx(0.0396).epsilon(1e-3));

  const Phasor z1 = virtual_impedance_at(p.omega0, 1.0, p);
  const Phasor s = kJ * p.omega0;
  const Phasor direct = (0.04 * zb + s * 0.29 * zb / p.omega0) / (1.0 + s / p.omega_b);
  CHECK(z1.real() == doctest::Approx(direct.real()).epsilon(1e-13));
  CHECK(z1.imag() == doctest::Approx(direct.imag()).epsilon(1e-13));

  VirtualImpedanceState zv;
  zv.r_branch = {3.0, -1.0};
  zv.l_branch = {0.5, 2.0};
  Phasor drop;
  for (int k = 0; k < 20000; ++k) drop = virtual_impedance_step(zv, {}, 1e-4, 1.0, p);
  CHECK(std::abs(drop) < 1e-9);
}

TEST_CASE("discrete virtual impedance tracks the continuous response") {
  const auto p = defaults();
  const double dt = 1e-5;
  const Phasor amp{10.0, 0.0};
  VirtualImpedanceState zv;
  Phasor drop;
  double t = 0.0;
  const int steps = 40000;
  for (int k = 0; k < steps; ++k) {
    t = k * dt;
    drop = virtual_impedance_step(zv, amp * std::exp(kJ * p.omega0 * t), dt, 1.0, p);
  }
  const Phasor expected = virtual_impedance_at(p.omega0, 1.0, p) * amp * std::exp(kJ * p.omega0 * t);
  CHECK(std::abs(drop - expected) < 2e-3 * std::abs(expected));
}

TEST_CASE("modulation voltage") {
  const auto p = defaults();
  ControllerState st;
  st.v = {150.0, 20.0};
  CHECK(modulation_voltage(st, {7.0, 1.0}, {3.0, 0.0}, {}, p) == st.v);
  st.fsm.x_f = true;
  CHECK(modulation_voltage(st, {3.0, 0.0}, {3.0, 0.0}, {}, p) == st.v);
  const auto vr = modulation_voltage(st, {2.0, 0.0}, {3.0, 0.0}, {}, p);
  CHECK((vr - st.v).real() == doctest::Approx(0.43 * 5.76).epsilon(1e-12));
  CHECK((vr - st.v).real() == doctest::Approx(2.477).epsilon(1e-3));
  CHECK((vr - st.v).imag() == doctest::Approx(0.0));
}

TEST_CASE("gain schedule") {
  auto p = defaults();
  const Setpoints sp{0.27 * p.p_rated, 0.05 * p.p_rated};
  const auto g0 = gain_schedule({false, 0.0, {}}, sp, p);
  CHECK(g0.eta == p.eta0);
  CHECK(g0.mu == p.mu0);
  CHECK(g0.q0 == sp.q0);

  const auto g1 = gain_schedule({true, 1.0, {}}, sp, p);
  CHECK(g1.eta == doctest::Approx(19.95 * (1.0 + 1.0 / 0.11)).epsilon(1e-14));
  CHECK(g1.eta == doctest::Approx(201.3).epsilon(1e-3));
  CHECK(g1.mu == 0.0);

  p.s_rated = p.p_rated;
  const auto boosted = gain_schedule({true, 1.0, {}}, sp, p);
  CHECK(boosted.q0 / p.p_rated == doctest::Approx(std::sqrt(1.0 - 0.27 * 0.27)).epsilon(1e-14));
  CHECK(boosted.q0 / p.p_rated == doctest::Approx(0.963).epsilon(1e-3));

  p.q0_boost = false;
  CHECK(gain_schedule({true, 1.0, {}}, sp, p).q0 == sp.q0);
}

TEST_CASE("fault fsm examples") {
  const auto p = defaults();
  const double trip = std::numbers::sqrt2 * p.i_thresh;
  const double release = std::numbers::sqrt2 * p.v_thresh;

  FaultFsmState s;
  for (int k = 0; k < 100; ++k) s = fsm_update(s, 0.5 * trip, 0.5 * release, 0.01 * k, p);
  CHECK_FALSE(s.x_f);
  CHECK(s.x_r == 0.0);

  s = fsm_update(s, 1.01 * trip, 0.5 * release, 1.0, p);
  CHECK(s.x_f);
  CHECK(s.x_r == 1.0);

  s = fsm_update(s, 0.5 * trip, 0.5 * release, 1.1, p);
  CHECK(s.x_f);

  s = fsm_update(s, 0.5 * trip, 1.01 * release, 2.0, p);
  CHECK_FALSE(s.x_f);
  CHECK(s.x_r == 1.0);
  CHECK(fsm_update(s, 0.5 * trip, release, 2.025, p).x_r == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fsm_update(s, 0.5 * trip, release, 2.05, p).x_r == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  CHECK(fsm_update(s, 0.5 * trip, release, 2.06, p).x_r == 0.0);
  CHECK(ramp_at(s, 2.025, p.t_ramp) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ramp_at(s, 5.0, p.t_ramp) == 0.0);
}

TEST_CASE("trip with healthy terminal voltage restarts the ramp without latching") {
  const auto p = defaults();
  const double trip = std::numbers::sqrt2 * p.i_thresh;
  const double release = std::numbers::sqrt2 * p.v_thresh;
  const auto s = fsm_update({false, 0.2, 0.96}, 1.5 * trip, 1.1 * release, 1.0, p);
  CHECK_FALSE(s.x_f);
  CHECK(s.x_r == 1.0);
  REQUIRE(s.clear_time);
  CHECK(*s.clear_time == 1.0);
}

TEST_CASE("property: fsm latch and ramp") {
  const auto p = defaults();
  const double trip = std::numbers::sqrt2 * p.i_thresh;
  const double release = std::numbers::sqrt2 * p.v_thresh;
  testgen::Gen g(23);
  for (int run = 0; run < testgen::kSamples; ++run) {
    FaultFsmState s;
    double t = 0.0;
    for (int k = 0; k < 40; ++k) {
      t += g.magnitude(1e-4, 0.05);
      const double i = g.uniform(0.0, 1.5) * trip;
      const double v = g.uniform(0.0, 1.5) * release;
      const auto next = fsm_update(s, i, v, t, p);

      CHECK(next.x_r >= 0.0);
      CHECK(next.x_r <= 1.0);
      if (next.x_f) CHECK(next.x_r == 1.0);
      if (i > trip && v <= release) CHECK(next.x_f);
      if (i > trip) CHECK(next.x_r == 1.0);
      if (s.x_f && v > release) CHECK_FALSE(next.x_f);
      if (!s.x_f && i <= trip) {
        CHECK_FALSE(next.x_f);
        CHECK(next.x_r <= s.x_r);
      }
      if (s.x_f && i <= trip && v <= release) CHECK(next.x_f);
      s = next;
    }
  }
}
