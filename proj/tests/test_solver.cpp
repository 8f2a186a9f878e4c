#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uvoc/solver.hpp"

using namespace uvoc::solver;

namespace {

const Rhs decay = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; };
const Rhs ramp = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 1.0; };

// y'' = -y written as a first-order pair.
const Rhs oscillator = [](double, std::span<const double> y, std::span<double> dy) {
  dy[0] = y[1];
  dy[1] = -y[0];
};

double fixed_step_error(double h) {
  IntegratorConfig cfg;
  cfg.adaptive = false;
  cfg.h_init = h;
  cfg.store_dense = false;
  const auto tr = integrate(oscillator, {1.0, 0.0}, 0.0, 2.0, cfg);
  return std::hypot(tr.back()[0] - std::cos(2.0), tr.back()[1] + std::sin(2.0));
}

}  // namespace

TEST_CASE("exponential decay") {
  IntegratorConfig cfg;
  cfg.rtol = 1e-9;
  cfg.atol = 1e-12;
  const auto tr = integrate(decay, {1.0}, 0.0, 1.0, cfg);
  CHECK(tr.t_end() == 1.0);
  CHECK(std::abs(tr.back()[0] - 0.3678794412) < 1e-8);
  CHECK(tr.stats.accepted > 0);
}

TEST_CASE("linear crossing event") {
  IntegratorConfig cfg;
  std::vector<EventSpec> ev{{"half", [](double, std::span<const double> y) { return y[0] - 0.5; }, Direction::Rising,
                             EventAction::Stop, {}}};
  const auto tr = integrate(ramp, {0.0}, 0.0, 2.0, cfg, ev);
  REQUIRE(tr.stopped_by);
  CHECK(*tr.stopped_by == 0);
  CHECK(std::abs(tr.t_end() - 0.5) < 1e-9);
  REQUIRE(tr.events.size() == 1);
  CHECK(std::abs(tr.events[0].t - 0.5) < 1e-9);
}

TEST_CASE("event direction and record action") {
  IntegratorConfig cfg;
  cfg.h_max = 0.05;
  std::vector<EventSpec> ev{
      {"up", [](double, std::span<const double> y) { return y[0]; }, Direction::Rising, EventAction::Record, {}},
      {"down", [](double, std::span<const double> y) { return y[0]; }, Direction::Falling, EventAction::Record, {}}};
  const auto tr = integrate(oscillator, {1.0, 0.0}, 0.0, 10.0, cfg, ev);
  CHECK_FALSE(tr.stopped_by);
  // cos t falls through zero at pi/2 and 5pi/2, rises at 3pi/2.
  std::vector<double> down, up;
  for (const auto& e : tr.events) (e.name == "up" ? up : down).push_back(e.t);
  REQUIRE(down.size() == 2);
  REQUIRE(up.size() == 1);
  CHECK(down[1] == doctest::Approx(5 * std::numbers::pi / 2).epsilon(1e-8));
  CHECK(down[0] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-8));
  CHECK(up[0] == doctest::Approx(3 * std::numbers::pi / 2).epsilon(1e-8));
}

TEST_CASE("mode switch modifies the state") {
  IntegratorConfig cfg;
  std::vector<EventSpec> ev{{"reset", [](double, std::span<const double> y) { return y[0] - 1.0; },
                             Direction::Rising, EventAction::ModeSwitch,
                             [](double, State& y) { y[0] = 0.0; }}};
  const auto tr = integrate(ramp, {0.0}, 0.0, 2.5, cfg, ev);
  CHECK(tr.events.size() == 2);
  CHECK(tr.back()[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("fixed-step convergence order") {
  const double e1 = fixed_step_error(0.1);
  const double e2 = fixed_step_error(0.01);
  const double order = std::log10(e1 / e2);
  MESSAGE("empirical order " << order);
  CHECK(order >= 4.7);
}

TEST_CASE("dense output") {
  IntegratorConfig cfg;
  cfg.rtol = 1e-8;
  cfg.atol = 1e-12;
  const auto tr = integrate(decay, {1.0}, 0.0, 2.0, cfg);
  for (std::size_t k = 0; k < tr.t.size(); ++k) CHECK(dense_eval(tr, tr.t[k])[0] == tr.y[k][0]);
  for (std::size_t k = 0; k + 1 < tr.t.size(); ++k) {
    const double tm = 0.5 * (tr.t[k] + tr.t[k + 1]);
    CHECK(std::abs(dense_eval(tr, tm)[0] - std::exp(-tm)) <= 10.0 * cfg.rtol * std::exp(-tm));
  }
  CHECK_THROWS_AS(dense_eval(tr, 2.5), std::out_of_range);
  CHECK_THROWS_AS(dense_eval(tr, -0.1), std::out_of_range);

  const auto lin = integrate(ramp, {3.0}, 0.0, 1.0, cfg);
  for (double t : {0.013, 0.25, 0.5, 0.77, 0.999}) CHECK(dense_eval(lin, t)[0] == doctest::Approx(3.0 + t).epsilon(1e-14));
}

TEST_CASE("failure reports") {
  const Rhs blowup = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  IntegratorConfig cfg;
  cfg.h_min = 1e-10;
  CHECK_THROWS_AS(integrate(blowup, {1.0}, 0.0, 2.0, cfg), IntegrationError);

  IntegratorConfig tight;
  tight.max_steps = 10;
  tight.h_max = 1e-3;
  CHECK_THROWS_AS(integrate(decay, {1.0}, 0.0, 1.0, tight), StepBudgetExceeded);

  IntegratorConfig bad;
  bad.rtol = -1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("empty span is rejected") {
  CHECK_THROWS_AS(integrate(decay, {1.0}, 1.0, 0.0, IntegratorConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(integrate(decay, {1.0}, 1.0, 1.0, IntegratorConfig{}), std::invalid_argument);
}
