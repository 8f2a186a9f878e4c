#pragma once

#include <array>
#include <span>

#include "uvoc/controller.hpp"
#include "uvoc/scenario.hpp"

namespace uvoc {

/// Stationary-frame averaged model of the full controller and the aggregated L-R plant.
/// State (peak SI): [v_a, v_b, i_a, i_b, yr_a, yr_b, w_a, w_b], where yr is the
/// virtual-resistance branch output and w the low-pass state of the inductive branch.
namespace oracle {

inline constexpr std::size_t kDim = 8;

struct Plant {
  double l_phys;  // H, L1 + L2 + L_TH
  double r_phys;  // ohm, R1 + R2 + R_TH
};

/// Discrete data held constant between events.
struct Inputs {
  GridSi grid;
  FaultFsmState fsm;
  Setpoints setpoints;  // configured
  bool limiter = true;
  double x_r = 0.0;     // ramp signal at the evaluation time
};

Plant plant(const SiParams& p, const GridSi& grid);

/// v_TH(t) as a peak space vector rotating at omega_g.
Phasor source_voltage(const GridSi& grid, double t);

Phasor virtual_drop(std::span<const double> y, double x_r, const SiParams& p);

void full_rhs(double t, std::span<const double> y, std::span<double> dydt, const Inputs& in, const SiParams& p);

}  // namespace oracle

/// v_poc = v_TH + (R_TH + j w_g L_TH) i, peak volts.
Phasor measure_vpoc(std::span<const double> y, const GridSi& grid, double t);

/// Sinusoidal steady state matching a reduced-model operating point at t = 0.
std::array<double, oracle::kDim> oracle_initial_state(double v_rms, double delta, Phasor i_rms, const GridSi& grid,
                                                      const SiParams& p);

SimulationResult simulate_oracle(const Scenario& s, const ParamSet& params,
                                 const solver::IntegratorConfig& cfg = {});

}  // namespace uvoc
