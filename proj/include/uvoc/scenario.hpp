#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uvoc/analysis.hpp"
#include "uvoc/param_model.hpp"
#include "uvoc/reduced_model.hpp"
#include "uvoc/samples.hpp"

namespace uvoc {

struct Scenario {
  std::string name;
  GridThevenin pre_fault;
  GridThevenin fault;
  double fault_time = 0.2;
  std::optional<double> clear_time;
  double t_end = 2.0;
  double p0_pu = 0.0;
  double q0_pu = 0.0;
  bool limiter_enabled = true;
  bool fsm_enabled = true;
  bool q0_boost = false;
  ModelMode model{OperatingMode::Unconstrained, CurrentModel::Dynamic};

  void validate() const;
  [[nodiscard]] Setpoints setpoints(const PerUnitBase& base) const;
};

std::vector<std::string> builtin_scenario_names();

/// case1, case2-unprotected, case2-protected, case3.
Scenario builtin_scenario(const std::string& name);

/// Applies [scenario] entries from a config document on top of `base`.
Scenario apply_overrides(Scenario base, const ScenarioSection& section);

/// SI parameters with the scenario's Q0-boost toggle applied.
SiParams scenario_params(const Scenario& s, const ParamSet& params);

enum class Phase { PreFault, Fault, PostFault };

Phase parse_phase(const std::string& text);
GridSi phase_grid(const Scenario& s, Phase phase, const PerUnitBase& base);

/// Model used for surfaces and equilibria in a phase: unconstrained before the fault and
/// after clearing, constrained during the fault when the limiter and FSM are on.
OperatingMode default_mode(const Scenario& s, Phase phase);

ReducedSystem phase_system(const Scenario& s, const ParamSet& params, Phase phase, OperatingMode mode,
                           CurrentModel cm);

/// Stable pre-fault operating point (largest-V stable equilibrium of the unconstrained model).
Equilibrium pre_fault_equilibrium(const Scenario& s, const ParamSet& params);

struct SimulationOptions {
  solver::IntegratorConfig integrator{.h_max = 1e-3};
  std::optional<CurrentModel> current_model;  // overrides scenario.model.current_model
  std::size_t max_segments = 20000;
};

/// Hybrid reduced-model simulation: fault apply/clear, FSM latch/release/ramp, collapse stop.
SimulationResult simulate_reduced(const Scenario& s, const ParamSet& params, const SimulationOptions& opt = {});

struct SteadyState {
  double v_pu;
  double delta;
  double i_pu;
  double vpoc_pu;
};

/// Fault steady state: the sample just before clearing (or the final sample).
SteadyState fault_steady_state(const SimulationResult& r, const Scenario& s);

}  // namespace uvoc
