#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uvoc/export.hpp"
#include "uvoc/scenario.hpp"

namespace uvoc {

struct PhaseAnalysis {
  SurfaceGrid surface;
  EquilibriumSearch equilibria;
  OperatingMode mode;
};

PhaseAnalysis analyze_phase(const Scenario& s, const ParamSet& params, Phase phase, OperatingMode mode,
                            const Domain& domain = {}, std::size_t resolution = 256);

struct FaultCycle {
  CycleResult cycle;
  ReducedSystem system;  // fault-phase system used for the cycle
  Equilibrium pre_fault;
};

/// Limit cycle of the fault-phase model started from the pre-fault operating point.
FaultCycle fault_limit_cycle(const Scenario& s, const ParamSet& params, CurrentModel cm, double t_max = 20.0);

/// Clears the fault from m uniform points of the cycle with the post-fault unconstrained model.
SweepReport fault_clearing_sweep(const Scenario& s, const ParamSet& params, const FaultCycle& fc, std::size_t m,
                                 double horizon = 5.0);

SweepConfig reduced_sweep_config(const SiParams& p);

struct RunOptions {
  std::size_t resolution = 256;
  Domain domain{};
  bool oracle = false;
};

struct RunReport {
  std::vector<std::filesystem::path> files;
  io::Json summary;
  bool ok = true;
};

/// Trajectory, surfaces and equilibria for both phases, limit cycle when the fault has no
/// equilibrium, plot scripts and a summary.json, all under out_dir.
RunReport run_scenario(const Scenario& s, const ParamSet& params, const std::filesystem::path& out_dir,
                       const RunOptions& opt = {});

}  // namespace uvoc
