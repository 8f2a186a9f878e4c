#pragma once

#include <optional>
#include <string>
#include <vector>

namespace uvoc {

/// One trajectory sample in the schema shared by the reduced model and the oracle.
struct SampleRow {
  double t;
  double v_pu;     // oscillator voltage magnitude (RMS / V0)
  double delta;    // rad, unwrapped
  double i_pu;     // output current magnitude
  double vpoc_pu;  // PoC voltage magnitude
  int x_f;
  double x_r;
  double p_pu;
  double q_pu;
};

struct FsmEvent {
  double t;
  std::string name;
};

enum class RunStatus { Completed, Collapse, IntegrationFailure };

std::string to_string(RunStatus s);

struct SimulationResult {
  std::vector<SampleRow> rows;
  std::vector<FsmEvent> events;
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;

  /// Last sample at or before t (the pre-switch sample when t is a switching instant).
  [[nodiscard]] const SampleRow& sample_before(double t) const;
};

}  // namespace uvoc
