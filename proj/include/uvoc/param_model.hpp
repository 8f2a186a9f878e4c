#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace uvoc {

/// Converter ratings and filter elements. Inductances and resistances are per-unit
/// on the P_rated / V0 base.
struct ConverterParams {
  double s_rated = 9000.0;
  double p_rated = 7500.0;
  double v0 = 120.0;
  double omega0 = 2.0 * std::numbers::pi * 60.0;
  int n_phases = 3;
  double l1 = 0.02;  // two 0.04 pu interleaved legs in parallel
  double l2 = 0.005;
  double r1 = 0.005;
  double r2 = 0.005;

  [[nodiscard]] double v0_peak() const { return std::numbers::sqrt2 * v0; }
};

/// Oscillator gains, active/virtual impedances and fault-management thresholds.
struct ControlParams {
  double eta0 = 19.95;
  double mu0 = 7.1e-4;
  double tau_f = 0.11;
  double r0 = 0.43;      // pu
  double lv0 = 0.29;     // pu reactance at omega0
  double rv0 = 0.04;     // pu
  double omega_b = 2.0 * std::numbers::pi * 600.0;
  double i_m = 1.2;      // pu RMS
  double i_thresh = 1.2; // pu RMS
  double v_thresh = 0.9; // pu RMS
  double t_ramp = 0.05;  // s
  bool q0_boost = true;
};

/// Thevenin equivalent seen from the point of coupling (per-unit magnitudes).
struct GridThevenin {
  double v_th = 1.0;
  double omega_g = 2.0 * std::numbers::pi * 60.0;
  double z_th_mag = 0.52;
  double x_over_r = 20.0;
};

struct PerUnitBase {
  double s_base;
  double v_base;
  double z_base;
  double i_base;

  static PerUnitBase from(const ConverterParams& c);
};

enum class Quantity { Voltage, Current, Impedance, Power };

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& msg);
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& msg);
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Optional fault-scenario section of a config document. Unset optionals fall
/// back to the built-in scenario named by `base`.
struct ScenarioSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;  // raw key/value, resolved by the scenario layer
};

struct ParamSet {
  ConverterParams converter;
  ControlParams control;
  GridThevenin grid;
  ScenarioSection scenario;
  std::vector<std::string> warnings;
};

/// Parses the INI-style document: sections [converter], [control], [grid],
/// [scenario]; `#` or `;` start comments. Missing keys keep the rated defaults.
ParamSet load_params(std::string_view document);
ParamSet load_params_file(const std::string& path);

/// Throws ValidationError naming the offending field. Returns warnings.
std::vector<std::string> validate(const ConverterParams& c, const ControlParams& k, const GridThevenin& g);

double pu_to_si(double value, Quantity kind, const PerUnitBase& base);
double si_to_pu(double value, Quantity kind, const PerUnitBase& base);

struct TheveninSplit {
  double r_th;
  double x_th;
};

TheveninSplit thevenin_split(const GridThevenin& grid);

inline double short_circuit_ratio(const GridThevenin& grid) { return 1.0 / grid.z_th_mag; }

/// Everything the dynamic models need, in SI. Voltages and currents are RMS.
struct SiParams {
  int n;
  double v0;
  double omega0;
  double p_rated;
  double s_rated;
  double eta0;
  double mu0;
  double tau_f;
  double r0;       // ohm
  double rv0;      // ohm
  double lv0;      // H
  double omega_b;
  double i_m;      // A RMS
  double i_thresh; // A RMS
  double v_thresh; // V RMS
  double t_ramp;
  bool q0_boost;
  double l12;      // H, L1 + L2
  double r12;      // ohm, R1 + R2
  PerUnitBase base;
};

SiParams resolve(const ConverterParams& c, const ControlParams& k);

/// Thevenin source in SI (RMS volts, ohms, henries).
struct GridSi {
  double v_th;
  double omega_g;
  double r_th;
  double l_th;
};

GridSi resolve(const GridThevenin& g, const PerUnitBase& base);

/// Human-readable dump used by `params print`.
std::string describe(const ParamSet& params);

}  // namespace uvoc
