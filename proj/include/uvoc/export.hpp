#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "uvoc/analysis.hpp"
#include "uvoc/samples.hpp"

namespace uvoc::io {

using Json = nlohmann::ordered_json;

/// 17 significant digits, locale independent.
std::string fmt(double x);

/// Pretty JSON with every floating-point number printed by fmt(); non-finite numbers become null.
std::string dump_json(const Json& j);

/// Writes text, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& content);

/// Columns: t, v_pu, delta, i_pu, vpoc_pu, x_f, x_r, p_pu, q_pu.
std::string trajectory_csv(const SimulationResult& r);

/// Columns: delta, v, ddelta_norm, dv_norm, valid.
std::string surface_csv(const SurfaceGrid& g);

/// Records {delta, v, kind, eigs, saddle, residual, probe_agrees}.
Json equilibria_json(const EquilibriumSearch& s);

/// Orbit samples: t, delta (wrapped), v (pu), followed by any extra state columns.
std::string orbit_csv(const CycleResult& c, std::size_t delta_index, std::size_t v_index, double v_scale);

/// {status, period_s, convergence_ratio, periods_s}.
Json cycle_json(const CycleResult& c);

Json sweep_json(const SweepReport& r, const SweepConfig& cfg);

Json events_json(const SimulationResult& r);

std::string trajectory_plot_script(const std::string& csv);
std::string surface_plot_script(const std::string& csv, const std::string& title);
std::string orbit_plot_script(const std::string& csv);

}  // namespace uvoc::io
