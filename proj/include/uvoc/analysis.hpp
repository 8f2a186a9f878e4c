#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "uvoc/reduced_model.hpp"
#include "uvoc/solver.hpp"

namespace uvoc {

/// Worker count for data-parallel loops: UVOC_TSA_THREADS if set, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads. Each index must write
/// only its own output slot.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Planar vector field in phase-plane coordinates: (delta rad, V pu) -> (ddelta/dt rad/s, dV/dt pu/s).
using PlanarField = std::function<std::array<double, 2>(double delta, double v_pu)>;

/// 2-state quasi-static field of a reduced system.
PlanarField planar_field(const ReducedSystem& sys);

struct Domain {
  double delta_min = -std::numbers::pi;
  double delta_max = std::numbers::pi;
  double v_min = 0.05;  // pu
  double v_max = 1.3;   // pu
};

/// Parses "dmin,dmax,vmin,vmax".
Domain parse_domain(const std::string& text);

struct SurfaceGrid {
  std::vector<double> delta_axis;
  std::vector<double> v_axis;
  std::vector<double> ddelta;  // normalized, index j * nd + i (j over V, i over delta)
  std::vector<double> dv;
  std::vector<std::uint8_t> valid;
  double norm_ddelta = 0.0;  // rad/s
  double norm_dv = 0.0;      // pu/s

  [[nodiscard]] std::size_t nd() const { return delta_axis.size(); }
  [[nodiscard]] std::size_t nv() const { return v_axis.size(); }
  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const { return j * nd() + i; }
};

/// Evaluates the field on an nd x nv grid and normalizes each surface by its absolute max.
/// Nodes below the voltage floor are marked invalid.
SurfaceGrid sample_surfaces(const PlanarField& field, const Domain& domain, std::size_t resolution);
SurfaceGrid sample_surfaces(const PlanarField& field, const Domain& domain, std::size_t nd, std::size_t nv);

enum class EquilibriumKind { Stable, Unstable, CenterMarginal };

std::string to_string(EquilibriumKind k);

struct Equilibrium {
  double delta;  // rad, wrapped to (-pi, pi]
  double v_pu;
  EquilibriumKind kind = EquilibriumKind::Stable;
  bool saddle = false;
  std::array<std::complex<double>, 2> eigs{};  // 1/s
  double residual = 0.0;                       // normalized units
  std::optional<bool> probe_agrees;
};

struct NewtonConfig {
  int max_iter = 50;
  double fd_step = 1e-6;     // fraction of the axis range
  double tol = 1e-12;        // on the normalized residual
  double merge_tol = 1e-6;
};

struct EquilibriumSearch {
  std::vector<Equilibrium> equilibria;
  std::vector<std::string> diagnostics;
};

/// Refines every sign-change cell with a damped 2-D Newton iteration and classifies the roots.
EquilibriumSearch find_equilibria(const SurfaceGrid& surface, const PlanarField& field, const Domain& domain,
                                  const NewtonConfig& cfg = {});

/// Newton refinement from a single guess; empty when it does not converge.
std::optional<std::array<double, 2>> refine_equilibrium(const PlanarField& field, std::array<double, 2> guess,
                                                        const Domain& domain, double scale_ddelta, double scale_dv,
                                                        const NewtonConfig& cfg = {});

/// Central finite-difference Jacobian of the field in (delta, V pu).
std::array<std::array<double, 2>, 2> jacobian(const PlanarField& field, double delta, double v_pu, double h_delta,
                                              double h_v);

std::array<std::complex<double>, 2> eigenvalues(const std::array<std::array<double, 2>, 2>& j);

/// Eigenvalue classification; `marginal_tol` bounds |Re| for Center-marginal.
EquilibriumKind classify_eigs(const std::array<std::complex<double>, 2>& eigs, double marginal_tol = 1e-6);

/// Perturbation probe: displace by +-1e-3 in each coordinate, integrate for `horizon` and
/// check that the displacement shrinks (stable) or that some probe escapes (unstable).
bool perturbation_probe(const PlanarField& field, const Equilibrium& eq, double horizon = 0.5);

/// Fills kind, saddle, eigs and probe agreement.
void classify_stability(Equilibrium& eq, const PlanarField& field, const Domain& domain);

enum class CycleStatus { Cycle, Equilibrium, Collapse, Inconclusive };

std::string to_string(CycleStatus s);

struct CycleConfig {
  solver::IntegratorConfig integrator{};
  double t_max = 20.0;
  /// Poincare section; zero crossings in `direction` are candidate returns.
  std::function<double(double, std::span<const double>)> section;
  solver::Direction direction = solver::Direction::Any;
  std::size_t return_index = 0;  // coordinate checked at successive returns
  double return_scale = 1.0;     // divides the return difference
  double return_tol = 1e-4;
  double period_rtol = 1e-3;
  std::size_t agreeing_periods = 3;
  /// Optional stop condition (collapse); triggers when it crosses zero falling.
  std::function<double(double, std::span<const double>)> collapse;
  /// Optional equilibrium test on the final state.
  std::function<bool(std::span<const double>)> at_rest;
  std::size_t orbit_samples = 256;
};

struct CycleResult {
  CycleStatus status = CycleStatus::Inconclusive;
  double period = 0.0;             // s
  double convergence_ratio = 0.0;  // max relative change over the agreeing periods
  double t_start = 0.0;            // section time opening the reported period
  std::vector<double> periods;
  std::vector<double> orbit_t;     // relative to t_start
  std::vector<solver::State> orbit_y;
  solver::Trajectory trajectory;   // kept for sampling states along the cycle
  std::string diagnostic;

  /// State on the reported orbit at t_start + tau (0 <= tau <= period).
  [[nodiscard]] solver::State state_at(double tau) const;
};

CycleResult detect_limit_cycle(const solver::Rhs& rhs, solver::State y0, const CycleConfig& cfg);

/// Winding section for reduced-model states: sin((delta - delta_ref)/2) vanishes each time
/// delta advances by 2 pi.
std::function<double(double, std::span<const double>)> winding_section(double delta_ref,
                                                                      std::size_t index = reduced::kDelta);

struct SweepPoint {
  double tau;                 // offset along the cycle (s)
  solver::State start;
  double final_distance = 0;  // (delta wrapped, V pu)
  bool converged = false;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::size_t converged = 0;
  double target_delta = 0.0;
  double target_v_pu = 0.0;
};

struct SweepConfig {
  solver::IntegratorConfig integrator{};
  double horizon = 5.0;  // s
  double tol = 1e-3;
  std::size_t delta_index = reduced::kDelta;
  std::size_t v_index = reduced::kV;
  double v_scale = 1.0;  // state units per pu
};

/// Distance in (wrapped delta, V pu) between a state and a target equilibrium.
double phase_distance(std::span<const double> y, double target_delta, double target_v_pu, const SweepConfig& cfg);

/// Integrates the post-fault field from m temporally uniform points of the cycle.
SweepReport clearing_sweep(const CycleResult& cycle, const solver::Rhs& post_fault, double target_delta,
                           double target_v_pu, std::size_t m, const SweepConfig& cfg);

double wrap_angle(double a);

}  // namespace uvoc
