#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uvoc::solver {

using State = std::vector<double>;
using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorConfig {
  double rtol = 1e-7;
  double atol = 1e-9;
  double h_init = 1e-4;
  double h_min = 1e-14;
  double h_max = 1e-2;
  std::size_t max_steps = 2'000'000;
  bool adaptive = true;     // false: fixed steps of h_init
  bool store_dense = true;  // keep interpolation data for dense_eval
  double event_tol = 1e-12; // bracket width for event localization (s)

  void validate() const;
};

enum class Direction { Rising, Falling, Any };
enum class EventAction { Stop, Record, ModeSwitch };

struct EventSpec {
  std::string name;
  std::function<double(double, std::span<const double>)> fn;
  Direction direction = Direction::Any;
  EventAction action = EventAction::Record;
  /// Called for ModeSwitch events at the localized time; may modify the state and
  /// any external mode data captured by the rhs.
  std::function<void(double, State&)> on_trigger;
};

struct EventRecord {
  std::size_t index;
  std::string name;
  double t;
  State y;
};

/// One accepted step with its continuous extension.
struct DenseSegment {
  double t0;
  double h;
  std::array<State, 5> coeffs;
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double h_min_used = 0.0;
  double h_max_used = 0.0;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<State> y;
  std::vector<DenseSegment> segments;
  std::vector<EventRecord> events;
  std::optional<std::size_t> stopped_by;
  IntegratorStats stats;

  [[nodiscard]] double t_begin() const { return t.front(); }
  [[nodiscard]] double t_end() const { return t.back(); }
  [[nodiscard]] const State& back() const { return y.back(); }
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t, State y)
      : std::runtime_error(what), t_(t), y_(std::move(y)) {}
  [[nodiscard]] double t() const { return t_; }
  [[nodiscard]] const State& last_state() const { return y_; }

 private:
  double t_;
  State y_;
};

/// Step size fell below h_min: the problem is stiff or singular near the last state.
class StepUnderflow : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class StepBudgetExceeded : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// Dormand-Prince 5(4) with PI step control, FSAL, continuous extension and
/// event localization by bisection on the interpolant.
Trajectory integrate(const Rhs& rhs, State y0, double t0, double t1, const IntegratorConfig& config,
                     std::span<const EventSpec> events = {});

/// Interpolated state; throws std::out_of_range outside the trajectory span.
State dense_eval(const Trajectory& traj, double t);

}  // namespace uvoc::solver
