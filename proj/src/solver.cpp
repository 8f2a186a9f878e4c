#include "uvoc/solver.hpp"

#include <algorithm>
#include <cmath>

namespace uvoc::solver {

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("rtol and atol must be positive");
  if (!(h_min > 0.0) || !(h_min <= h_max)) throw std::invalid_argument("require 0 < h_min <= h_max");
  if (!(h_init > 0.0)) throw std::invalid_argument("h_init must be positive");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, DOPRI5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

State interpolate(const DenseSegment& s, double t) {
  const double theta = (t - s.t0) / s.h;
  const double theta1 = 1.0 - theta;
  const auto& r = s.coeffs;
  State out(r[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
  }
  return out;
}

bool crossed(double g_prev, double g_new, Direction dir) {
  const bool rising = g_prev < 0.0 && g_new >= 0.0;
  const bool falling = g_prev > 0.0 && g_new <= 0.0;
  switch (dir) {
    case Direction::Rising: return rising;
    case Direction::Falling: return falling;
    case Direction::Any: return rising || falling;
  }
  return false;
}

// Shrinks [ta, tb] around the crossing and returns the right end (post-crossing side).
double localize(const EventSpec& ev, const DenseSegment& seg, double ta, double tb, double g_a, double tol) {
  for (int iter = 0; iter < 200 && tb - ta > tol; ++iter) {
    const double tm = 0.5 * (ta + tb);
    if (tm <= ta || tm >= tb) break;
    const double gm = ev.fn(tm, interpolate(seg, tm));
    if (crossed(g_a, gm, ev.direction)) {
      tb = tm;
    } else {
      ta = tm;
      g_a = gm;
    }
  }
  return tb;
}

double weighted_rms(std::span<const double> err, std::span<const double> y0, std::span<const double> y1,
                    const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    acc += (err[i] / sc) * (err[i] / sc);
  }
  return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(err.size(), 1)));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Trajectory integrate(const Rhs& rhs, State y0, double t0, double t1, const IntegratorConfig& cfg,
                     std::span<const EventSpec> events) {
  cfg.validate();
  if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");

  const std::size_t n = y0.size();
  Trajectory traj;
  traj.t.push_back(t0);
  traj.y.push_back(y0);

  std::array<State, 7> k;
  for (auto& ki : k) ki.assign(n, 0.0);
  State ytmp(n), ynew(n), err(n);

  auto eval = [&](double t, const State& y, State& dydt) {
    rhs(t, y, dydt);
    ++traj.stats.rhs_evals;
  };

  double t = t0;
  State y = std::move(y0);
  eval(t, y, k[0]);

  std::vector<double> g_prev(events.size());
  auto reset_events = [&] {
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].fn(t, y);
  };
  reset_events();

  double h = std::min(cfg.h_init, cfg.h_max);
  double err_old = 1e-4;
  bool last_rejected = false;
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double fac_min = 0.2, fac_max = 10.0;

  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > cfg.max_steps) {
      throw StepBudgetExceeded("integration exceeded max_steps at t=" + std::to_string(t), t, y);
    }
    bool final_step = false;
    if (t + h >= t1 || (cfg.adaptive && t + 1.01 * h >= t1)) {
      h = t1 - t;
      final_step = true;
    }

    auto stage = [&](State& out, std::initializer_list<std::pair<double, int>> terms) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = y[i];
        for (auto [a, j] : terms) acc += h * a * k[j][i];
        out[i] = acc;
      }
    };
    stage(ytmp, {{a21, 0}});
    eval(t + c2 * h, ytmp, k[1]);
    stage(ytmp, {{a31, 0}, {a32, 1}});
    eval(t + c3 * h, ytmp, k[2]);
    stage(ytmp, {{a41, 0}, {a42, 1}, {a43, 2}});
    eval(t + c4 * h, ytmp, k[3]);
    stage(ytmp, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
    eval(t + c5 * h, ytmp, k[4]);
    stage(ytmp, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
    eval(t + h, ytmp, k[5]);
    stage(ynew, {{a71, 0}, {a73, 2}, {a74, 3}, {a75, 4}, {a76, 5}});
    eval(t + h, ynew, k[6]);

    for (std::size_t i = 0; i < n; ++i) {
      err[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
    }
    const bool finite = all_finite(ynew) && all_finite(k[6]);
    const double err_norm = finite ? weighted_rms(err, y, ynew, cfg) : INFINITY;

    if (cfg.adaptive && err_norm > 1.0) {
      ++traj.stats.rejected;
      const double fac = finite ? std::max(fac_min, safe * std::pow(err_norm, -expo1)) : fac_min;
      h *= std::min(1.0, fac);
      last_rejected = true;
      if (h < cfg.h_min) {
        throw StepUnderflow("step size underflow at t=" + std::to_string(t) + " (stiff or singular)", t, y);
      }
      continue;
    }
    if (!finite) throw StepUnderflow("non-finite state at t=" + std::to_string(t), t, y);

    // Accepted step: build the continuous extension.
    DenseSegment seg;
    seg.t0 = t;
    seg.h = h;
    for (auto& c : seg.coeffs) c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dy = ynew[i] - y[i];
      const double bspl = h * k[0][i] - dy;
      seg.coeffs[0][i] = y[i];
      seg.coeffs[1][i] = dy;
      seg.coeffs[2][i] = bspl;
      seg.coeffs[3][i] = dy - h * k[6][i] - bspl;
      seg.coeffs[4][i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] +
                              d7 * k[6][i]);
    }
    const double t_new = final_step ? t1 : t + h;

    // Event detection over (t, t_new].
    std::optional<std::size_t> terminal;
    double t_terminal = t_new;
    struct Hit {
      double t;
      std::size_t idx;
    };
    std::vector<Hit> hits;
    std::vector<double> g_new(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) {
      g_new[e] = events[e].fn(t_new, ynew);
      if (crossed(g_prev[e], g_new[e], events[e].direction)) {
        const double te = localize(events[e], seg, t, t_new, g_prev[e], cfg.event_tol);
        hits.push_back({te, e});
      }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
      return a.t < b.t || (a.t == b.t && a.idx < b.idx);
    });
    for (const auto& hit : hits) {
      if (events[hit.idx].action != EventAction::Record) {
        terminal = hit.idx;
        t_terminal = hit.t;
        break;
      }
    }
    for (const auto& hit : hits) {
      if (terminal && hit.t > t_terminal) break;
      if (terminal && hit.t == t_terminal && hit.idx != *terminal &&
          events[hit.idx].action != EventAction::Record) {
        continue;
      }
      traj.events.push_back({hit.idx, events[hit.idx].name, hit.t, interpolate(seg, hit.t)});
    }

    ++traj.stats.accepted;
    traj.stats.h_max_used = std::max(traj.stats.h_max_used, h);
    traj.stats.h_min_used = traj.stats.accepted == 1 ? h : std::min(traj.stats.h_min_used, h);

    if (cfg.store_dense) traj.segments.push_back(seg);

    if (terminal) {
      State y_event = (t_terminal == t_new) ? ynew : interpolate(seg, t_terminal);
      traj.t.push_back(t_terminal);
      traj.y.push_back(y_event);
      const auto& ev = events[*terminal];
      if (ev.action == EventAction::Stop) {
        traj.stopped_by = *terminal;
        return traj;
      }
      if (ev.on_trigger) ev.on_trigger(t_terminal, y_event);
      t = t_terminal;
      y = std::move(y_event);
      traj.t.push_back(t);
      traj.y.push_back(y);
      eval(t, y, k[0]);
      reset_events();
      err_old = 1e-4;
      last_rejected = false;
      if (!cfg.adaptive) h = cfg.h_init;
      continue;
    }

    t = t_new;
    y = ynew;
    std::swap(k[0], k[6]);
    g_prev = g_new;
    traj.t.push_back(t);
    traj.y.push_back(y);

    if (cfg.adaptive) {
      const double en = std::max(err_norm, 1e-10);
      double fac = std::pow(en, expo1) / std::pow(err_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_next = h / fac;
      if (last_rejected) h_next = std::min(h_next, h);
      err_old = std::max(err_norm, 1e-4);
      last_rejected = false;
      h = std::min(h_next, cfg.h_max);
      if (h < cfg.h_min) {
        throw StepUnderflow("step size underflow at t=" + std::to_string(t) + " (stiff or singular)", t, y);
      }
    } else {
      h = cfg.h_init;
    }
  }
  return traj;
}

State dense_eval(const Trajectory& traj, double t) {
  if (traj.segments.empty()) throw std::out_of_range("dense_eval: trajectory has no dense output");
  if (t < traj.t_begin() || t > traj.t_end()) {
    throw std::out_of_range("dense_eval: t=" + std::to_string(t) + " outside [" + std::to_string(traj.t_begin()) +
                            ", " + std::to_string(traj.t_end()) + "]");
  }
  // Last segment starting at or before t; at a mode switch this picks the post-switch branch.
  auto it = std::upper_bound(traj.segments.begin(), traj.segments.end(), t,
                             [](double tv, const DenseSegment& s) { return tv < s.t0; });
  if (it != traj.segments.begin()) --it;
  const auto& seg = *it;
  if (t == seg.t0) return seg.coeffs[0];
  if (t == seg.t0 + seg.h) {
    State y1(seg.coeffs[0].size());
    for (std::size_t i = 0; i < y1.size(); ++i) y1[i] = seg.coeffs[0][i] + seg.coeffs[1][i];
    // Prefer the stored grid value when t is a trajectory node.
    auto node = std::lower_bound(traj.t.begin(), traj.t.end(), t);
    if (node != traj.t.end() && *node == t) return traj.y[static_cast<std::size_t>(node - traj.t.begin())];
    return y1;
  }
  return interpolate(seg, t);
}

}  // namespace uvoc::solver
