#include "uvoc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace uvoc {

std::size_t worker_count() {
  if (const char* env = std::getenv("UVOC_TSA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

PlanarField planar_field(const ReducedSystem& sys) {
  ReducedSystem qs = sys;
  qs.current_model = CurrentModel::QuasiStatic;
  const double v0 = sys.params.v0;
  return [qs, v0](double delta, double v_pu) {
    const std::array<double, 2> y{v_pu * v0, delta};
    std::array<double, 2> dy{};
    qs.rhs(y, dy);
    return std::array<double, 2>{dy[reduced::kDelta], dy[reduced::kV] / v0};
  };
}

Domain parse_domain(const std::string& text) {
  std::stringstream ss(text);
  std::array<double, 4> v{};
  std::string tok;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!std::getline(ss, tok, ',')) throw std::invalid_argument("domain needs dmin,dmax,vmin,vmax");
    std::size_t used = 0;
    v[k] = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument("bad number in domain: " + tok);
  }
  if (std::getline(ss, tok, ',')) throw std::invalid_argument("domain has more than four values");
  Domain d{v[0], v[1], v[2], v[3]};
  if (!(d.delta_min < d.delta_max) || !(d.v_min < d.v_max) || !(d.v_min > 0.0)) {
    throw std::invalid_argument("domain must satisfy dmin < dmax and 0 < vmin < vmax");
  }
  return d;
}

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

}  // namespace

SurfaceGrid sample_surfaces(const PlanarField& field, const Domain& domain, std::size_t resolution) {
  return sample_surfaces(field, domain, resolution, resolution);
}

SurfaceGrid sample_surfaces(const PlanarField& field, const Domain& domain, std::size_t nd, std::size_t nv) {
  if (nd < 16 || nv < 16) throw std::invalid_argument("surface resolution must be at least 16 per axis");
  SurfaceGrid g;
  g.delta_axis = linspace(domain.delta_min, domain.delta_max, nd);
  g.v_axis = linspace(domain.v_min, domain.v_max, nv);
  g.ddelta.assign(nd * nv, 0.0);
  g.dv.assign(nd * nv, 0.0);
  g.valid.assign(nd * nv, 0);

  parallel_for(nv, [&](std::size_t j) {
    for (std::size_t i = 0; i < nd; ++i) {
      const std::size_t k = g.index(i, j);
      try {
        const auto f = field(g.delta_axis[i], g.v_axis[j]);
        if (std::isfinite(f[0]) && std::isfinite(f[1])) {
          g.ddelta[k] = f[0];
          g.dv[k] = f[1];
          g.valid[k] = 1;
        }
      } catch (const DegenerateVoltage&) {
      }
    }
  });

  for (std::size_t k = 0; k < g.valid.size(); ++k) {
    if (!g.valid[k]) continue;
    g.norm_ddelta = std::max(g.norm_ddelta, std::abs(g.ddelta[k]));
    g.norm_dv = std::max(g.norm_dv, std::abs(g.dv[k]));
  }
  for (std::size_t k = 0; k < g.valid.size(); ++k) {
    if (!g.valid[k]) continue;
    if (g.norm_ddelta > 0.0) g.ddelta[k] /= g.norm_ddelta;
    if (g.norm_dv > 0.0) g.dv[k] /= g.norm_dv;
  }
  return g;
}

std::string to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::Stable: return "Stable";
    case EquilibriumKind::Unstable: return "Unstable";
    case EquilibriumKind::CenterMarginal: return "CenterMarginal";
  }
  return "?";
}

std::array<std::array<double, 2>, 2> jacobian(const PlanarField& field, double delta, double v_pu, double h_delta,
                                              double h_v) {
  const auto fdp = field(delta + h_delta, v_pu);
  const auto fdm = field(delta - h_delta, v_pu);
  const auto fvp = field(delta, v_pu + h_v);
  const auto fvm = field(delta, v_pu - h_v);
  std::array<std::array<double, 2>, 2> j{};
  for (int r = 0; r < 2; ++r) {
    j[r][0] = (fdp[r] - fdm[r]) / (2.0 * h_delta);
    j[r][1] = (fvp[r] - fvm[r]) / (2.0 * h_v);
  }
  return j;
}

std::array<std::complex<double>, 2> eigenvalues(const std::array<std::array<double, 2>, 2>& j) {
  const double tr = j[0][0] + j[1][1];
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det, 0.0));
  std::array<std::complex<double>, 2> e{tr / 2.0 + disc, tr / 2.0 - disc};
  std::sort(e.begin(), e.end(), [](auto a, auto b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
  return e;
}

EquilibriumKind classify_eigs(const std::array<std::complex<double>, 2>& eigs, double marginal_tol) {
  bool marginal = false;
  for (const auto& e : eigs) {
    if (e.real() > marginal_tol) return EquilibriumKind::Unstable;
    if (std::abs(e.real()) <= marginal_tol) marginal = true;
  }
  return marginal ? EquilibriumKind::CenterMarginal : EquilibriumKind::Stable;
}

std::optional<std::array<double, 2>> refine_equilibrium(const PlanarField& field, std::array<double, 2> x,
                                                        const Domain& domain, double s0, double s1,
                                                        const NewtonConfig& cfg) {
  const double hd = cfg.fd_step * (domain.delta_max - domain.delta_min);
  const double hv = cfg.fd_step * (domain.v_max - domain.v_min);
  if (!(s0 > 0.0)) s0 = 1.0;
  if (!(s1 > 0.0)) s1 = 1.0;
  auto resid = [&](const std::array<double, 2>& p) {
    const auto f = field(p[0], p[1]);
    return std::array<double, 2>{f[0] / s0, f[1] / s1};
  };
  try {
    auto f = resid(x);
    double norm = std::hypot(f[0], f[1]);
    for (int it = 0; it < cfg.max_iter && norm > cfg.tol; ++it) {
      const auto j = jacobian(field, x[0], x[1], hd, hv);
      const double a = j[0][0] / s0, b = j[0][1] / s0, c = j[1][0] / s1, d = j[1][1] / s1;
      const double det = a * d - b * c;
      if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
      const std::array<double, 2> step{(d * f[0] - b * f[1]) / det, (a * f[1] - c * f[0]) / det};
      double lambda = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls) {
        std::array<double, 2> trial{x[0] - lambda * step[0], x[1] - lambda * step[1]};
        try {
          const auto ft = resid(trial);
          const double nt = std::hypot(ft[0], ft[1]);
          if (std::isfinite(nt) && nt < norm) {
            x = trial;
            f = ft;
            norm = nt;
            improved = true;
            break;
          }
        } catch (const DegenerateVoltage&) {
        }
        lambda *= 0.5;
      }
      if (!improved) break;
    }
    if (norm < 1e-8) return x;
  } catch (const DegenerateVoltage&) {
  }
  return std::nullopt;
}

bool perturbation_probe(const PlanarField& field, const Equilibrium& eq, double horizon) {
  constexpr double d0 = 1e-3;
  const solver::Rhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    const auto f = field(y[0], y[1]);
    dy[0] = f[0];
    dy[1] = f[1];
  };
  solver::IntegratorConfig cfg;
  cfg.store_dense = false;
  cfg.rtol = 1e-9;
  cfg.atol = 1e-12;
  const std::array<std::array<double, 2>, 4> offsets{{{d0, 0.0}, {-d0, 0.0}, {0.0, d0}, {0.0, -d0}}};
  for (const auto& o : offsets) {
    try {
      const auto traj = solver::integrate(rhs, {eq.delta + o[0], eq.v_pu + o[1]}, 0.0, horizon, cfg);
      const auto& y = traj.back();
      if (!(std::hypot(wrap_angle(y[0] - eq.delta), y[1] - eq.v_pu) < d0)) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

void classify_stability(Equilibrium& eq, const PlanarField& field, const Domain& domain) {
  const NewtonConfig cfg;
  const auto j = jacobian(field, eq.delta, eq.v_pu, cfg.fd_step * (domain.delta_max - domain.delta_min),
                          cfg.fd_step * (domain.v_max - domain.v_min));
  eq.eigs = eigenvalues(j);
  eq.kind = classify_eigs(eq.eigs);
  eq.saddle = eq.eigs[0].imag() == 0.0 && eq.eigs[0].real() < 0.0 && eq.eigs[1].real() > 0.0;
  if (eq.kind == EquilibriumKind::CenterMarginal) {
    eq.probe_agrees.reset();
  } else {
    eq.probe_agrees = perturbation_probe(field, eq) == (eq.kind == EquilibriumKind::Stable);
  }
}

EquilibriumSearch find_equilibria(const SurfaceGrid& s, const PlanarField& field, const Domain& domain,
                                  const NewtonConfig& cfg) {
  EquilibriumSearch out;
  if (s.nd() < 2 || s.nv() < 2) return out;
  auto brackets = [](double a, double b, double c, double d) {
    const double lo = std::min({a, b, c, d});
    const double hi = std::max({a, b, c, d});
    return lo <= 0.0 && hi >= 0.0;
  };

  std::vector<std::array<double, 2>> seeds;
  for (std::size_t j = 0; j + 1 < s.nv(); ++j) {
    for (std::size_t i = 0; i + 1 < s.nd(); ++i) {
      const std::array<std::size_t, 4> k{s.index(i, j), s.index(i + 1, j), s.index(i, j + 1), s.index(i + 1, j + 1)};
      if (!(s.valid[k[0]] && s.valid[k[1]] && s.valid[k[2]] && s.valid[k[3]])) continue;
      if (!brackets(s.ddelta[k[0]], s.ddelta[k[1]], s.ddelta[k[2]], s.ddelta[k[3]])) continue;
      if (!brackets(s.dv[k[0]], s.dv[k[1]], s.dv[k[2]], s.dv[k[3]])) continue;
      seeds.push_back({0.5 * (s.delta_axis[i] + s.delta_axis[i + 1]), 0.5 * (s.v_axis[j] + s.v_axis[j + 1])});
    }
  }

  std::vector<std::optional<std::array<double, 2>>> roots(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t k) {
    roots[k] = refine_equilibrium(field, seeds[k], domain, s.norm_ddelta, s.norm_dv, cfg);
  });

  const double cell_d = (domain.delta_max - domain.delta_min) / static_cast<double>(s.nd() - 1);
  const double cell_v = (domain.v_max - domain.v_min) / static_cast<double>(s.nv() - 1);
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    std::ostringstream seed;
    seed.precision(17);
    seed << "(" << seeds[k][0] << ", " << seeds[k][1] << ")";
    if (!roots[k]) {
      out.diagnostics.push_back("newton did not converge from seed " + seed.str());
      continue;
    }
    auto r = *roots[k];
    r[0] = wrap_angle(r[0]);
    if (r[1] < domain.v_min - cell_v || r[1] > domain.v_max + cell_v || r[0] < domain.delta_min - cell_d ||
        r[0] > domain.delta_max + cell_d) {
      out.diagnostics.push_back("root outside domain from seed " + seed.str());
      continue;
    }
    const bool dup = std::any_of(out.equilibria.begin(), out.equilibria.end(), [&](const Equilibrium& e) {
      return std::abs(wrap_angle(e.delta - r[0])) < cfg.merge_tol && std::abs(e.v_pu - r[1]) < cfg.merge_tol;
    });
    if (dup) continue;
    Equilibrium eq;
    eq.delta = r[0];
    eq.v_pu = r[1];
    const auto f = field(r[0], r[1]);
    const double s0 = s.norm_ddelta > 0.0 ? s.norm_ddelta : 1.0;
    const double s1 = s.norm_dv > 0.0 ? s.norm_dv : 1.0;
    eq.residual = std::hypot(f[0] / s0, f[1] / s1);
    out.equilibria.push_back(eq);
  }

  parallel_for(out.equilibria.size(), [&](std::size_t k) { classify_stability(out.equilibria[k], field, domain); });
  std::sort(out.equilibria.begin(), out.equilibria.end(), [](const Equilibrium& a, const Equilibrium& b) {
    return a.delta < b.delta || (a.delta == b.delta && a.v_pu < b.v_pu);
  });
  return out;
}

std::string to_string(CycleStatus s) {
  switch (s) {
    case CycleStatus::Cycle: return "cycle";
    case CycleStatus::Equilibrium: return "equilibrium";
    case CycleStatus::Collapse: return "collapse";
    case CycleStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::function<double(double, std::span<const double>)> winding_section(double delta_ref, std::size_t index) {
  return [delta_ref, index](double, std::span<const double> y) { return std::sin(0.5 * (y[index] - delta_ref)); };
}

solver::State CycleResult::state_at(double tau) const { return solver::dense_eval(trajectory, t_start + tau); }

CycleResult detect_limit_cycle(const solver::Rhs& rhs, solver::State y0, const CycleConfig& cfg) {
  if (!cfg.section) throw std::invalid_argument("detect_limit_cycle needs a section function");
  CycleResult out;
  std::vector<solver::EventSpec> events;
  events.push_back({"section", cfg.section, cfg.direction, solver::EventAction::Record, {}});
  if (cfg.collapse) events.push_back({"collapse", cfg.collapse, solver::Direction::Falling, solver::EventAction::Stop, {}});
  auto icfg = cfg.integrator;
  icfg.store_dense = true;
  try {
    out.trajectory = solver::integrate(rhs, std::move(y0), 0.0, cfg.t_max, icfg, events);
  } catch (const DegenerateVoltage& e) {
    out.status = CycleStatus::Collapse;
    out.diagnostic = e.what();
    return out;
  } catch (const solver::IntegrationError& e) {
    out.status = CycleStatus::Inconclusive;
    out.diagnostic = e.what();
    return out;
  }
  if (out.trajectory.stopped_by) {
    out.status = CycleStatus::Collapse;
    out.diagnostic = "voltage collapse at t=" + std::to_string(out.trajectory.t_end());
    return out;
  }

  std::vector<double> tc;
  std::vector<double> rc;
  for (const auto& ev : out.trajectory.events) {
    if (ev.index != 0) continue;
    tc.push_back(ev.t);
    rc.push_back(ev.y[cfg.return_index]);
  }
  for (std::size_t k = 1; k < tc.size(); ++k) out.periods.push_back(tc[k] - tc[k - 1]);

  // Period k spans [tc[k], tc[k+1]]; window ends at the latest period satisfying the checks.
  const std::size_t need = std::max<std::size_t>(cfg.agreeing_periods, 2);
  std::optional<std::size_t> last;
  double ratio = 0.0;
  for (std::size_t end = need - 1; end < out.periods.size(); ++end) {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = end + 1 - need; k <= end; ++k) {
      if (std::abs(rc[k + 1] - rc[k]) / cfg.return_scale >= cfg.return_tol) ok = false;
      if (k > end + 1 - need) {
        const double rel = std::abs(out.periods[k] - out.periods[k - 1]) / out.periods[k];
        worst = std::max(worst, rel);
        if (rel >= cfg.period_rtol) ok = false;
      }
    }
    if (ok) {
      last = end;
      ratio = worst;
    }
  }

  if (!last) {
    const bool rest = cfg.at_rest && cfg.at_rest(out.trajectory.back());
    out.status = rest ? CycleStatus::Equilibrium : CycleStatus::Inconclusive;
    out.diagnostic = rest ? "trajectory settled at an equilibrium" : "no periodicity within the time budget";
    return out;
  }

  out.status = CycleStatus::Cycle;
  out.period = out.periods[*last];
  out.convergence_ratio = ratio;
  out.t_start = tc[*last];
  const std::size_t ns = std::max<std::size_t>(cfg.orbit_samples, 2);
  for (std::size_t k = 0; k < ns; ++k) {
    const double tau = out.period * static_cast<double>(k) / static_cast<double>(ns - 1);
    out.orbit_t.push_back(tau);
    out.orbit_y.push_back(out.state_at(tau));
  }
  return out;
}

double phase_distance(std::span<const double> y, double target_delta, double target_v_pu, const SweepConfig& cfg) {
  return std::hypot(wrap_angle(y[cfg.delta_index] - target_delta), y[cfg.v_index] / cfg.v_scale - target_v_pu);
}

SweepReport clearing_sweep(const CycleResult& cycle, const solver::Rhs& post_fault, double target_delta,
                           double target_v_pu, std::size_t m, const SweepConfig& cfg) {
  if (m < 4) throw std::invalid_argument("clearing_sweep needs at least 4 points");
  if (cycle.status != CycleStatus::Cycle) throw std::invalid_argument("clearing_sweep needs a detected cycle");
  SweepReport rep;
  rep.target_delta = target_delta;
  rep.target_v_pu = target_v_pu;
  rep.points.resize(m);
  auto icfg = cfg.integrator;
  icfg.store_dense = false;
  for (std::size_t k = 0; k < m; ++k) {
    rep.points[k].tau = cycle.period * static_cast<double>(k) / static_cast<double>(m);
    rep.points[k].start = cycle.state_at(rep.points[k].tau);
  }
  parallel_for(m, [&](std::size_t k) {
    auto& pt = rep.points[k];
    try {
      const auto traj = solver::integrate(post_fault, pt.start, 0.0, cfg.horizon, icfg);
      pt.final_distance = phase_distance(traj.back(), target_delta, target_v_pu, cfg);
      pt.converged = pt.final_distance < cfg.tol;
    } catch (const std::exception&) {
      pt.final_distance = INFINITY;
      pt.converged = false;
    }
  });
  rep.converged = static_cast<std::size_t>(
      std::count_if(rep.points.begin(), rep.points.end(), [](const SweepPoint& p) { return p.converged; }));
  return rep;
}

}  // namespace uvoc
