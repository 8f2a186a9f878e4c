#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uvoc/alphabeta_oracle.hpp"
#include "uvoc/droop_model.hpp"
#include "uvoc/export.hpp"
#include "uvoc/run_scenario.hpp"

namespace fs = std::filesystem;
using namespace uvoc;

namespace {

struct Common {
  std::string config;
  std::string case_name = "case1";
  std::string out;
};

struct Loaded {
  ParamSet params;
  Scenario scenario;
};

Loaded load(const Common& c) {
  Loaded l;
  if (!c.config.empty()) l.params = load_params_file(c.config);
  for (const auto& w : l.params.warnings) std::cerr << "warning: " << w << "\n";
  std::string base = c.case_name;
  for (const auto& [k, v] : l.params.scenario.entries) {
    if (k == "base") base = v;
  }
  l.scenario = apply_overrides(builtin_scenario(base), l.params.scenario);
  return l;
}

CurrentModel parse_current_model(const std::string& s) {
  if (s == "dynamic") return CurrentModel::Dynamic;
  if (s == "quasi-static") return CurrentModel::QuasiStatic;
  throw CLI::ValidationError("--current-model", "expects dynamic or quasi-static");
}

OperatingMode parse_mode(const std::string& s, const Scenario& sc, Phase phase) {
  if (s.empty()) return default_mode(sc, phase);
  if (s == "unconstrained") return OperatingMode::Unconstrained;
  if (s == "constrained") return OperatingMode::Constrained;
  throw CLI::ValidationError("--model", "expects unconstrained or constrained");
}

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
  c.out = default_out;
  cmd->add_option("--config", c.config, "INI parameter/scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--case", c.case_name, "built-in case")
      ->check(CLI::IsMember(builtin_scenario_names()))
      ->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
}

void print_files(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uVOC grid-forming converter transient-stability toolkit"};
  app.require_subcommand(1);

  // params print
  auto* params_cmd = app.add_subcommand("params", "parameter utilities");
  params_cmd->require_subcommand(1);
  auto* print_cmd = params_cmd->add_subcommand("print", "dump resolved SI and per-unit parameters");
  std::string params_config;
  print_cmd->add_option("--config", params_config, "INI parameter file")->check(CLI::ExistingFile);

  // simulate
  Common sim_c;
  bool sim_oracle = false;
  std::size_t sim_res = 256;
  std::string sim_domain;
  auto* sim_cmd = app.add_subcommand("simulate", "run a scenario end to end");
  add_common(sim_cmd, sim_c, "out/simulate");
  sim_cmd->add_flag("--oracle", sim_oracle, "also run the alpha-beta oracle");
  sim_cmd->add_option("--resolution", sim_res, "surface grid points per axis")->check(CLI::Range(16, 4096));
  sim_cmd->add_option("--domain", sim_domain, "dmin,dmax,vmin,vmax");

  // surface / equilibria
  Common surf_c;
  std::string surf_phase = "pre", surf_model, surf_domain;
  std::size_t surf_res = 256;
  auto* surf_cmd = app.add_subcommand("surface", "sample normalized phase-plane surfaces");
  add_common(surf_cmd, surf_c, "out/surface");
  surf_cmd->add_option("--phase", surf_phase, "pre|fault")->check(CLI::IsMember({"pre", "fault"}));
  surf_cmd->add_option("--model", surf_model, "unconstrained|constrained")
      ->check(CLI::IsMember({"unconstrained", "constrained"}));
  surf_cmd->add_option("--resolution", surf_res, "grid points per axis")->check(CLI::Range(16, 4096));
  surf_cmd->add_option("--domain", surf_domain, "dmin,dmax,vmin,vmax");

  Common eq_c;
  std::string eq_phase = "pre", eq_model, eq_domain;
  std::size_t eq_res = 256;
  auto* eq_cmd = app.add_subcommand("equilibria", "find and classify equilibria");
  add_common(eq_cmd, eq_c, "out/equilibria");
  eq_cmd->add_option("--phase", eq_phase, "pre|fault")->check(CLI::IsMember({"pre", "fault"}));
  eq_cmd->add_option("--model", eq_model, "unconstrained|constrained")
      ->check(CLI::IsMember({"unconstrained", "constrained"}));
  eq_cmd->add_option("--resolution", eq_res, "grid points per axis")->check(CLI::Range(16, 4096));
  eq_cmd->add_option("--domain", eq_domain, "dmin,dmax,vmin,vmax");

  // limit-cycle
  Common lc_c;
  lc_c.case_name = "case3";
  std::string lc_cm = "dynamic";
  double lc_tmax = 20.0;
  auto* lc_cmd = app.add_subcommand("limit-cycle", "detect the fault-on limit cycle");
  add_common(lc_cmd, lc_c, "out/limit-cycle");
  lc_cmd->add_option("--current-model", lc_cm, "dynamic|quasi-static")->capture_default_str();
  lc_cmd->add_option("--t-max", lc_tmax, "integration budget (s)")->check(CLI::PositiveNumber);

  // sweep
  Common sw_c;
  sw_c.case_name = "case3";
  std::size_t sw_points = 12;
  std::string sw_cm = "dynamic";
  bool sw_droop = false;
  auto* sw_cmd = app.add_subcommand("sweep", "clearing-point sweep over the limit cycle");
  add_common(sw_cmd, sw_c, "out/sweep");
  sw_cmd->add_option("--points", sw_points, "clearing points")->check(CLI::Range(4, 100000));
  sw_cmd->add_option("--current-model", sw_cm, "dynamic|quasi-static")->capture_default_str();
  sw_cmd->add_flag("--droop", sw_droop, "run the second-order droop comparison instead");

  // oracle-diff
  Common od_c;
  auto* od_cmd = app.add_subcommand("oracle-diff", "compare the reduced model with the alpha-beta oracle");
  add_common(od_cmd, od_c, "out/oracle-diff");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*print_cmd) {
      ParamSet ps;
      if (!params_config.empty()) ps = load_params_file(params_config);
      for (const auto& w : ps.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << describe(ps);
      return 0;
    }

    if (*sim_cmd) {
      const auto l = load(sim_c);
      RunOptions opt;
      opt.resolution = sim_res;
      opt.oracle = sim_oracle;
      if (!sim_domain.empty()) opt.domain = parse_domain(sim_domain);
      const auto rep = run_scenario(l.scenario, l.params, sim_c.out, opt);
      print_files(rep.files);
      if (rep.summary.contains("fault_steady_state")) {
        const auto& ss = rep.summary["fault_steady_state"];
        std::cout << "fault steady state: i_pu=" << io::fmt(ss["i_pu"].get<double>())
                  << " vpoc_pu=" << io::fmt(ss["vpoc_pu"].get<double>()) << "\n";
      }
      return rep.ok ? 0 : 1;
    }

    auto run_phase = [](const Common& c, const std::string& phase_s, const std::string& model_s,
                        const std::string& dom_s, std::size_t res) {
      const auto l = load(c);
      const Phase phase = parse_phase(phase_s);
      const Domain dom = dom_s.empty() ? Domain{} : parse_domain(dom_s);
      return std::pair{analyze_phase(l.scenario, l.params, phase, parse_mode(model_s, l.scenario, phase), dom, res),
                       l.scenario.name + " " + phase_s};
    };

    if (*surf_cmd) {
      const auto [pa, title] = run_phase(surf_c, surf_phase, surf_model, surf_domain, surf_res);
      const fs::path dir = surf_c.out;
      io::write_text(dir / "surface.csv", io::surface_csv(pa.surface));
      io::write_text(dir / "surface.gp", io::surface_plot_script("surface.csv", title));
      print_files({dir / "surface.csv", dir / "surface.gp"});
      std::cout << "contour intersections: " << pa.equilibria.equilibria.size() << "\n";
      return 0;
    }

    if (*eq_cmd) {
      const auto [pa, title] = run_phase(eq_c, eq_phase, eq_model, eq_domain, eq_res);
      const fs::path dir = eq_c.out;
      io::write_text(dir / "equilibria.json", io::dump_json(io::equilibria_json(pa.equilibria)));
      print_files({dir / "equilibria.json"});
      for (const auto& e : pa.equilibria.equilibria) {
        std::cout << to_string(e.kind) << " delta=" << io::fmt(e.delta) << " v=" << io::fmt(e.v_pu) << "\n";
      }
      for (const auto& d : pa.equilibria.diagnostics) std::cerr << "note: " << d << "\n";
      bool ok = true;
      for (const auto& e : pa.equilibria.equilibria) ok = ok && e.residual < 1e-8;
      return ok ? 0 : 1;
    }

    if (*lc_cmd) {
      const auto l = load(lc_c);
      const auto fc = fault_limit_cycle(l.scenario, l.params, parse_current_model(lc_cm), lc_tmax);
      const fs::path dir = lc_c.out;
      io::write_text(dir / "orbit.csv", io::orbit_csv(fc.cycle, reduced::kDelta, reduced::kV, fc.system.params.v0));
      io::write_text(dir / "cycle.json", io::dump_json(io::Json{{"period_s", fc.cycle.period},
                                                               {"convergence_ratio", fc.cycle.convergence_ratio}}));
      io::write_text(dir / "orbit.gp", io::orbit_plot_script("orbit.csv"));
      print_files({dir / "orbit.csv", dir / "cycle.json", dir / "orbit.gp"});
      std::cout << "status: " << to_string(fc.cycle.status) << "\n";
      if (fc.cycle.status == CycleStatus::Cycle) std::cout << "period_s: " << io::fmt(fc.cycle.period) << "\n";
      else std::cout << fc.cycle.diagnostic << "\n";
      return fc.cycle.status == CycleStatus::Cycle ? 0 : 1;
    }

    if (*sw_cmd) {
      const fs::path dir = sw_c.out;
      if (sw_droop) {
        const auto demo = droop::run_cca_demo(droop::SwingParams{}, sw_points);
        SweepConfig sc;
        sc.delta_index = 0;
        sc.v_index = 1;
        io::write_text(dir / "sweep.json", io::dump_json(io::sweep_json(demo.sweep, sc)));
        print_files({dir / "sweep.json"});
        std::cout << demo.sweep.converged << "/" << demo.sweep.points.size() << " converged\n";
        return 0;
      }
      const auto l = load(sw_c);
      const auto fc = fault_limit_cycle(l.scenario, l.params, parse_current_model(sw_cm));
      if (fc.cycle.status != CycleStatus::Cycle) {
        std::cerr << "no limit cycle: " << fc.cycle.diagnostic << "\n";
        return 1;
      }
      const auto rep = fault_clearing_sweep(l.scenario, l.params, fc, sw_points);
      io::write_text(dir / "sweep.json", io::dump_json(io::sweep_json(rep, reduced_sweep_config(fc.system.params))));
      print_files({dir / "sweep.json"});
      std::cout << rep.converged << "/" << rep.points.size() << " converged\n";
      return 0;
    }

    if (*od_cmd) {
      const auto l = load(od_c);
      const auto red = simulate_reduced(l.scenario, l.params);
      const auto orc = simulate_oracle(l.scenario, l.params);
      const fs::path dir = od_c.out;
      io::write_text(dir / "reduced.csv", io::trajectory_csv(red));
      io::write_text(dir / "oracle.csv", io::trajectory_csv(orc));
      const auto a = fault_steady_state(red, l.scenario);
      const auto b = fault_steady_state(orc, l.scenario);
      auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-12); };
      io::Json j{{"reduced", {{"v_pu", a.v_pu}, {"delta", a.delta}, {"i_pu", a.i_pu}, {"vpoc_pu", a.vpoc_pu}}},
                 {"oracle", {{"v_pu", b.v_pu}, {"delta", b.delta}, {"i_pu", b.i_pu}, {"vpoc_pu", b.vpoc_pu}}},
                 {"rel_diff", {{"v", rel(a.v_pu, b.v_pu)}, {"delta", rel(a.delta, b.delta)}, {"i", rel(a.i_pu, b.i_pu)}}}};
      io::write_text(dir / "diff.json", io::dump_json(j));
      print_files({dir / "reduced.csv", dir / "oracle.csv", dir / "diff.json"});
      std::cout << io::dump_json(j["rel_diff"]);
      return red.status == RunStatus::Completed && orc.status == RunStatus::Completed ? 0 : 1;
    }
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
