#include "uvoc/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace uvoc::io {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        dump(v, out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        dump(v, out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? fmt(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::string trajectory_csv(const SimulationResult& r) {
  std::string out = "t,v_pu,delta,i_pu,vpoc_pu,x_f,x_r,p_pu,q_pu\n";
  for (const auto& s : r.rows) {
    out += fmt(s.t) + ',' + fmt(s.v_pu) + ',' + fmt(s.delta) + ',' + fmt(s.i_pu) + ',' + fmt(s.vpoc_pu) + ',' +
           std::to_string(s.x_f) + ',' + fmt(s.x_r) + ',' + fmt(s.p_pu) + ',' + fmt(s.q_pu) + '\n';
  }
  return out;
}

std::string surface_csv(const SurfaceGrid& g) {
  std::string out = "delta,v,ddelta_norm,dv_norm,valid\n";
  for (std::size_t j = 0; j < g.nv(); ++j) {
    for (std::size_t i = 0; i < g.nd(); ++i) {
      const auto k = g.index(i, j);
      out += fmt(g.delta_axis[i]) + ',' + fmt(g.v_axis[j]) + ',' + fmt(g.ddelta[k]) + ',' + fmt(g.dv[k]) + ',' +
             (g.valid[k] ? "1" : "0") + '\n';
    }
  }
  return out;
}

Json equilibria_json(const EquilibriumSearch& s) {
  Json arr = Json::array();
  for (const auto& e : s.equilibria) {
    Json rec;
    rec["delta"] = e.delta;
    rec["v"] = e.v_pu;
    rec["kind"] = to_string(e.kind);
    rec["eigs"] = Json::array({Json::array({e.eigs[0].real(), e.eigs[0].imag()}),
                               Json::array({e.eigs[1].real(), e.eigs[1].imag()})});
    rec["saddle"] = e.saddle;
    rec["residual"] = e.residual;
    rec["probe_agrees"] = e.probe_agrees ? Json(*e.probe_agrees) : Json(nullptr);
    arr.push_back(rec);
  }
  return arr;
}

std::string orbit_csv(const CycleResult& c, std::size_t delta_index, std::size_t v_index, double v_scale) {
  std::string out = "t,delta,v";
  const std::size_t dim = c.orbit_y.empty() ? 0 : c.orbit_y.front().size();
  for (std::size_t k = 0; k < dim; ++k) {
    if (k != delta_index && k != v_index) out += ",y" + std::to_string(k);
  }
  out += '\n';
  for (std::size_t n = 0; n < c.orbit_t.size(); ++n) {
    const auto& y = c.orbit_y[n];
    out += fmt(c.orbit_t[n]) + ',' + fmt(wrap_angle(y[delta_index])) + ',' + fmt(y[v_index] / v_scale);
    for (std::size_t k = 0; k < dim; ++k) {
      if (k != delta_index && k != v_index) out += ',' + fmt(y[k]);
    }
    out += '\n';
  }
  return out;
}

Json cycle_json(const CycleResult& c) {
  Json j;
  j["status"] = to_string(c.status);
  j["period_s"] = c.period;
  j["convergence_ratio"] = c.convergence_ratio;
  j["periods_s"] = c.periods;
  if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
  return j;
}

Json sweep_json(const SweepReport& r, const SweepConfig& cfg) {
  Json j;
  j["target_delta"] = r.target_delta;
  j["target_v"] = r.target_v_pu;
  j["converged"] = r.converged;
  j["points_total"] = r.points.size();
  Json pts = Json::array();
  for (const auto& p : r.points) {
    Json q;
    q["tau_s"] = p.tau;
    q["delta"] = wrap_angle(p.start[cfg.delta_index]);
    q["v"] = p.start[cfg.v_index] / cfg.v_scale;
    q["final_distance"] = p.final_distance;
    q["converged"] = p.converged;
    pts.push_back(q);
  }
  j["points"] = pts;
  return j;
}

Json events_json(const SimulationResult& r) {
  Json arr = Json::array();
  for (const auto& e : r.events) arr.push_back(Json{{"t", e.t}, {"name", e.name}});
  return arr;
}

std::string trajectory_plot_script(const std::string& csv) {
  std::ostringstream s;
  s << "# gnuplot script\n"
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set multiplot layout 3,1\n"
    << "set xlabel 't (s)'\n"
    << "plot '" << csv << "' using 1:2 with lines, '' using 1:5 with lines\n"
    << "plot '" << csv << "' using 1:4 with lines\n"
    << "plot '" << csv << "' using 1:3 with lines\n"
    << "unset multiplot\n";
  return s.str();
}

std::string surface_plot_script(const std::string& csv, const std::string& title) {
  std::ostringstream s;
  s << "# gnuplot script\n"
    << "set datafile separator ','\n"
    << "set title '" << title << "'\n"
    << "set xlabel 'delta (rad)'\n"
    << "set ylabel 'V (pu)'\n"
    << "set contour base\n"
    << "set cntrparam levels discrete 0\n"
    << "set view map\n"
    << "unset surface\n"
    << "set dgrid3d\n"
    << "splot '" << csv << "' every ::1 using 1:2:($5 > 0 ? $3 : 1/0) with lines title 'ddelta = 0', \\\n"
    << "      '" << csv << "' every ::1 using 1:2:($5 > 0 ? $4 : 1/0) with lines title 'dV = 0'\n";
  return s.str();
}

std::string orbit_plot_script(const std::string& csv) {
  std::ostringstream s;
  s << "# gnuplot script\n"
    << "set datafile separator ','\n"
    << "set xlabel 'delta (rad)'\n"
    << "set ylabel 'V (pu)'\n"
    << "plot '" << csv << "' every ::1 using 2:3 with points pt 7 ps 0.4 title 'limit cycle'\n";
  return s.str();
}

}  // namespace uvoc::io
