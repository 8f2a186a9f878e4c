#include "uvoc/param_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace uvoc {

ParseError::ParseError(std::size_t line, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

ValidationError::ValidationError(std::string field, const std::string& msg)
    : std::runtime_error("invalid " + field + ": " + msg), field_(std::move(field)) {}

PerUnitBase PerUnitBase::from(const ConverterParams& c) {
  const double s = c.p_rated;
  const double n = static_cast<double>(c.n_phases);
  return {s, c.v0, n * c.v0 * c.v0 / s, s / (n * c.v0)};
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text, std::size_t line, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, "key '" + key + "' expects a number, got '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view text, std::size_t line, const std::string& key) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw ParseError(line, "key '" + key + "' expects a boolean, got '" + std::string(text) + "'");
}

struct Entry {
  std::string value;
  std::size_t line;
};

using Section = std::map<std::string, Entry>;

// Binds a numeric key to a field and tracks which keys were consumed.
class SectionReader {
 public:
  SectionReader(const std::string& name, const Section& section) : name_(name), section_(section) {}

  void number(const std::string& key, double& field) {
    if (auto it = section_.find(key); it != section_.end()) {
      field = parse_double(it->second.value, it->second.line, key);
      used_.push_back(key);
    }
  }

  void integer(const std::string& key, int& field) {
    if (auto it = section_.find(key); it != section_.end()) {
      const double v = parse_double(it->second.value, it->second.line, key);
      if (v != std::floor(v)) throw ParseError(it->second.line, "key '" + key + "' expects an integer");
      field = static_cast<int>(v);
      used_.push_back(key);
    }
  }

  void boolean(const std::string& key, bool& field) {
    if (auto it = section_.find(key); it != section_.end()) {
      field = parse_bool(it->second.value, it->second.line, key);
      used_.push_back(key);
    }
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : section_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ParseError(entry.line, "unknown key '" + key + "' in [" + name_ + "]");
      }
    }
  }

 private:
  std::string name_;
  const Section& section_;
  std::vector<std::string> used_;
};

}  // namespace

ParamSet load_params(std::string_view document) {
  std::map<std::string, Section> sections;
  std::vector<std::pair<std::string, std::string>> scenario_entries;
  std::string current;
  std::size_t line_no = 0;

  std::istringstream in{std::string(document)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (current != "converter" && current != "control" && current != "grid" && current != "scenario") {
        throw ParseError(line_no, "unknown section [" + current + "]");
      }
      sections[current];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    if (current.empty()) throw ParseError(line_no, "key outside of any section");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    auto& section = sections[current];
    if (section.contains(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    section[key] = {value, line_no};
    if (current == "scenario") scenario_entries.emplace_back(key, value);
  }

  ParamSet out;
  {
    SectionReader r("converter", sections["converter"]);
    auto& c = out.converter;
    r.number("s_rated", c.s_rated);
    r.number("p_rated", c.p_rated);
    r.number("v0", c.v0);
    r.number("omega0", c.omega0);
    r.integer("n_phases", c.n_phases);
    r.number("l1_pu", c.l1);
    r.number("l2_pu", c.l2);
    r.number("r1_pu", c.r1);
    r.number("r2_pu", c.r2);
    r.reject_unknown();
  }
  {
    SectionReader r("control", sections["control"]);
    auto& k = out.control;
    bool thresh_given = sections["control"].contains("i_thresh_pu");
    r.number("eta0", k.eta0);
    r.number("mu0", k.mu0);
    r.number("tau_f", k.tau_f);
    r.number("r0_pu", k.r0);
    r.number("lv0_pu", k.lv0);
    r.number("rv0_pu", k.rv0);
    r.number("omega_b", k.omega_b);
    r.number("i_m_pu", k.i_m);
    r.number("i_thresh_pu", k.i_thresh);
    r.number("v_thresh_pu", k.v_thresh);
    r.number("t_ramp", k.t_ramp);
    r.boolean("q0_boost", k.q0_boost);
    r.reject_unknown();
    if (!thresh_given) k.i_thresh = k.i_m;
  }
  {
    SectionReader r("grid", sections["grid"]);
    auto& g = out.grid;
    r.number("v_th_pu", g.v_th);
    r.number("omega_g", g.omega_g);
    r.number("z_th_mag_pu", g.z_th_mag);
    r.number("x_over_r", g.x_over_r);
    r.reject_unknown();
  }
  out.scenario.entries = std::move(scenario_entries);
  for (const auto& [k, v] : out.scenario.entries) {
    if (k == "name") out.scenario.name = v;
  }
  out.warnings = validate(out.converter, out.control, out.grid);
  return out;
}

ParamSet load_params_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load_params(ss.str());
}

std::vector<std::string> validate(const ConverterParams& c, const ControlParams& k, const GridThevenin& g) {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be > 0 (got " + std::to_string(v) + ")");
  };
  auto non_negative = [](const char* name, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be >= 0 (got " + std::to_string(v) + ")");
  };

  positive("s_rated", c.s_rated);
  positive("p_rated", c.p_rated);
  if (c.p_rated > c.s_rated) throw ValidationError("p_rated", "must not exceed s_rated");
  positive("v0", c.v0);
  positive("omega0", c.omega0);
  if (c.n_phases != 1 && c.n_phases != 3) throw ValidationError("n_phases", "must be 1 or 3");
  non_negative("l1", c.l1);
  non_negative("l2", c.l2);
  non_negative("r1", c.r1);
  non_negative("r2", c.r2);

  positive("eta0", k.eta0);
  positive("mu0", k.mu0);
  positive("tau_f", k.tau_f);
  non_negative("r0", k.r0);
  non_negative("lv0", k.lv0);
  non_negative("rv0", k.rv0);
  positive("omega_b", k.omega_b);
  positive("i_m", k.i_m);
  positive("i_thresh", k.i_thresh);
  positive("v_thresh", k.v_thresh);
  positive("t_ramp", k.t_ramp);

  non_negative("v_th", g.v_th);
  positive("omega_g", g.omega_g);
  non_negative("z_th_mag", g.z_th_mag);
  positive("x_over_r", g.x_over_r);

  std::vector<std::string> warnings;
  if (k.i_thresh > k.i_m) {
    warnings.push_back("i_thresh exceeds i_m: over-current detection fires above the limiter radius");
  }
  return warnings;
}

namespace {
double base_of(Quantity kind, const PerUnitBase& b) {
  switch (kind) {
    case Quantity::Voltage: return b.v_base;
    case Quantity::Current: return b.i_base;
    case Quantity::Impedance: return b.z_base;
    case Quantity::Power: return b.s_base;
  }
  return 1.0;
}
}  // namespace

double pu_to_si(double value, Quantity kind, const PerUnitBase& base) { return value * base_of(kind, base); }
double si_to_pu(double value, Quantity kind, const PerUnitBase& base) { return value / base_of(kind, base); }

TheveninSplit thevenin_split(const GridThevenin& grid) {
  if (!(grid.x_over_r > 0.0)) throw ValidationError("x_over_r", "must be > 0");
  const double r = grid.z_th_mag / std::hypot(1.0, grid.x_over_r);
  return {r, r * grid.x_over_r};
}

SiParams resolve(const ConverterParams& c, const ControlParams& k) {
  const auto base = PerUnitBase::from(c);
  const double zb = base.z_base;
  SiParams p{};
  p.n = c.n_phases;
  p.v0 = c.v0;
  p.omega0 = c.omega0;
  p.p_rated = c.p_rated;
  p.s_rated = c.s_rated;
  p.eta0 = k.eta0;
  p.mu0 = k.mu0;
  p.tau_f = k.tau_f;
  p.r0 = k.r0 * zb;
  p.rv0 = k.rv0 * zb;
  p.lv0 = k.lv0 * zb / c.omega0;
  p.omega_b = k.omega_b;
  p.i_m = k.i_m * base.i_base;
  p.i_thresh = k.i_thresh * base.i_base;
  p.v_thresh = k.v_thresh * base.v_base;
  p.t_ramp = k.t_ramp;
  p.q0_boost = k.q0_boost;
  p.l12 = (c.l1 + c.l2) * zb / c.omega0;
  p.r12 = (c.r1 + c.r2) * zb;
  p.base = base;
  return p;
}

GridSi resolve(const GridThevenin& g, const PerUnitBase& base) {
  const auto [r, x] = thevenin_split(g);
  return {g.v_th * base.v_base, g.omega_g, r * base.z_base, x * base.z_base / g.omega_g};
}

std::string describe(const ParamSet& ps) {
  const auto& c = ps.converter;
  const auto& k = ps.control;
  const auto& g = ps.grid;
  const auto base = PerUnitBase::from(c);
  const auto si = resolve(c, k);
  const auto gsi = resolve(g, base);
  const auto [r_th, x_th] = thevenin_split(g);

  std::ostringstream os;
  os << std::setprecision(17);
  os << "[base]\n"
     << "s_base = " << base.s_base << "  # W\n"
     << "v_base = " << base.v_base << "  # V RMS\n"
     << "z_base = " << base.z_base << "  # ohm\n"
     << "i_base = " << base.i_base << "  # A RMS\n\n";
  os << "[converter]\n"
     << "s_rated = " << c.s_rated << "  # VA\n"
     << "p_rated = " << c.p_rated << "  # W\n"
     << "v0 = " << c.v0 << "  # V RMS\n"
     << "v0_peak = " << c.v0_peak() << "  # V\n"
     << "omega0 = " << c.omega0 << "  # rad/s\n"
     << "n_phases = " << c.n_phases << "\n"
     << "l1_pu = " << c.l1 << "\n"
     << "l2_pu = " << c.l2 << "\n"
     << "r1_pu = " << c.r1 << "\n"
     << "r2_pu = " << c.r2 << "\n"
     << "l12_si = " << si.l12 << "  # H\n"
     << "r12_si = " << si.r12 << "  # ohm\n\n";
  os << "[control]\n"
     << "eta0 = " << k.eta0 << "\n"
     << "mu0 = " << k.mu0 << "\n"
     << "tau_f = " << k.tau_f << "  # s\n"
     << "r0_pu = " << k.r0 << "  # " << si.r0 << " ohm\n"
     << "lv0_pu = " << k.lv0 << "  # " << si.lv0 << " H\n"
     << "rv0_pu = " << k.rv0 << "  # " << si.rv0 << " ohm\n"
     << "omega_b = " << k.omega_b << "  # rad/s\n"
     << "i_m_pu = " << k.i_m << "  # " << si.i_m << " A RMS\n"
     << "i_thresh_pu = " << k.i_thresh << "  # " << si.i_thresh << " A RMS\n"
     << "v_thresh_pu = " << k.v_thresh << "  # " << si.v_thresh << " V RMS\n"
     << "t_ramp = " << k.t_ramp << "  # s\n"
     << "q0_boost = " << (k.q0_boost ? "true" : "false") << "\n\n";
  os << "[grid]\n"
     << "v_th_pu = " << g.v_th << "  # " << gsi.v_th << " V RMS\n"
     << "omega_g = " << g.omega_g << "  # rad/s\n"
     << "z_th_mag_pu = " << g.z_th_mag << "\n"
     << "x_over_r = " << g.x_over_r << "\n"
     << "r_th_pu = " << r_th << "  # " << gsi.r_th << " ohm\n"
     << "x_th_pu = " << x_th << "  # " << gsi.l_th << " H\n"
     << "scr = " << (g.z_th_mag > 0 ? short_circuit_ratio(g) : INFINITY) << "\n";
  for (const auto& w : ps.warnings) os << "# warning: " << w << "\n";
  return os.str();
}

}  // namespace uvoc
