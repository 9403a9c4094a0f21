#include "scriwave/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace scriwave::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::multimap<std::string, Entry>;

double to_double(const Entry& e, const std::string& key) {
  try {
    size_t used = 0;
    double v = std::stod(e.value, &used);
    if (used != e.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(e.line) + ": bad number for '" + key + "'");
  }
}

int to_int(const Entry& e, const std::string& key) {
  const double v = to_double(e, key);
  if (v != std::floor(v)) throw ConfigError("'" + key + "' must be an integer");
  return int(v);
}

bool to_bool(const Entry& e, const std::string& key) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  throw ConfigError("'" + key + "' must be true/false");
}

class SectionReader {
 public:
  SectionReader(Section s, std::string name) : s_(std::move(s)), name_(std::move(name)) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return s_.count(key) > 0;
  }
  Entry get(const std::string& key) {
    used_.insert(key);
    auto it = s_.find(key);
    if (it == s_.end()) throw ConfigError("[" + name_ + "] missing key '" + key + "'");
    return it->second;
  }
  double num(const std::string& key, double fallback) {
    return has(key) ? to_double(get(key), key) : fallback;
  }
  int integer(const std::string& key, int fallback) {
    return has(key) ? to_int(get(key), key) : fallback;
  }
  bool boolean(const std::string& key, bool fallback) {
    return has(key) ? to_bool(get(key), key) : fallback;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    return has(key) ? get(key).value : fallback;
  }
  std::vector<Entry> all(const std::string& key) {
    used_.insert(key);
    std::vector<Entry> out;
    auto [a, b] = s_.equal_range(key);
    for (auto it = a; it != b; ++it) out.push_back(it->second);
    return out;
  }
  void reject_unknown() const {
    for (const auto& [key, e] : s_)
      if (!used_.count(key))
        throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + key + "' in [" +
                          name_ + "]");
  }

 private:
  Section s_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& dir) {
  std::map<std::string, Section> sections;
  std::string line, current;
  int lineno = 0;
  const std::set<std::string> known = {"domain", "constants", "coefficients", "data",
                                       "grid",   "solver",    "output"};
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section");
      current = trim(line.substr(1, line.size() - 2));
      if (!known.count(current))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || current.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    sections[current].emplace(trim(line.substr(0, eq)), Entry{trim(line.substr(eq + 1)), lineno});
  }

  RunConfig cfg;

  {
    SectionReader s(sections["domain"], "domain");
    cfg.domain.m = s.integer("m", cfg.domain.m);
    cfg.domain.rho0 = s.num("rho0", cfg.domain.rho0);
    cfg.domain.rho1 = s.num("rho1", cfg.domain.rho1);
    cfg.domain.alpha = s.num("alpha", cfg.domain.alpha);
    cfg.domain.t0_override = s.num("t0", 0.0);
    cfg.domain.t_min = s.num("t_min", cfg.domain.t_min);
    s.reject_unknown();
  }
  {
    SectionReader s(sections["constants"], "constants");
    cfg.exponents.kappa = s.num("kappa", cfg.exponents.kappa);
    cfg.exponents.nu = s.num("nu", cfg.exponents.nu);
    cfg.exponents.epsilon = s.num("epsilon", cfg.exponents.epsilon);
    cfg.exponents.zeta = s.num("zeta", cfg.exponents.zeta);
    s.reject_unknown();
  }
  {
    SectionReader s(sections["coefficients"], "coefficients");
    cfg.n_unknowns = s.integer("n", 1);
    if (cfg.n_unknowns < 1 || cfg.n_unknowns > 8)
      throw ConfigError("[coefficients] n must be in 1..8");
    std::ostringstream lines;
    if (s.has("file")) {
      std::ifstream f(dir + "/" + s.get("file").value);
      if (!f) throw ConfigError("cannot open coefficients file");
      lines << f.rdbuf();
    }
    for (const auto& e : s.all("entry")) lines << e.value << "\n";
    std::istringstream li(lines.str());
    cfg.coefficients = coeffs::parse_coefficients(li, cfg.n_unknowns);
    s.reject_unknown();
  }
  {
    SectionReader s(sections["data"], "data");
    cfg.data.vbar.resize(cfg.n_unknowns);
    cfg.data.wbar.resize(cfg.n_unknowns);
    cfg.data.zbar.resize(cfg.n_unknowns);
    for (int K = 1; K <= cfg.n_unknowns; ++K) {
      const std::string suffix = "_" + std::to_string(K);
      if (s.has("vbar" + suffix))
        cfg.data.vbar[K - 1] = expr::Expression::parse(s.get("vbar" + suffix).value);
      if (s.has("wbar" + suffix))
        cfg.data.wbar[K - 1] = expr::Expression::parse(s.get("wbar" + suffix).value);
      if (s.has("zbar" + suffix))
        cfg.data.zbar[K - 1] = expr::Expression::parse(s.get("zbar" + suffix).value);
    }
    if (s.has("csv")) cfg.data_csv = dir + "/" + s.get("csv").value;
    const std::string variant = s.str("variant", "chain");
    if (variant == "chain")
      cfg.data_variant = idata::DataVariant::chain;
    else if (variant == "paper_displayed")
      cfg.data_variant = idata::DataVariant::paper_displayed;
    else
      throw ConfigError("[data] variant must be chain or paper_displayed");
    s.reject_unknown();
  }
  {
    SectionReader s(sections["grid"], "grid");
    const std::string mode = s.str("mode", "spherical");
    if (mode == "spherical")
      cfg.grid.mode = evol::Grid::Mode::spherical;
    else if (mode == "full")
      cfg.grid.mode = evol::Grid::Mode::full;
    else
      throw ConfigError("[grid] mode must be spherical or full");
    cfg.grid.n_rho = s.integer("n_rho", cfg.grid.n_rho);
    cfg.grid.n_theta = s.integer("n_theta", cfg.grid.n_theta);
    cfg.grid.n_phi = s.integer("n_phi", cfg.grid.n_phi);
    cfg.grid.theta_min = s.num("theta_min", cfg.grid.theta_min);
    s.reject_unknown();
  }
  {
    SectionReader s(sections["solver"], "solver");
    cfg.solver.ds = s.num("ds", cfg.solver.ds);
    cfg.solver.cfl_safety = s.num("cfl_safety", cfg.solver.cfl_safety);
    cfg.solver.snapshot_stride = s.integer("snapshot_stride", cfg.solver.snapshot_stride);
    cfg.solver.record_stride = s.integer("record_stride", cfg.solver.record_stride);
    s.reject_unknown();
  }
  {
    SectionReader s(sections["output"], "output");
    cfg.output.write_states = s.boolean("write_states", cfg.output.write_states);
    cfg.output.svg = s.boolean("svg", cfg.output.svg);
    cfg.seed = std::uint64_t(s.num("seed", double(cfg.seed)));
    s.reject_unknown();
  }

  cfg.solver.t_min = cfg.domain.t_min;
  cfg.grid.rho_lo = cfg.domain.torus_lo();
  cfg.grid.rho_hi = cfg.domain.torus_hi();
  cfg.make_constants();  // validate all inequalities now
  std::string why;
  if (!cfg.grid.validate(&why)) throw ConfigError("[grid] " + why);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  auto slash = path.find_last_of('/');
  return parse_config(f, slash == std::string::npos ? "." : path.substr(0, slash));
}

evol::Grid make_grid(const RunConfig& cfg) { return cfg.grid; }

}  // namespace scriwave::config
