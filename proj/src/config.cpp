#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "strobe/harness.hpp"

namespace strobe {

namespace {

std::string shortest(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text) {
  const std::string s = trim(text);
  if (s == "pi/4") return std::numbers::pi / 4;
  if (s == "pi/6") return std::numbers::pi / 6;
  if (s == "pi/2") return std::numbers::pi / 2;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

long long parse_integer(const std::string& text) {
  const std::string s = trim(text);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_double(item));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += shortest(v[i]);
  }
  return out;
}

struct Field {
  std::string name;
  std::string help;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&)> set;
};

#define STROBE_DOUBLE(key, member, help)                                            \
  Field {                                                                           \
    key, help, [](const ScenarioConfig& c) { return shortest(c.member); },          \
        [](ScenarioConfig& c, const std::string& s) { c.member = parse_double(s); } \
  }
#define STROBE_INT(key, member, help)                                          \
  Field {                                                                      \
    key, help, [](const ScenarioConfig& c) { return std::to_string(c.member); }, \
        [](ScenarioConfig& c, const std::string& s) {                          \
          c.member = static_cast<decltype(c.member)>(parse_integer(s));        \
        }                                                                      \
  }
#define STROBE_LIST(key, member, help)                                            \
  Field {                                                                         \
    key, help, [](const ScenarioConfig& c) { return join(c.member); },            \
        [](ScenarioConfig& c, const std::string& s) { c.member = parse_list(s); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"scenario.kind",
       "sequence-scan | spectrum | fidelity-scan | thermalize | cool | pump | eliminate | entropy",
       [](const ScenarioConfig& c) { return std::string(to_string(c.kind)); },
       [](ScenarioConfig& c, const std::string& s) { c.kind = parse_scenario(trim(s)); }},
      {"scenario.seed", "seed for eigensolver start blocks and trajectories",
       [](const ScenarioConfig& c) { return std::to_string(c.seed); },
       [](ScenarioConfig& c, const std::string& s) {
         const auto v = parse_integer(s);
         if (v < 0) throw std::invalid_argument("seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"scenario.output_dir", "directory for CSV/JSON output (STROBE_OUTPUT_DIR overrides)",
       [](const ScenarioConfig& c) { return c.output_dir; },
       [](ScenarioConfig& c, const std::string& s) { c.output_dir = trim(s); }},
      STROBE_INT("lattice.L", L, "torus side length"),
      STROBE_DOUBLE("angles.alpha", alpha, "gate angle alpha (rad)"),
      STROBE_DOUBLE("angles.beta", beta, "gate angle beta (rad)"),
      STROBE_DOUBLE("angles.gamma", gamma, "gate angle gamma (rad)"),
      {"angles.phi", "uniform angle; overrides alpha, beta, gamma when set",
       [](const ScenarioConfig& c) { return c.phi ? shortest(*c.phi) : std::string(); },
       [](ScenarioConfig& c, const std::string& s) {
         if (trim(s).empty()) {
           c.phi.reset();
         } else {
           c.phi = parse_double(s);
         }
       }},
      STROBE_LIST("angles.phi_grid", phi_grid, "uniform angles for the order scans"),
      STROBE_DOUBLE("angles.tau", tau, "gate duration in internal time units"),
      STROBE_DOUBLE("angles.tau_seconds", tau_seconds, "physical gate duration for the cycle time"),
      STROBE_INT("angles.gates_per_u", gates_per_u, "elementary gates per U operation"),
      STROBE_DOUBLE("hamiltonian.j", j, "stabilizer coupling J_e = J_m"),
      STROBE_DOUBLE("hamiltonian.h_z", h_z, "longitudinal field"),
      STROBE_LIST("hamiltonian.chi_grid", chi_grid, "chi values of the spectrum and fidelity scans"),
      STROBE_INT("hamiltonian.n_eigenvalues", n_eigenvalues, "eigenpairs per chi point"),
      {"hamiltonian.pairing", "sequence | nearest-neighbor",
       [](const ScenarioConfig& c) { return std::string(to_string(c.pairing)); },
       [](ScenarioConfig& c, const std::string& s) { c.pairing = parse_pairing(trim(s)); }},
      STROBE_DOUBLE("eigen.tolerance", eigen_tolerance, "residual tolerance per eigenpair"),
      STROBE_INT("eigen.block_size", block_size, "Lanczos block size"),
      STROBE_INT("eigen.max_basis", max_basis, "Krylov basis size before restart"),
      STROBE_DOUBLE("dissipation.p", p, "excitation probability of the thermal bath"),
      STROBE_DOUBLE("dissipation.lambda_star", lambda_star, "pair annihilation / cooling rate"),
      STROBE_DOUBLE("dissipation.gamma_star", gamma_star, "excitation hopping rate"),
      STROBE_DOUBLE("dissipation.t_final", t_final, "evolution time"),
      STROBE_INT("dissipation.n_times", n_times, "output times in [0, t_final]"),
      STROBE_LIST("dissipation.ratio_grid", ratio_grid, "cooling-to-noise rate ratios"),
      STROBE_DOUBLE("pump.theta", theta, "pulse area of step iv (rad; pi/4, pi/6, pi/2 accepted)"),
      STROBE_DOUBLE("pump.gamma20", gamma20, "decay rate of level 2"),
      STROBE_DOUBLE("pump.rabi", rabi, "pulse Rabi rate"),
      STROBE_LIST("elimination.g_grid", g_grid, "system-reservoir couplings"),
      STROBE_LIST("elimination.lambda_grid", lambda_grid, "thermal ancilla decay rates"),
      STROBE_DOUBLE("elimination.gamma_mixed", gamma_mixed, "mixed ancilla rate"),
      STROBE_DOUBLE("noise.epg", noise.epg, "error probability per elementary gate"),
      {"noise.channel", "depolarizing",
       [](const ScenarioConfig& c) { return c.noise.channel; },
       [](ScenarioConfig& c, const std::string& s) { c.noise.channel = trim(s); }},
      STROBE_LIST("noise.epg_grid", epg_grid, "EPG values of the entropy sweep"),
      STROBE_DOUBLE("integrator.abs_tol", abs_tol, "absolute step tolerance"),
      STROBE_DOUBLE("integrator.rel_tol", rel_tol, "relative step tolerance"),
      STROBE_INT("trajectories.samples", samples, "trajectory samples (0 disables)"),
      STROBE_DOUBLE("trajectories.dt", trajectory_dt, "RK4 step of the no-jump evolution"),
  };
  return table;
}

#undef STROBE_DOUBLE
#undef STROBE_INT
#undef STROBE_LIST

const Field* find_field(const std::string& name) {
  for (const auto& f : fields()) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::size_t count_distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SequenceScan: return "sequence-scan";
    case ScenarioKind::Spectrum: return "spectrum";
    case ScenarioKind::FidelityScan: return "fidelity-scan";
    case ScenarioKind::Thermalize: return "thermalize";
    case ScenarioKind::Cool: return "cool";
    case ScenarioKind::Pump: return "pump";
    case ScenarioKind::Eliminate: return "eliminate";
    case ScenarioKind::Entropy: return "entropy";
  }
  return "?";
}

ScenarioKind parse_scenario(const std::string& s) {
  if (s == "sequence-scan" || s == "sequence-order-scan") return ScenarioKind::SequenceScan;
  if (s == "spectrum") return ScenarioKind::Spectrum;
  if (s == "fidelity-scan") return ScenarioKind::FidelityScan;
  if (s == "thermalize") return ScenarioKind::Thermalize;
  if (s == "cool" || s == "cool-with-noise") return ScenarioKind::Cool;
  if (s == "pump") return ScenarioKind::Pump;
  if (s == "eliminate") return ScenarioKind::Eliminate;
  if (s == "entropy") return ScenarioKind::Entropy;
  throw std::invalid_argument("unknown scenario '" + s + "'");
}

std::vector<std::string> NoiseModel::problems() const {
  std::vector<std::string> out;
  if (!(epg >= 0.0 && epg < 0.5)) out.push_back("noise.epg must lie in [0, 0.5)");
  if (channel != "depolarizing") out.push_back("noise.channel: only 'depolarizing' is available");
  return out;
}

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error([&] {
        std::string s = "invalid configuration:";
        for (const auto& p : problems) s += "\n  " + p;
        return s;
      }()),
      problems_(problems) {}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> out = [] {
    std::vector<ConfigField> v;
    for (const auto& f : fields()) v.push_back({f.name, f.help});
    return v;
  }();
  return out;
}

std::vector<std::string> ScenarioConfig::problems() const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  const bool dense = kind == ScenarioKind::Thermalize || kind == ScenarioKind::Cool;
  const bool spectral = kind == ScenarioKind::Spectrum || kind == ScenarioKind::FidelityScan;
  if (dense) {
    need(L == 2, "lattice.L must be 2 for density-matrix scenarios (8 qubits)");
  } else if (spectral) {
    need(L >= 2 && L <= 3, "lattice.L must be 2 or 3 for exact diagonalization");
  } else {
    need(L >= 2 && L <= 16, "lattice.L must lie in [2, 16]");
  }
  need(!output_dir.empty(), "scenario.output_dir must not be empty");

  need(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma),
       "angles must be finite");
  const double a = phi.value_or(alpha), g = phi.value_or(gamma);
  need(a != 0.0 && g != 0.0, "angles.alpha and angles.gamma must be non-zero");
  need(!phi || (std::isfinite(*phi) && *phi > 0.0), "angles.phi must be positive");
  {
    bool ok = phi_grid.size() >= 4 && finite_all(phi_grid);
    for (double x : phi_grid) ok = ok && x > 0.0 && x < 1.0;
    if (ok) {
      const auto [mn, mx] = std::minmax_element(phi_grid.begin(), phi_grid.end());
      ok = *mx / *mn >= 2.0;
    }
    need(ok, "angles.phi_grid needs >= 4 values in (0, 1) spanning a factor >= 2");
  }
  need(std::isfinite(tau) && tau > 0.0, "angles.tau must be > 0");
  need(std::isfinite(tau_seconds) && tau_seconds >= 0.0, "angles.tau_seconds must be >= 0");
  need(gates_per_u >= 1, "angles.gates_per_u must be >= 1");

  need(std::isfinite(j) && j > 0.0, "hamiltonian.j must be > 0");
  need(std::isfinite(h_z), "hamiltonian.h_z must be finite");
  need(!chi_grid.empty() && finite_all(chi_grid), "hamiltonian.chi_grid needs finite values");
  need(n_eigenvalues >= 5 && n_eigenvalues <= 32,
       "hamiltonian.n_eigenvalues must lie in [5, 32] (four ground states plus the gap)");
  need(eigen_tolerance > 0.0 && eigen_tolerance < 1e-2, "eigen.tolerance must lie in (0, 1e-2)");
  need(block_size >= 1, "eigen.block_size must be >= 1");
  need(max_basis >= 2 * std::max(block_size, n_eigenvalues + 2) + 2,
       "eigen.max_basis must exceed twice the effective block size");

  need(p >= 0.0 && p < 1.0, "dissipation.p must lie in [0, 1)");
  need(std::isfinite(lambda_star) && lambda_star > 0.0, "dissipation.lambda_star must be > 0");
  need(std::isfinite(gamma_star) && gamma_star >= 0.0, "dissipation.gamma_star must be >= 0");
  need(std::isfinite(t_final) && t_final > 0.0, "dissipation.t_final must be > 0");
  need(n_times >= 2 && n_times <= 100000, "dissipation.n_times must lie in [2, 100000]");
  {
    bool ok = !ratio_grid.empty() && finite_all(ratio_grid);
    for (double r : ratio_grid) ok = ok && r > 0.0;
    need(ok && count_distinct(ratio_grid) == ratio_grid.size(),
         "dissipation.ratio_grid needs distinct positive values");
  }

  need(std::isfinite(theta), "pump.theta must be finite");
  need(std::isfinite(gamma20) && gamma20 > 0.0, "pump.gamma20 must be > 0");
  need(std::isfinite(rabi) && rabi > 0.0, "pump.rabi must be > 0");

  {
    bool ok = finite_all(g_grid) && finite_all(lambda_grid) && !g_grid.empty() &&
              !lambda_grid.empty();
    for (double x : g_grid) ok = ok && x > 0.0;
    for (double x : lambda_grid) ok = ok && x > 0.0;
    need(ok, "elimination grids need positive finite values");
    if (ok) {
      need(count_distinct(g_grid) >= 2 && count_distinct(lambda_grid) >= 2,
           "elimination grids need two distinct values each");
      bool weak = true;
      for (double x : g_grid) {
        for (double l : lambda_grid) weak = weak && x / l <= 0.1;
      }
      need(weak, "elimination: every g / lambda must be <= 0.1");
    }
    need(std::isfinite(gamma_mixed) && gamma_mixed > 0.0, "elimination.gamma_mixed must be > 0");
  }

  for (const auto& s : noise.problems()) out.push_back(s);
  {
    bool ok = finite_all(epg_grid);
    std::size_t positive = 0;
    for (double e : epg_grid) {
      ok = ok && e >= 0.0 && e < 0.5;
      if (e > 0.0) ++positive;
    }
    need(ok && positive >= 2, "noise.epg_grid needs >= 2 values in (0, 0.5)");
  }

  need(abs_tol > 0.0 && rel_tol > 0.0, "integrator tolerances must be > 0");
  need(samples == 0 || samples >= 2, "trajectories.samples must be 0 or >= 2");
  need(trajectory_dt > 0.0 && trajectory_dt <= 0.1, "trajectories.dt must lie in (0, 0.1]");
  return out;
}

void ScenarioConfig::validate() const {
  const auto p = problems();
  if (!p.empty()) throw ConfigError(p);
}

std::string ScenarioConfig::to_ini() const {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.name.find('.');
    const auto sec = f.name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += f.name.substr(dot + 1) + " = " + f.get(*this) + "\n";
  }
  return out;
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) j[f.name] = f.get(*this);
  return j;
}

std::uint64_t ScenarioConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_ini()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void ScenarioConfig::set(const std::string& name, const std::string& value) {
  const Field* f = find_field(name);
  if (!f) throw ConfigError({"unknown field '" + name + "'"});
  try {
    f->set(*this, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({name + ": " + e.what()});
  }
}

ScenarioConfig ScenarioConfig::from_ini_string(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("malformed INI: ") + e.what()});
  }
  ScenarioConfig c;
  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      problems.push_back("key '" + section + "' outside a section");
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      try {
        c.set(name, value.data());
      } catch (const ConfigError& e) {
        problems.insert(problems.end(), e.problems().begin(), e.problems().end());
      }
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

ScenarioConfig ScenarioConfig::from_ini_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot read " + path.string()});
  std::stringstream ss;
  ss << is.rdbuf();
  return from_ini_string(ss.str());
}

std::filesystem::path ScenarioConfig::resolved_output_dir() const {
  if (const char* env = std::getenv("STROBE_OUTPUT_DIR"); env && *env) return env;
  return output_dir;
}

}  // namespace strobe
