#include "dendrite/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dendrite/diagnostics.hpp"
#include "dendrite/errors.hpp"

namespace dendrite {

const char* to_string(Scheme s) { return s == Scheme::bdf1 ? "bdf1" : "bdf2"; }

const char* to_string(InitialCondition::Preset p) {
  switch (p) {
    case InitialCondition::Preset::case2_tanh: return "case2_tanh";
    case InitialCondition::Preset::dendrite_seed: return "dendrite_seed";
    case InitialCondition::Preset::uniform: return "uniform";
    case InitialCondition::Preset::files: return "files";
  }
  return "?";
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"grid", {"nx", "ny", "x0", "x1", "y0", "y1"}},
      {"run", {"scheme", "tau", "t_end", "strict_energy", "deterministic", "check_identity", "cg_tol", "cg_maxit"}},
      {"model",
       {"eps", "lambda", "diff", "latent", "sigma", "s1", "s2", "s3", "s4", "bconst", "rho", "rho_solid",
        "rho_liquid", "mode", "reg"}},
      {"initial",
       {"preset", "r0", "x0", "y0", "eps0", "temp_factor", "undercool", "phi", "temp", "phi_file", "temp_file"}},
      {"sources", {"phi_pattern", "temp_pattern"}},
      {"output", {"dir", "snapshot_every", "snapshot_times"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line = 0;
};

// Values of one parsed file; get_* consume entries.
class Table {
 public:
  void set(const std::string& section, const std::string& key, Entry e) {
    auto& sec = entries_[section];
    if (sec.count(key)) {
      throw InvalidValueError(section + "." + key, "duplicate key '" + section + "." + key + "' on line " +
                                                       std::to_string(e.line));
    }
    sec[key] = std::move(e);
  }

  bool has(const std::string& section, const std::string& key) const {
    auto it = entries_.find(section);
    return it != entries_.end() && it->second.count(key);
  }

  const Entry& need(const std::string& section, const std::string& key) const {
    if (!has(section, key)) {
      throw MissingKeyError(section + "." + key, "missing required key '" + section + "." + key + "'");
    }
    return entries_.at(section).at(key);
  }

  double real(const std::string& section, const std::string& key) const {
    return parse_real(section + "." + key, need(section, key));
  }
  double real_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? real(section, key) : fallback;
  }
  long integer(const std::string& section, const std::string& key) const {
    const Entry& e = need(section, key);
    long v = 0;
    auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size()) {
      bad(section + "." + key, e, "an integer");
    }
    return v;
  }
  long integer_or(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
  }
  bool boolean_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const Entry& e = need(section, key);
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    bad(section + "." + key, e, "a boolean (true/false)");
  }
  std::string text(const std::string& section, const std::string& key) const { return need(section, key).value; }
  std::string text_or(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
  }
  std::vector<double> reals_or(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    const Entry& e = need(section, key);
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(parse_real(section + "." + key, Entry{item, e.line}));
    }
    return out;
  }

 private:
  [[noreturn]] static void bad(const std::string& key, const Entry& e, const char* expect) {
    throw InvalidValueError(key, key + ": expected " + expect + ", got '" + e.value + "' on line " +
                                     std::to_string(e.line));
  }
  static double parse_real(const std::string& key, const Entry& e) {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    if (b != end && *b == '+') ++b;
    auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) bad(key, e, "a finite real number");
    return v;
  }

  std::map<std::string, std::map<std::string, Entry>> entries_;
};

Table tokenize(const std::string& text) {
  Table table;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!known_keys().count(section)) {
        throw UnknownKeyError(section, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw UnknownKeyError(key, "line " + std::to_string(line_no) + ": key '" + key + "' outside any section");
    }
    if (!known_keys().at(section).count(key)) {
      throw UnknownKeyError(section + "." + key,
                            "line " + std::to_string(line_no) + ": unknown key '" + section + "." + key + "'");
    }
    if (value.empty()) {
      throw InvalidValueError(section + "." + key,
                              "line " + std::to_string(line_no) + ": empty value for '" + section + "." + key + "'");
    }
    table.set(section, key, Entry{value, line_no});
  }
  return table;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& msg) { throw InvalidValueError(key, key + ": " + msg); };
  if (grid.nx < 4 || grid.ny < 4) fail("grid.nx", "grid needs at least 4 cells per direction");
  if (!(grid.x1 > grid.x0)) fail("grid.x1", "must exceed grid.x0");
  if (!(grid.y1 > grid.y0)) fail("grid.y1", "must exceed grid.y0");
  if (!(tau > 0.0)) fail("run.tau", "time step must be positive");
  if (!(t_end >= tau)) fail("run.t_end", "must be at least one time step");
  if (!(cg_tol > 0.0)) fail("run.cg_tol", "must be positive");
  if (cg_maxit < 1) fail("run.cg_maxit", "must be positive");
  try {
    model.validate();
  } catch (const StabilizerBoundError& e) {
    throw StabilizerBoundError("model." + e.key(), "model." + std::string(e.what()));
  } catch (const ConfigKeyError& e) {
    throw InvalidValueError("model." + e.key(), "model." + std::string(e.what()));
  }
  using P = InitialCondition::Preset;
  if (initial.preset == P::case2_tanh || initial.preset == P::dendrite_seed) {
    if (!(initial.r0 > 0.0)) fail("initial.r0", "must be positive");
    if (!(initial.eps0 > 0.0)) fail("initial.eps0", "must be positive");
  }
  if (initial.preset == P::dendrite_seed && !(initial.undercool >= 0.0 && initial.undercool <= 1.0)) {
    fail("initial.undercool", "must lie in [0, 1]");
  }
  if (initial.preset == P::files && (initial.phi_file.empty() || initial.temp_file.empty())) {
    fail("initial.phi_file", "files preset needs phi_file and temp_file");
  }
  if (output.snapshot_every < 0) fail("output.snapshot_every", "must be non-negative");
  for (double t : output.snapshot_times) {
    if (t < 0.0) fail("output.snapshot_times", "times must be non-negative");
  }
}

long RunConfig::steps() const { return std::max(1L, std::lround(t_end / tau)); }

bool operator==(const RunConfig& a, const RunConfig& b) {
  const ModelParams& p = a.model;
  const ModelParams& q = b.model;
  const bool same_mobility = p.mobility.description() == q.mobility.description() &&
                             p.mobility.constant_value() == q.mobility.constant_value() &&
                             p.mobility.rho_solid() == q.mobility.rho_solid() &&
                             p.mobility.rho_liquid() == q.mobility.rho_liquid();
  const bool same_model = p.eps == q.eps && p.lambda == q.lambda && p.diff == q.diff && p.latent == q.latent &&
                          p.sigma == q.sigma && p.mode == q.mode && same_mobility && p.s1 == q.s1 && p.s2 == q.s2 &&
                          p.s3 == q.s3 && p.s4 == q.s4 && p.bconst == q.bconst && p.reg == q.reg;
  return a.grid == b.grid && a.scheme == b.scheme && a.tau == b.tau && a.t_end == b.t_end && same_model &&
         a.initial == b.initial && a.sources == b.sources && a.output == b.output &&
         a.strict_energy == b.strict_energy && a.deterministic == b.deterministic &&
         a.check_identity == b.check_identity && a.cg_tol == b.cg_tol && a.cg_maxit == b.cg_maxit;
}

RunConfig parse_config(const std::string& text) {
  const Table t = tokenize(text);
  RunConfig c;

  c.grid.nx = static_cast<int>(t.integer("grid", "nx"));
  c.grid.ny = static_cast<int>(t.integer("grid", "ny"));
  c.grid.x0 = t.real("grid", "x0");
  c.grid.x1 = t.real("grid", "x1");
  c.grid.y0 = t.real("grid", "y0");
  c.grid.y1 = t.real("grid", "y1");

  const std::string scheme = t.text("run", "scheme");
  if (scheme == "bdf1") {
    c.scheme = Scheme::bdf1;
  } else if (scheme == "bdf2") {
    c.scheme = Scheme::bdf2;
  } else {
    throw InvalidValueError("run.scheme", "run.scheme: expected bdf1 or bdf2, got '" + scheme + "'");
  }
  c.tau = t.real("run", "tau");
  c.t_end = t.real("run", "t_end");
  c.strict_energy = t.boolean_or("run", "strict_energy", false);
  c.deterministic = t.boolean_or("run", "deterministic", true);
  c.check_identity = t.boolean_or("run", "check_identity", true);
  c.cg_tol = t.real_or("run", "cg_tol", 1e-10);
  c.cg_maxit = static_cast<int>(t.integer_or("run", "cg_maxit", 500));

  ModelParams& m = c.model;
  m.eps = t.real("model", "eps");
  m.lambda = t.real("model", "lambda");
  m.diff = t.real("model", "diff");
  m.latent = t.real("model", "latent");
  m.sigma = t.real("model", "sigma");
  m.s1 = t.real("model", "s1");
  m.s2 = t.real("model", "s2");
  m.s3 = t.real("model", "s3");
  m.s4 = t.real("model", "s4");
  m.bconst = t.real("model", "bconst");
  m.mode = static_cast<int>(t.integer_or("model", "mode", 4));
  m.reg = t.real_or("model", "reg", 0.0);
  const bool has_rho = t.has("model", "rho");
  const bool has_linear = t.has("model", "rho_solid") || t.has("model", "rho_liquid");
  if (has_rho && has_linear) {
    throw InvalidValueError("model.rho", "model.rho: give either rho or rho_solid/rho_liquid, not both");
  }
  if (has_linear) {
    m.mobility = Mobility::linear(t.real("model", "rho_solid"), t.real("model", "rho_liquid"));
  } else {
    m.mobility = Mobility::constant(t.real("model", "rho"));
  }

  InitialCondition& ic = c.initial;
  const std::string preset = t.text("initial", "preset");
  std::set<std::string> allowed;
  if (preset == "case2_tanh") {
    ic.preset = InitialCondition::Preset::case2_tanh;
    ic.r0 = t.real("initial", "r0");
    ic.x0 = t.real("initial", "x0");
    ic.y0 = t.real("initial", "y0");
    ic.eps0 = t.real("initial", "eps0");
    ic.temp_factor = t.real_or("initial", "temp_factor", -0.5);
    allowed = {"preset", "r0", "x0", "y0", "eps0", "temp_factor"};
  } else if (preset == "dendrite_seed") {
    ic.preset = InitialCondition::Preset::dendrite_seed;
    ic.r0 = t.real("initial", "r0");
    ic.eps0 = t.real("initial", "eps0");
    ic.undercool = t.real("initial", "undercool");
    ic.x0 = t.real_or("initial", "x0", 0.0);
    ic.y0 = t.real_or("initial", "y0", 0.0);
    allowed = {"preset", "r0", "x0", "y0", "eps0", "undercool"};
  } else if (preset == "uniform") {
    ic.preset = InitialCondition::Preset::uniform;
    ic.phi_value = t.real("initial", "phi");
    ic.temp_value = t.real("initial", "temp");
    allowed = {"preset", "phi", "temp"};
  } else if (preset == "files") {
    ic.preset = InitialCondition::Preset::files;
    ic.phi_file = t.text("initial", "phi_file");
    ic.temp_file = t.text("initial", "temp_file");
    allowed = {"preset", "phi_file", "temp_file"};
  } else {
    throw InvalidValueError("initial.preset", "initial.preset: unknown preset '" + preset +
                                                  "' (case2_tanh, dendrite_seed, uniform, files)");
  }
  for (const std::string& key : known_keys().at("initial")) {
    if (t.has("initial", key) && !allowed.count(key)) {
      throw UnknownKeyError("initial." + key, "initial." + key + " is not a parameter of preset " + preset);
    }
  }

  c.sources.phi_pattern = t.text_or("sources", "phi_pattern", "");
  c.sources.temp_pattern = t.text_or("sources", "temp_pattern", "");

  c.output.dir = t.text_or("output", "dir", "out");
  c.output.snapshot_every = t.integer_or("output", "snapshot_every", 0);
  c.output.snapshot_times = t.reals_or("output", "snapshot_times");

  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  auto real = [&](const char* key, double v) { os << key << " = " << format_real(v) << '\n'; };
  auto boolean = [&](const char* key, bool v) { os << key << " = " << (v ? "true" : "false") << '\n'; };

  os << "[grid]\n";
  os << "nx = " << c.grid.nx << '\n' << "ny = " << c.grid.ny << '\n';
  real("x0", c.grid.x0);
  real("x1", c.grid.x1);
  real("y0", c.grid.y0);
  real("y1", c.grid.y1);

  os << "\n[run]\n";
  os << "scheme = " << to_string(c.scheme) << '\n';
  real("tau", c.tau);
  real("t_end", c.t_end);
  boolean("strict_energy", c.strict_energy);
  boolean("deterministic", c.deterministic);
  boolean("check_identity", c.check_identity);
  real("cg_tol", c.cg_tol);
  os << "cg_maxit = " << c.cg_maxit << '\n';

  const ModelParams& m = c.model;
  os << "\n[model]\n";
  real("eps", m.eps);
  real("lambda", m.lambda);
  real("diff", m.diff);
  real("latent", m.latent);
  real("sigma", m.sigma);
  os << "mode = " << m.mode << '\n';
  if (m.mobility.is_constant()) {
    real("rho", m.mobility.constant_value());
  } else if (m.mobility.description() == "linear") {
    real("rho_solid", m.mobility.rho_solid());
    real("rho_liquid", m.mobility.rho_liquid());
  } else {
    throw ConfigError("cannot serialise mobility '" + m.mobility.description() + "'");
  }
  real("s1", m.s1);
  real("s2", m.s2);
  real("s3", m.s3);
  real("s4", m.s4);
  real("bconst", m.bconst);
  real("reg", m.reg);

  const InitialCondition& ic = c.initial;
  os << "\n[initial]\n";
  os << "preset = " << to_string(ic.preset) << '\n';
  switch (ic.preset) {
    case InitialCondition::Preset::case2_tanh:
      real("r0", ic.r0);
      real("x0", ic.x0);
      real("y0", ic.y0);
      real("eps0", ic.eps0);
      real("temp_factor", ic.temp_factor);
      break;
    case InitialCondition::Preset::dendrite_seed:
      real("r0", ic.r0);
      real("x0", ic.x0);
      real("y0", ic.y0);
      real("eps0", ic.eps0);
      real("undercool", ic.undercool);
      break;
    case InitialCondition::Preset::uniform:
      real("phi", ic.phi_value);
      real("temp", ic.temp_value);
      break;
    case InitialCondition::Preset::files:
      os << "phi_file = " << ic.phi_file << '\n' << "temp_file = " << ic.temp_file << '\n';
      break;
  }

  if (!c.sources.empty()) {
    os << "\n[sources]\n";
    if (!c.sources.phi_pattern.empty()) os << "phi_pattern = " << c.sources.phi_pattern << '\n';
    if (!c.sources.temp_pattern.empty()) os << "temp_pattern = " << c.sources.temp_pattern << '\n';
  }

  os << "\n[output]\n";
  os << "dir = " << c.output.dir << '\n';
  os << "snapshot_every = " << c.output.snapshot_every << '\n';
  if (!c.output.snapshot_times.empty()) {
    os << "snapshot_times = ";
    for (std::size_t k = 0; k < c.output.snapshot_times.size(); ++k) {
      os << (k ? ", " : "") << format_real(c.output.snapshot_times[k]);
    }
    os << '\n';
  }
  return os.str();
}

void save_config(const RunConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << serialize(c);
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace dendrite
