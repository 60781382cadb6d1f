#ifndef DENDRITE_CONFIG_HPP_
#define DENDRITE_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "dendrite/grid.hpp"
#include "dendrite/model.hpp"

namespace dendrite {

enum class Scheme { bdf1, bdf2 };
const char* to_string(Scheme s);

/// Named initial-condition presets.
///
///  case2_tanh    phi = tanh((r0 - (x-x0)^2 - (y-y0)^2) / eps0), T = temp_factor * phi
///  dendrite_seed phi as above, T = 0 where phi > 0 and -undercool elsewhere
///  uniform       phi = phi_value, T = temp_value
///  files         phi and T read from snapshot files
struct InitialCondition {
  enum class Preset { case2_tanh, dendrite_seed, uniform, files };
  Preset preset = Preset::case2_tanh;
  double r0 = 0.25;
  double x0 = 0.0;
  double y0 = 0.0;
  double eps0 = 0.1;
  double temp_factor = -0.5;
  double undercool = 0.6;
  double phi_value = 0.0;
  double temp_value = 0.0;
  std::string phi_file;
  std::string temp_file;

  bool operator==(const InitialCondition&) const = default;
};
const char* to_string(InitialCondition::Preset p);

/// Externally supplied forcing. Each pattern names one snapshot file per
/// time level, with "{n}" replaced by the level index (1, 2, ...). The file
/// for level n holds the forcing at t = n tau.
struct SourceSpec {
  std::string phi_pattern;
  std::string temp_pattern;
  bool empty() const { return phi_pattern.empty() && temp_pattern.empty(); }
  bool operator==(const SourceSpec&) const = default;
};

struct OutputSpec {
  std::string dir = "out";
  /// Write phi and T snapshots every k steps (0 disables).
  long snapshot_every = 0;
  /// Additional snapshot times; a step within tau/2 of a listed time writes.
  std::vector<double> snapshot_times;
  bool operator==(const OutputSpec&) const = default;
};

/// Everything needed to reproduce one run.
struct RunConfig {
  GridSpec grid;
  Scheme scheme = Scheme::bdf2;
  double tau = 0.0;
  double t_end = 0.0;
  ModelParams model;
  InitialCondition initial;
  SourceSpec sources;
  OutputSpec output;
  bool strict_energy = false;
  /// Sequential sub-solves, hence bit-identical reruns.
  bool deterministic = true;
  bool check_identity = true;
  double cg_tol = 1e-10;
  int cg_maxit = 500;

  /// Throws the ConfigKeyError subclass matching the first violation.
  void validate() const;
  /// Number of steps to reach t_end (rounded to the nearest whole step).
  long steps() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Config grammar, one item per line:
///
///   # comment            (also after a value)
///   [section]
///   key = value
///
/// Sections and keys:
///
///   [grid]    nx ny x0 x1 y0 y1                          all required
///   [run]     scheme tau t_end                           required
///             strict_energy deterministic check_identity cg_tol cg_maxit
///   [model]   eps lambda diff latent sigma s1 s2 s3 s4 bconst   required
///             rho  |  rho_solid rho_liquid               one form required
///             mode reg
///   [initial] preset                                     required
///             case2_tanh: r0 x0 y0 eps0 [temp_factor]
///             dendrite_seed: r0 eps0 undercool [x0 y0]
///             uniform: phi temp
///             files: phi_file temp_file
///   [sources] phi_pattern temp_pattern
///   [output]  dir snapshot_every snapshot_times (comma separated)
///
/// Unknown keys raise UnknownKeyError, absent required keys MissingKeyError,
/// unparsable or out-of-range values InvalidValueError. Keys in errors are
/// reported as "section.key".
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& c);
void save_config(const RunConfig& c, const std::filesystem::path& path);

}  // namespace dendrite

#endif  // DENDRITE_CONFIG_HPP_
