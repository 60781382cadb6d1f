#ifndef DENDRITE_EXPERIMENTS_HPP_
#define DENDRITE_EXPERIMENTS_HPP_

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dendrite/config.hpp"
#include "dendrite/diagnostics.hpp"
#include "dendrite/morphology.hpp"

namespace dendrite {

/// Initial phi and T for a config.
std::pair<ScalarField, ScalarField> initial_fields(const RunConfig& c);

/// Forcing read from per-level snapshot files; empty when no pattern is set.
SourceTerms file_sources(const RunConfig& c);

/// Replaces every "{n}" in pattern with n.
std::string expand_pattern(const std::string& pattern, long n);

struct RunOptions {
  /// Write ledger.csv, config.cfg, snapshots and a final checkpoint here.
  std::optional<std::filesystem::path> out_dir;
  /// Continue from a checkpoint instead of the initial condition.
  std::optional<std::filesystem::path> resume;
  /// Stop after this many steps instead of at t_end.
  std::optional<long> max_steps;
  /// Keep phi and T of every listed snapshot time in the result.
  bool keep_snapshots = false;
  /// Called after every step with the new record.
  std::function<void(const EnergyRecord&)> on_record;
};

struct RunResult {
  std::vector<EnergyRecord> ledger;
  ScalarField phi;
  ScalarField temp;
  /// (time, phi, T) for each snapshot written, when keep_snapshots.
  std::vector<std::tuple<double, ScalarField, ScalarField>> snapshots;
  long energy_violations = 0;

  double max_xi_deviation() const;     // max |xi - 1| over steps >= 1
  double min_a1() const;               // over steps >= 1
  double max_identity_residual() const;
  bool energy_monotone() const { return energy_violations == 0; }
  bool area_strictly_increasing() const;
};

/// Runs one simulation. In strict-energy mode a rise of the modified energy
/// throws EnergyLawViolation; otherwise it is only counted.
RunResult simulate(const RunConfig& c, const RunOptions& opts = {});

/// Least-squares slope of log(error) against log(tau). Needs at least two
/// points with positive values.
double estimate_order(const std::vector<double>& errors, const std::vector<double>& taus);

/// The error at the smallest tau lies within a factor `factor` of the value
/// extrapolated from the two largest tau.
bool richardson_consistent(const std::vector<double>& errors, const std::vector<double>& taus, double factor = 10.0);

struct ConvergenceReport {
  double reference_tau = 0.0;
  double time = 0.0;
  std::vector<double> taus;
  std::vector<double> error_phi;
  std::vector<double> error_temp;
  double slope_phi = 0.0;
  double slope_temp = 0.0;
  double min_a1 = 0.0;

  bool richardson_ok() const;
};

/// Self-convergence study: one reference run at reference_tau and one run
/// per ladder entry, errors in discrete L2 at base.t_end. Every ladder tau
/// must be at least 10 times the reference.
ConvergenceReport run_accuracy(const RunConfig& base, const std::vector<double>& ladder, double reference_tau,
                               const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct StabilizerSet {
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  std::string label() const;
};
/// (0,0,0,0), (0.1,4,0,0), (0,0,5,5), (0.1,4,5,5)
std::vector<StabilizerSet> default_stabilizer_sets();

struct StabilityRun {
  double tau = 0.0;
  StabilizerSet set;
  long steps = 0;
  double max_xi_deviation = 0.0;
  double min_a1 = 0.0;
  double max_identity_residual = 0.0;
  bool energy_monotone = false;
};

/// One run per (tau, stabiliser set), `steps` steps each.
std::vector<StabilityRun> run_stability(const RunConfig& base, const std::vector<double>& taus,
                                        const std::vector<StabilizerSet>& sets, long steps,
                                        const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Snapshot times per latent-heat value K in {0.6, 0.8, 1.0, 1.2}.
const std::map<double, std::vector<double>>& dendrite_caption_times();

struct DendriteRun {
  double latent = 0.0;
  std::vector<double> times;
  RunResult result;
  BranchAnalysis branches;  // of the final phi
  double area_at(double t) const;
};

struct DendriteOptions {
  /// Replaces the per-K caption times.
  std::optional<std::vector<double>> times;
  /// Stops every run here; later snapshot times are dropped.
  std::optional<double> t_end;
  std::optional<std::filesystem::path> out_dir;
};

std::vector<DendriteRun> run_dendrite(const RunConfig& base, const std::vector<double>& latents,
                                      const DendriteOptions& opts = {});

/// Discrete L2 norm of a - b.
double l2_distance(const ScalarField& a, const ScalarField& b);

}  // namespace dendrite

#endif  // DENDRITE_EXPERIMENTS_HPP_
