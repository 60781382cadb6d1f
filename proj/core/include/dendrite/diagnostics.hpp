#ifndef DENDRITE_DIAGNOSTICS_HPP_
#define DENDRITE_DIAGNOSTICS_HPP_

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dendrite/bdf1.hpp"
#include "dendrite/bdf2.hpp"
#include "dendrite/model.hpp"
#include "dendrite/scheme.hpp"

namespace dendrite {

/// One ledger row. Row 0 (no step taken yet) carries xi = 1, a1 = 0 and
/// identity_residual = 0; a step whose balance was not assembled also
/// records identity_residual = 0.
struct EnergyRecord {
  long step = 0;
  double time = 0.0;
  double e_modified = 0.0;
  double e_original = 0.0;
  double xi = 1.0;
  double area = 0.0;
  double identity_residual = 0.0;
  double a1 = 0.0;

  bool all_finite() const;
  bool operator==(const EnergyRecord&) const = default;
};

/// int (1 + phi) / 2 by the midpoint rule.
double crystal_area(const ScalarField& phi);

/// Ledger row for a state; `report` is the step that produced it (null for
/// the initial state).
EnergyRecord record(const bdf1::State& s, const StepReport* report, const ModelParams& p);
EnergyRecord record(const bdf2::State& s, const StepReport* report, const ModelParams& p);

inline constexpr const char* kLedgerHeader = "step,time,e_modified,e_original,xi,area,identity_residual,a1";

/// Shortest decimal that reads back to the same double, always with 17
/// significant digits and independent of the C locale.
std::string format_real(double v);
std::string format_record(const EnergyRecord& r);
EnergyRecord parse_record(const std::string& line);

/// Energy must not rise by more than 1e-9 |E^n| between consecutive rows.
bool energy_nonincreasing(double e_before, double e_after);

/// CSV ledger, one row per step. In strict mode a rise of the modified
/// energy throws EnergyLawViolation after the offending row is written.
class LedgerWriter {
 public:
  LedgerWriter(const std::filesystem::path& path, bool strict);
  ~LedgerWriter();
  LedgerWriter(const LedgerWriter&) = delete;
  LedgerWriter& operator=(const LedgerWriter&) = delete;

  void append(const EnergyRecord& r);
  void flush();
  const std::filesystem::path& path() const { return path_; }
  /// Number of rows where the energy rose, whether or not strict.
  long violations() const { return violations_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  bool strict_;
  long violations_ = 0;
  std::optional<EnergyRecord> last_;
};

std::vector<EnergyRecord> read_ledger(const std::filesystem::path& path);

}  // namespace dendrite

#endif  // DENDRITE_DIAGNOSTICS_HPP_
