#include "dendrite/diagnostics.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dendrite/errors.hpp"

namespace dendrite {

bool EnergyRecord::all_finite() const {
  return std::isfinite(time) && std::isfinite(e_modified) && std::isfinite(e_original) && std::isfinite(xi) &&
         std::isfinite(area) && std::isfinite(identity_residual) && std::isfinite(a1);
}

double crystal_area(const ScalarField& phi) {
  CompensatedSum sum;
  for (double v : phi.values()) sum.add(0.5 * (1.0 + v));
  return sum.value() * phi.grid().cell_area();
}

namespace {

EnergyRecord from_report(long n, double t, double e_mod, const ScalarField& phi, const ScalarField& temp,
                         const StepReport* report, const ModelParams& p) {
  EnergyRecord r;
  r.step = n;
  r.time = t;
  r.e_modified = e_mod;
  r.e_original = original_energy(phi, temp, p);
  r.area = crystal_area(phi);
  if (report) {
    r.xi = report->xi;
    r.a1 = report->a1;
    r.identity_residual = std::isnan(report->identity_residual) ? 0.0 : report->identity_residual;
  }
  return r;
}

}  // namespace

EnergyRecord record(const bdf1::State& s, const StepReport* report, const ModelParams& p) {
  return from_report(s.n, s.t, bdf1::modified_energy(s, p), s.phi, s.temp, report, p);
}

EnergyRecord record(const bdf2::State& s, const StepReport* report, const ModelParams& p) {
  return from_report(s.n, s.t, bdf2::modified_energy(s, p), s.phi_n, s.temp_n, report, p);
}

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

std::string format_record(const EnergyRecord& r) {
  std::string line = std::to_string(r.step);
  for (double v : {r.time, r.e_modified, r.e_original, r.xi, r.area, r.identity_residual, r.a1}) {
    line += ',';
    line += format_real(v);
  }
  return line;
}

EnergyRecord parse_record(const std::string& line) {
  std::array<std::string, 8> cells;
  std::size_t col = 0;
  for (char c : line) {
    if (c == ',') {
      if (++col >= cells.size()) throw IoError("ledger row has more than 8 columns: " + line);
    } else if (c != '\r') {
      cells[col] += c;
    }
  }
  if (col != cells.size() - 1) throw IoError("ledger row has " + std::to_string(col + 1) + " columns: " + line);

  auto real = [&](const std::string& cell) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
      throw IoError("malformed number '" + cell + "' in ledger row: " + line);
    }
    return v;
  };
  EnergyRecord r;
  {
    const std::string& cell = cells[0];
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), r.step);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
      throw IoError("malformed step '" + cell + "' in ledger row: " + line);
    }
  }
  r.time = real(cells[1]);
  r.e_modified = real(cells[2]);
  r.e_original = real(cells[3]);
  r.xi = real(cells[4]);
  r.area = real(cells[5]);
  r.identity_residual = real(cells[6]);
  r.a1 = real(cells[7]);
  return r;
}

bool energy_nonincreasing(double e_before, double e_after) {
  return e_after <= e_before + 1e-9 * std::abs(e_before);
}

LedgerWriter::LedgerWriter(const std::filesystem::path& path, bool strict) : path_(path), strict_(strict) {
  file_ = std::fopen(path.string().c_str(), "wb");
  if (!file_) throw IoError("cannot open ledger " + path.string() + " for writing");
  std::fputs(kLedgerHeader, file_);
  std::fputc('\n', file_);
}

LedgerWriter::~LedgerWriter() {
  if (file_) std::fclose(file_);
}

void LedgerWriter::append(const EnergyRecord& r) {
  const std::string line = format_record(r);
  if (std::fputs(line.c_str(), file_) < 0 || std::fputc('\n', file_) == EOF) {
    throw IoError("write failed on ledger " + path_.string());
  }
  const bool rose = last_ && !energy_nonincreasing(last_->e_modified, r.e_modified);
  const EnergyRecord prev = last_.value_or(r);
  last_ = r;
  if (rose) {
    ++violations_;
    if (strict_) {
      flush();
      std::ostringstream os;
      os.precision(17);
      os << "modified energy rose from " << prev.e_modified << " (step " << prev.step << ") to " << r.e_modified
         << " (step " << r.step << ")";
      throw EnergyLawViolation(os.str());
    }
  }
}

void LedgerWriter::flush() {
  if (file_) std::fflush(file_);
}

std::vector<EnergyRecord> read_ledger(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ledger " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty ledger " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLedgerHeader) throw IoError("unexpected ledger header in " + path.string() + ": " + line);
  std::vector<EnergyRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_record(line));
  }
  return rows;
}

}  // namespace dendrite
