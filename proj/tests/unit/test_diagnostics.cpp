#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "dendrite/diagnostics.hpp"
#include "dendrite/errors.hpp"
#include "dendrite/morphology.hpp"
#include "dendrite/snapshot.hpp"
#include "test_support.hpp"

using namespace dendrite;
using support::Rng;
using support::square;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dendrite_diag_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Random finite doubles across many magnitudes, including awkward ones.
double awkward_real(Rng& rng) {
  switch (rng.integer(0, 5)) {
    case 0: return rng.uniform() * std::pow(10.0, rng.integer(-300, 300));
    case 1: return std::nextafter(rng.uniform(), 2.0);
    case 2: return std::numeric_limits<double>::denorm_min() * rng.integer(1, 1000);
    case 3: return -0.0;
    case 4: return 0.1 * rng.integer(-100, 100);
    default: return rng.uniform(-1e6, 1e6);
  }
}

// Plus-shaped crystal with arms along both axes.
ScalarField cross(const GridSpec& g, double arm, double half_width) {
  return ScalarField::from_function(g, [&](double x, double y) {
    const bool horiz = std::abs(y) < half_width && std::abs(x) < arm;
    const bool vert = std::abs(x) < half_width && std::abs(y) < arm;
    return (horiz || vert) ? 1.0 : -1.0;
  });
}

}  // namespace

TEST_CASE("crystal area of pure states") {
  const GridSpec g = square(16);
  CHECK(crystal_area(ScalarField(g, -1.0)) == 0.0);
  CHECK(crystal_area(ScalarField(g, 1.0)) == 4.0);
  CHECK(crystal_area(ScalarField(g, 0.0)) == 2.0);
}

TEST_CASE("crystal area of the tanh disc") {
  const auto [phi0, temp0] = support::case2_initial(square(64));
  CHECK(crystal_area(phi0) == doctest::Approx(0.78645299678746827).epsilon(1e-12));
}

TEST_CASE("an undercooled disc grows monotonically") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(64));
  const ScalarField cold(phi0.grid(), -0.5);
  bdf2::State s = bdf2::bootstrap(phi0, cold, 1e-3, p).state;
  double prev = crystal_area(phi0);
  for (int n = 0; n < 100; ++n) {
    s = bdf2::step(s, 1e-3, p).first;
    const double a = crystal_area(s.phi_n);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("records of initial and stepped states") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(32));
  const bdf1::State s0 = bdf1::init_state(phi0, temp0, p);
  const EnergyRecord r0 = record(s0, nullptr, p);
  CHECK(r0.step == 0);
  CHECK(r0.xi == 1.0);
  CHECK(r0.a1 == 0.0);
  CHECK(r0.identity_residual == 0.0);
  CHECK(r0.e_modified == doctest::Approx(bdf1::modified_energy(s0, p) + 0.0).epsilon(1e-15));
  CHECK(r0.e_original == doctest::Approx(original_energy(phi0, temp0, p)));
  CHECK(r0.e_original >= p.temp_weight() / 2 * norm_sq(temp0));
  CHECK(r0.area == crystal_area(phi0));
  CHECK(r0.all_finite());

  const auto [s1, rep] = bdf1::step(s0, 0.01, p);
  const EnergyRecord r1 = record(s1, &rep, p);
  CHECK(r1.step == 1);
  CHECK(r1.time == doctest::Approx(0.01));
  CHECK(r1.xi == rep.xi);
  CHECK(r1.a1 == rep.a1);
  CHECK(r1.identity_residual == rep.identity_residual);
  CHECK(r1.e_modified <= r0.e_modified);

  StepOptions o;
  o.check_identity = false;
  const auto [s1b, rep_b] = bdf1::step(s0, 0.01, p, {}, o);
  CHECK(record(s1b, &rep_b, p).identity_residual == 0.0);

  const bdf2::State b0 = bdf2::initial_state(s0);
  const EnergyRecord rb = record(b0, nullptr, p);
  CHECK(rb.e_modified == doctest::Approx(r0.e_modified).epsilon(1e-14));
  CHECK(rb.e_original == r0.e_original);

  EnergyRecord bad = r0;
  bad.xi = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(bad.all_finite());
}

TEST_CASE("real formatting round-trips exactly") {
  Rng rng(80);
  for (int trial = 0; trial < 20000; ++trial) {
    const double v = awkward_real(rng);
    const std::string s = format_real(v);
    CHECK(s.find(',') == std::string::npos);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("ledger rows round-trip") {
  Rng rng(81);
  for (int trial = 0; trial < 2000; ++trial) {
    EnergyRecord r;
    r.step = rng.integer(0, 1000000);
    r.time = awkward_real(rng);
    r.e_modified = awkward_real(rng);
    r.e_original = awkward_real(rng);
    r.xi = awkward_real(rng);
    r.area = awkward_real(rng);
    r.identity_residual = awkward_real(rng);
    r.a1 = awkward_real(rng);
    const EnergyRecord back = parse_record(format_record(r));
    CHECK(std::memcmp(&back.time, &r.time, sizeof(double)) == 0);
    CHECK(back.step == r.step);
    CHECK(std::memcmp(&back.a1, &r.a1, sizeof(double)) == 0);
    CHECK(std::memcmp(&back.xi, &r.xi, sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(parse_record("1,2,3"), IoError);
  CHECK_THROWS_AS(parse_record("1,2,3,4,5,6,7,abc"), IoError);
}

TEST_CASE("ledger writer and reader") {
  const fs::path dir = scratch_dir("ledger");
  std::vector<EnergyRecord> rows;
  {
    LedgerWriter w(dir / "ledger.csv", false);
    for (int k = 0; k < 5; ++k) {
      EnergyRecord r;
      r.step = k;
      r.time = 0.1 * k;
      r.e_modified = 100.0 - k;
      r.e_original = 50.0 + 1.0 / 3.0;
      r.area = 1.0 + 0.01 * k;
      rows.push_back(r);
      w.append(r);
    }
    // a rise is counted but tolerated in non-strict mode
    EnergyRecord up = rows.back();
    up.step = 5;
    up.e_modified = 1000.0;
    w.append(up);
    rows.push_back(up);
    CHECK(w.violations() == 1);
  }
  std::ifstream in(dir / "ledger.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == kLedgerHeader);
  CHECK(read_ledger(dir / "ledger.csv") == rows);
  CHECK_THROWS_AS(read_ledger(dir / "missing.csv"), IoError);
}

TEST_CASE("strict ledger throws after writing the offending row") {
  const fs::path dir = scratch_dir("strict");
  EnergyRecord a, b;
  a.e_modified = 10.0;
  b.step = 1;
  b.e_modified = 10.0 + 1e-8;  // within 1e-9 relative
  EnergyRecord c = b;
  c.step = 2;
  c.e_modified = 10.1;
  {
    LedgerWriter w(dir / "l.csv", true);
    w.append(a);
    CHECK_NOTHROW(w.append(b));
    CHECK_THROWS_AS(w.append(c), EnergyLawViolation);
  }
  CHECK(read_ledger(dir / "l.csv").size() == 3);
  CHECK(energy_nonincreasing(10.0, 10.0));
  CHECK(energy_nonincreasing(-10.0, -10.0 + 1e-9));
  CHECK_FALSE(energy_nonincreasing(10.0, 10.0 + 1e-6));
}

TEST_CASE("snapshot round trip is bit-exact") {
  Rng rng(82);
  const fs::path dir = scratch_dir("snap");
  for (int trial = 0; trial < 20; ++trial) {
    const GridSpec g = GridSpec::make(rng.integer(4, 40), rng.integer(4, 40), -rng.uniform(0.1, 2), rng.uniform(0.1, 2),
                                      -rng.uniform(0.1, 2), rng.uniform(0.1, 2));
    FieldSnapshot snap;
    snap.field = ScalarField(g);
    for (std::size_t k = 0; k < snap.field.size(); ++k) snap.field[k] = awkward_real(rng);
    snap.time = awkward_real(rng);
    snap.name = trial % 2 ? "phi" : "temperature_0123";
    const auto bytes = encode_snapshot(snap);
    CHECK(bytes.size() == kSnapshotHeaderBytes + 8 * g.size());
    CHECK(std::memcmp(bytes.data(), "PFC1", 4) == 0);
    const fs::path path = dir / "s.pfc";
    write_snapshot(snap, path);
    const FieldSnapshot back = read_snapshot(path);
    CHECK(back.name == snap.name);
    CHECK(back.field.grid() == g);
    CHECK(std::memcmp(back.field.data(), snap.field.data(), 8 * g.size()) == 0);
    CHECK(std::memcmp(&back.time, &snap.time, 8) == 0);
  }
}

TEST_CASE("snapshot layout is little-endian at fixed offsets") {
  FieldSnapshot snap;
  snap.field = ScalarField(GridSpec::make(4, 5, -1, 1, -2, 2), 0.0);
  snap.field(0, 1) = 1.0;
  snap.time = 2.5;
  snap.name = "phi";
  const auto b = encode_snapshot(snap);
  auto u32 = [&](std::size_t off) {
    return std::uint32_t(b[off]) | std::uint32_t(b[off + 1]) << 8 | std::uint32_t(b[off + 2]) << 16 |
           std::uint32_t(b[off + 3]) << 24;
  };
  CHECK(u32(4) == kSnapshotVersion);
  CHECK(u32(8) == 4u);
  CHECK(u32(12) == 5u);
  // 1.0 is 0x3FF0000000000000; value index 1 starts at 72 + 8
  CHECK(b[80 + 7] == 0x3F);
  CHECK(b[80 + 6] == 0xF0);
  CHECK(std::string(reinterpret_cast<const char*>(&b[56])) == "phi");
}

TEST_CASE("snapshot reader rejects damaged files") {
  const fs::path dir = scratch_dir("damaged");
  FieldSnapshot snap;
  snap.field = ScalarField(square(8), 0.5);
  snap.name = "phi";
  auto bytes = encode_snapshot(snap);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 24);
  write_bytes(truncated, dir / "t.pfc");
  try {
    (void)read_snapshot(dir / "t.pfc");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(bytes.size())) != std::string::npos);
    CHECK(msg.find(std::to_string(truncated.size())) != std::string::npos);
  }

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_snapshot(magic), IoError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(decode_snapshot(version), IoError);
  CHECK_THROWS_AS(decode_snapshot(std::vector<unsigned char>(10, 0)), IoError);
  auto longer = bytes;
  longer.push_back(0);
  CHECK_THROWS_AS(decode_snapshot(longer), IoError);
  CHECK_THROWS_AS(read_snapshot(dir / "absent.pfc"), IoError);
}

TEST_CASE("checkpoint restore reproduces the state") {
  Rng rng(83);
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(16));
  bdf1::State s = bdf1::init_state(phi0, temp0, p);
  s = bdf1::step(s, 0.01, p).first;
  const auto bytes = checkpoint(s);
  CHECK(checkpoint_scheme(bytes) == 1);
  const bdf1::State back = restore_bdf1(bytes);
  CHECK(back.phi == s.phi);
  CHECK(back.temp == s.temp);
  CHECK(back.mu == s.mu);
  CHECK(back.r == s.r);
  CHECK(back.t == s.t);
  CHECK(back.n == s.n);
  CHECK_THROWS_AS(restore_bdf2(bytes), IoError);

  const bdf2::State b = bdf2::bootstrap(phi0, temp0, 0.01, p).state;
  const auto bytes2 = checkpoint(b);
  CHECK(checkpoint_scheme(bytes2) == 2);
  const bdf2::State b2 = restore_bdf2(bytes2);
  CHECK(b2.phi_n == b.phi_n);
  CHECK(b2.phi_nm1 == b.phi_nm1);
  CHECK(b2.temp_n == b.temp_n);
  CHECK(b2.temp_nm1 == b.temp_nm1);
  CHECK(b2.mu_n == b.mu_n);
  CHECK(b2.mu_nm1 == b.mu_nm1);
  CHECK(b2.r_n == b.r_n);
  CHECK(b2.r_nm1 == b.r_nm1);
  CHECK(b2.n == b.n);
  CHECK_THROWS_AS(restore_bdf1(bytes2), IoError);

  auto cut = bytes2;
  cut.resize(cut.size() / 2);
  CHECK_THROWS_AS(restore_bdf2(cut), IoError);
}

TEST_CASE("a two-level checkpoint stores the previous chemical potential") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(8));
  bdf2::State s = bdf2::bootstrap(phi0, temp0, 0.01, p).state;
  const bdf1::State s1 = restore_bdf1(checkpoint(bdf1::init_state(phi0, temp0, p)));
  // six fields at both levels versus three at one level
  CHECK(checkpoint(s).size() - checkpoint(s1).size() == 3 * 8 * s.phi_n.size() + 8);
  s.mu_nm1(2, 3) = 123.0;
  CHECK(restore_bdf2(checkpoint(s)).mu_nm1(2, 3) == 123.0);
}

TEST_CASE("stepping after a restore matches uninterrupted stepping bitwise") {
  const ModelParams p = support::case2_params();
  const auto [phi0, temp0] = support::case2_initial(square(24));
  const fs::path dir = scratch_dir("restart");

  bdf1::State a = bdf1::init_state(phi0, temp0, p);
  for (int n = 0; n < 10; ++n) a = bdf1::step(a, 0.01, p).first;
  bdf1::State b = bdf1::init_state(phi0, temp0, p);
  for (int n = 0; n < 5; ++n) b = bdf1::step(b, 0.01, p).first;
  write_bytes(checkpoint(b), dir / "c1.bin");
  b = restore_bdf1(read_bytes(dir / "c1.bin"));
  for (int n = 0; n < 5; ++n) b = bdf1::step(b, 0.01, p).first;
  CHECK(a.phi == b.phi);
  CHECK(a.temp == b.temp);
  CHECK(a.r == b.r);

  bdf2::State c = bdf2::bootstrap(phi0, temp0, 0.01, p).state;
  bdf2::State d = c;
  for (int n = 0; n < 9; ++n) c = bdf2::step(c, 0.01, p).first;
  for (int n = 0; n < 4; ++n) d = bdf2::step(d, 0.01, p).first;
  write_bytes(checkpoint(d), dir / "c2.bin");
  d = restore_bdf2(read_bytes(dir / "c2.bin"));
  for (int n = 0; n < 5; ++n) d = bdf2::step(d, 0.01, p).first;
  CHECK(c.phi_n == d.phi_n);
  CHECK(c.temp_n == d.temp_n);
  CHECK(c.mu_n == d.mu_n);
  CHECK(c.r_n == d.r_n);
  CHECK(c.t == d.t);
}

TEST_CASE("bilinear sampling and ray extents") {
  const GridSpec g = square(32);
  const ScalarField lin = ScalarField::from_function(g, [](double x, double y) { return 2 * x + 3 * y; });
  Rng rng(84);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = rng.uniform(g.x(0), g.x(31)), y = rng.uniform(g.y(0), g.y(31));
    CHECK(sample_bilinear(lin, x, y) == doctest::Approx(2 * x + 3 * y).epsilon(1e-12));
  }
  CHECK(sample_bilinear(lin, -5.0, g.y(3)) == doctest::Approx(lin(0, 3)));

  const ScalarField disc =
      ScalarField::from_function(square(128), [](double x, double y) { return 0.5 - std::hypot(x, y); });
  for (const double angle : {0.0, 0.7, 2.0, 4.5}) {
    CHECK(ray_extent(disc, 0.0, 0.0, angle) == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("branch analysis of synthetic shapes") {
  const GridSpec g = square(256);
  const BranchAnalysis plus = analyze_branches(cross(g, 0.8, 0.06), 0.0, 0.0);
  CHECK(plus.branch_count() == 4);
  CHECK(plus.axis_aligned());
  CHECK(plus.fourfold());
  CHECK(plus.axis_extent_min == doctest::Approx(0.8).epsilon(0.03));
  CHECK(plus.diagonal_extent_max < 0.2);
  for (const Arc& a : plus.arcs) {
    const double off = std::fmod(a.centre_deg + 45.0, 90.0) - 45.0;
    CHECK(std::abs(off) < 2.0);
  }

  const ScalarField disc = ScalarField::from_function(g, [](double x, double y) { return 0.5 - std::hypot(x, y); });
  const BranchAnalysis round = analyze_branches(disc, 0.0, 0.0);
  CHECK(round.full_circle);
  CHECK_FALSE(round.fourfold());

  // a cross rotated by 45 degrees has four diagonal arms
  const ScalarField xshape = ScalarField::from_function(g, [](double x, double y) {
    const double u = (x + y) / std::sqrt(2.0), v = (x - y) / std::sqrt(2.0);
    return ((std::abs(u) < 0.06 && std::abs(v) < 0.8) || (std::abs(v) < 0.06 && std::abs(u) < 0.8)) ? 1.0 : -1.0;
  });
  const BranchAnalysis diag = analyze_branches(xshape, 0.0, 0.0);
  CHECK_FALSE(diag.fourfold());

  // three arms only
  const ScalarField tee = ScalarField::from_function(g, [](double x, double y) {
    return ((std::abs(y) < 0.06 && std::abs(x) < 0.8) || (std::abs(x) < 0.06 && y > 0 && y < 0.8)) ? 1.0 : -1.0;
  });
  CHECK(analyze_branches(tee, 0.0, 0.0).branch_count() <= 3);
  CHECK_FALSE(analyze_branches(tee, 0.0, 0.0).fourfold());
}
