#include "dendrite/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dendrite/errors.hpp"

namespace dendrite {

namespace {

constexpr char kSnapshotMagic[4] = {'P', 'F', 'C', '1'};
constexpr char kCheckpointMagic[4] = {'P', 'F', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out_.push_back(static_cast<unsigned char>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) out_.push_back(static_cast<unsigned char>(v >> (8 * k)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void grid(const GridSpec& g) {
    u32(static_cast<std::uint32_t>(g.nx));
    u32(static_cast<std::uint32_t>(g.ny));
    f64(g.x0);
    f64(g.x1);
    f64(g.y0);
    f64(g.y1);
  }
  void values(const ScalarField& f) {
    out_.reserve(out_.size() + 8 * f.size());
    for (double v : f.values()) f64(v);
  }
  std::vector<unsigned char> take() { return std::move(out_); }

 private:
  std::vector<unsigned char> out_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& in, std::string origin) : in_(in), origin_(std::move(origin)) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > in_.size()) {
      throw IoError(origin_ + ": truncated " + what + ": expected " + std::to_string(pos_ + n) +
                    " bytes, found " + std::to_string(in_.size()));
    }
  }
  void raw(void* p, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(in_[pos_ + k]) << (8 * k);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(in_[pos_ + k]) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  GridSpec grid() {
    GridSpec g;
    g.nx = static_cast<int>(u32("header"));
    g.ny = static_cast<int>(u32("header"));
    g.x0 = f64("header");
    g.x1 = f64("header");
    g.y0 = f64("header");
    g.y1 = f64("header");
    if (g.nx <= 0 || g.ny <= 0 || !(g.x1 > g.x0) || !(g.y1 > g.y0)) {
      throw IoError(origin_ + ": invalid grid in header");
    }
    return g;
  }
  ScalarField values(const GridSpec& g, const char* what) {
    need(8 * g.size(), what);
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = f64(what);
    return f;
  }
  void finish() const {
    if (pos_ != in_.size()) {
      throw IoError(origin_ + ": trailing data: expected " + std::to_string(pos_) + " bytes, found " +
                    std::to_string(in_.size()));
    }
  }
  std::size_t position() const { return pos_; }

 private:
  const std::vector<unsigned char>& in_;
  std::string origin_;
  std::size_t pos_ = 0;
};

void check_magic(ByteReader& r, const char (&expect)[4], const std::string& origin) {
  char magic[4];
  r.raw(magic, 4, "header");
  if (std::memcmp(magic, expect, 4) != 0) {
    throw IoError(origin + ": bad magic, expected '" + std::string(expect, 4) + "'");
  }
}

void require_grid(const ScalarField& f, const GridSpec& g, const char* name) {
  if (!(f.grid() == g) || f.size() != g.size()) {
    throw std::invalid_argument(std::string("checkpoint: field ") + name + " is not on the state grid");
  }
}

void checkpoint_header(ByteWriter& w, std::uint32_t scheme, const GridSpec& g, long n, double t) {
  w.raw(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(scheme);
  w.grid(g);
  w.u64(static_cast<std::uint64_t>(n));
  w.f64(t);
}

struct CheckpointHeader {
  std::uint32_t scheme;
  GridSpec grid;
  long n;
  double t;
};

CheckpointHeader read_checkpoint_header(ByteReader& r) {
  check_magic(r, kCheckpointMagic, "checkpoint");
  const std::uint32_t version = r.u32("header");
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  CheckpointHeader h;
  h.scheme = r.u32("header");
  h.grid = r.grid();
  h.n = static_cast<long>(r.u64("header"));
  h.t = r.f64("header");
  return h;
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const FieldSnapshot& snap) {
  if (snap.name.size() > kSnapshotNameBytes) {
    throw std::invalid_argument("snapshot field name longer than 16 bytes: " + snap.name);
  }
  const GridSpec& g = snap.field.grid();
  if (snap.field.size() != g.size() || g.size() == 0) throw std::invalid_argument("snapshot of an empty field");
  ByteWriter w;
  w.raw(kSnapshotMagic, 4);
  w.u32(kSnapshotVersion);
  w.grid(g);
  w.f64(snap.time);
  char name[kSnapshotNameBytes] = {};
  std::memcpy(name, snap.name.data(), snap.name.size());
  w.raw(name, kSnapshotNameBytes);
  w.values(snap.field);
  return w.take();
}

FieldSnapshot decode_snapshot(const std::vector<unsigned char>& bytes, const std::string& origin) {
  ByteReader r(bytes, origin);
  check_magic(r, kSnapshotMagic, origin);
  const std::uint32_t version = r.u32("header");
  if (version != kSnapshotVersion) {
    throw IoError(origin + ": unsupported version " + std::to_string(version) + " (expected " +
                  std::to_string(kSnapshotVersion) + ")");
  }
  const GridSpec g = r.grid();
  FieldSnapshot snap;
  snap.time = r.f64("header");
  char name[kSnapshotNameBytes + 1] = {};
  r.raw(name, kSnapshotNameBytes, "header");
  snap.name = name;

  const std::size_t expected = kSnapshotHeaderBytes + 8 * g.size();
  if (bytes.size() != expected) {
    throw IoError(origin + ": payload size mismatch: expected " + std::to_string(expected) + " bytes, found " +
                  std::to_string(bytes.size()));
  }
  snap.field = r.values(g, "payload");
  r.finish();
  return snap;
}

void write_bytes(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_snapshot(const FieldSnapshot& snap, const std::filesystem::path& path) {
  write_bytes(encode_snapshot(snap), path);
}

FieldSnapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_bytes(path), path.string()); }

std::vector<unsigned char> checkpoint(const bdf1::State& s) {
  const GridSpec& g = s.phi.grid();
  require_grid(s.temp, g, "temp");
  require_grid(s.mu, g, "mu");
  ByteWriter w;
  checkpoint_header(w, 1, g, s.n, s.t);
  w.f64(s.r);
  w.values(s.phi);
  w.values(s.temp);
  w.values(s.mu);
  return w.take();
}

std::vector<unsigned char> checkpoint(const bdf2::State& s) {
  const GridSpec& g = s.phi_n.grid();
  require_grid(s.phi_nm1, g, "phi_nm1");
  require_grid(s.temp_n, g, "temp_n");
  require_grid(s.temp_nm1, g, "temp_nm1");
  require_grid(s.mu_n, g, "mu_n");
  require_grid(s.mu_nm1, g, "mu_nm1");
  ByteWriter w;
  checkpoint_header(w, 2, g, s.n, s.t);
  w.f64(s.r_n);
  w.f64(s.r_nm1);
  for (const ScalarField* f : {&s.phi_n, &s.phi_nm1, &s.temp_n, &s.temp_nm1, &s.mu_n, &s.mu_nm1}) w.values(*f);
  return w.take();
}

int checkpoint_scheme(const std::vector<unsigned char>& bytes) {
  ByteReader r(bytes, "checkpoint");
  return static_cast<int>(read_checkpoint_header(r).scheme);
}

bdf1::State restore_bdf1(const std::vector<unsigned char>& bytes) {
  ByteReader r(bytes, "checkpoint");
  const CheckpointHeader h = read_checkpoint_header(r);
  if (h.scheme != 1) throw IoError("checkpoint holds a scheme-" + std::to_string(h.scheme) + " state, not bdf1");
  bdf1::State s;
  s.n = h.n;
  s.t = h.t;
  s.r = r.f64("scalars");
  s.phi = r.values(h.grid, "phi");
  s.temp = r.values(h.grid, "temp");
  s.mu = r.values(h.grid, "mu");
  r.finish();
  return s;
}

bdf2::State restore_bdf2(const std::vector<unsigned char>& bytes) {
  ByteReader r(bytes, "checkpoint");
  const CheckpointHeader h = read_checkpoint_header(r);
  if (h.scheme != 2) throw IoError("checkpoint holds a scheme-" + std::to_string(h.scheme) + " state, not bdf2");
  bdf2::State s;
  s.n = h.n;
  s.t = h.t;
  s.r_n = r.f64("scalars");
  s.r_nm1 = r.f64("scalars");
  s.phi_n = r.values(h.grid, "phi_n");
  s.phi_nm1 = r.values(h.grid, "phi_nm1");
  s.temp_n = r.values(h.grid, "temp_n");
  s.temp_nm1 = r.values(h.grid, "temp_nm1");
  s.mu_n = r.values(h.grid, "mu_n");
  s.mu_nm1 = r.values(h.grid, "mu_nm1");
  r.finish();
  return s;
}

}  // namespace dendrite
