#ifndef DENDRITE_SNAPSHOT_HPP_
#define DENDRITE_SNAPSHOT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dendrite/bdf1.hpp"
#include "dendrite/bdf2.hpp"
#include "dendrite/grid.hpp"

namespace dendrite {

/// A single field with its grid and time stamp.
///
/// On disk (all integers and reals little-endian):
///
///   offset  size  content
///        0     4  magic "PFC1"
///        4     4  format version (uint32, currently 1)
///        8     8  nx, ny (uint32 each)
///       16    32  x0, x1, y0, y1 (float64)
///       48     8  time (float64)
///       56    16  field name, NUL padded
///       72  8 nx ny  values, index i * ny + j
struct FieldSnapshot {
  ScalarField field;
  double time = 0.0;
  std::string name;

  bool operator==(const FieldSnapshot&) const = default;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 72;
inline constexpr std::size_t kSnapshotNameBytes = 16;

std::vector<unsigned char> encode_snapshot(const FieldSnapshot& snap);
FieldSnapshot decode_snapshot(const std::vector<unsigned char>& bytes, const std::string& origin = "snapshot");

/// Throws IoError on I/O failure, bad magic or version, and truncated or
/// oversized payloads (naming expected and actual byte counts).
void write_snapshot(const FieldSnapshot& snap, const std::filesystem::path& path);
FieldSnapshot read_snapshot(const std::filesystem::path& path);

/// Complete serialisation of a scheme state, every field and scalar at every
/// stored time level. Restoring and stepping reproduces uninterrupted
/// stepping bit for bit.
std::vector<unsigned char> checkpoint(const bdf1::State& s);
std::vector<unsigned char> checkpoint(const bdf2::State& s);
bdf1::State restore_bdf1(const std::vector<unsigned char>& bytes);
bdf2::State restore_bdf2(const std::vector<unsigned char>& bytes);
/// 1 or 2, from the checkpoint header.
int checkpoint_scheme(const std::vector<unsigned char>& bytes);

void write_bytes(const std::vector<unsigned char>& bytes, const std::filesystem::path& path);
std::vector<unsigned char> read_bytes(const std::filesystem::path& path);

}  // namespace dendrite

#endif  // DENDRITE_SNAPSHOT_HPP_
