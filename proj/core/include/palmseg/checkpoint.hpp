#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "palmseg/errors.hpp"
#include "palmseg/tensor.hpp"

namespace palmseg {

// Weight checkpoint container. Little-endian throughout:
//   magic "PSEGCKPT" (8 bytes)
//   u32 format version (currently 1)
//   u64 config length, config text (UTF-8)
//   u64 tensor count, then per tensor:
//     u64 name length, name
//     u32 rank, rank x i64 extents
//     product(extents) x f32 values
// Nothing may follow the last tensor. Faults map to CheckpointError kinds:
// bad magic or version -> BadHeader, short read -> Truncated, extra bytes ->
// TrailingData. Shape validation against an expected layout is the caller's
// job and reports ShapeMismatch.

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::string config_text;
  std::vector<CheckpointEntry> entries;
};

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace palmseg
