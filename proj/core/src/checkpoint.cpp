#include "palmseg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace palmseg {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_f32(std::ostream& out, float v) {
  put_u32(out, std::bit_cast<uint32_t>(v));
}

class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* dst, size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n)
      throw CheckpointError(CheckpointError::Fault::Truncated,
                            "checkpoint: file ends mid-record");
  }

  uint32_t u32() {
    char b[4];
    bytes(b, 4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | uint8_t(b[i]);
    return v;
  }

  uint64_t u64() {
    char b[8];
    bytes(b, 8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | uint8_t(b[i]);
    return v;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

private:
  std::istream& in_;
};

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw DataError("checkpoint: cannot open " + path.string() +
                    " for writing");
  out.write(kMagic, 8);
  put_u32(out, kVersion);
  put_u64(out, checkpoint.config_text.size());
  out.write(checkpoint.config_text.data(),
            static_cast<std::streamsize>(checkpoint.config_text.size()));
  put_u64(out, checkpoint.entries.size());
  for (const CheckpointEntry& e : checkpoint.entries) {
    if (shape_numel(e.shape) != static_cast<int64_t>(e.values.size()))
      throw ArgumentError("checkpoint: entry " + e.name + " holds " +
                          std::to_string(e.values.size()) +
                          " values for shape " + shape_str(e.shape));
    put_u64(out, e.name.size());
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_u32(out, static_cast<uint32_t>(e.shape.size()));
    for (int64_t d : e.shape) put_u64(out, static_cast<uint64_t>(d));
    for (float v : e.values) put_f32(out, v);
  }
  out.flush();
  if (!out)
    throw DataError("checkpoint: write to " + path.string() + " failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path.string());
  Reader r(in);

  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw CheckpointError(CheckpointError::Fault::BadHeader,
                          "checkpoint: " + path.string() +
                              " does not start with the expected magic");
  const uint32_t version = r.u32();
  if (version != kVersion)
    throw CheckpointError(CheckpointError::Fault::BadHeader,
                          "checkpoint: unsupported format version " +
                              std::to_string(version));

  Checkpoint ck;
  const uint64_t config_len = r.u64();
  ck.config_text.resize(config_len);
  if (config_len > 0) r.bytes(ck.config_text.data(), config_len);

  const uint64_t n_tensors = r.u64();
  ck.entries.reserve(n_tensors);
  for (uint64_t t = 0; t < n_tensors; ++t) {
    CheckpointEntry e;
    const uint64_t name_len = r.u64();
    e.name.resize(name_len);
    if (name_len > 0) r.bytes(e.name.data(), name_len);
    const uint32_t rank = r.u32();
    e.shape.resize(rank);
    uint64_t numel = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      const uint64_t extent = r.u64();
      if (extent == 0 ||
          extent > uint64_t(std::numeric_limits<int64_t>::max()) ||
          numel > (1ull << 40) / std::max<uint64_t>(extent, 1))
        throw CheckpointError(CheckpointError::Fault::BadHeader,
                              "checkpoint: entry " + e.name +
                                  " declares an invalid shape");
      e.shape[d] = static_cast<int64_t>(extent);
      numel *= extent;
    }
    e.values.resize(numel);
    for (uint64_t i = 0; i < numel; ++i)
      e.values[i] = std::bit_cast<float>(r.u32());
    ck.entries.push_back(std::move(e));
  }
  if (!r.at_end())
    throw CheckpointError(CheckpointError::Fault::TrailingData,
                          "checkpoint: " + path.string() +
                              " has bytes after the last tensor");
  return ck;
}

}  // namespace palmseg
