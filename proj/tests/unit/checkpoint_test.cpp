#include <cstring>
#include <fstream>

#include "doctest.h"
#include "palmseg/checkpoint.hpp"
#include "palmseg/rng.hpp"
#include "palmseg/unet.hpp"
#include "synthetic.hpp"

using namespace palmseg;
using testsupport::TempDir;

namespace {

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

void dump(const std::filesystem::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

Checkpoint sample_checkpoint() {
  Checkpoint ckpt;
  ckpt.config_text = "depth = 1\n";
  ckpt.entries.push_back({"alpha", {2, 3}, {1, 2, 3, 4, 5, 6}});
  ckpt.entries.push_back({"beta", {2}, {-1.5f, 2.5f}});
  return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round-trip is byte-exact") {
  TempDir dir;
  auto path = dir.path() / "a.ckpt";
  auto path2 = dir.path() / "b.ckpt";
  Checkpoint ckpt = sample_checkpoint();
  save_checkpoint(ckpt, path);
  Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config_text == ckpt.config_text);
  REQUIRE(loaded.entries.size() == 2);
  CHECK(loaded.entries[0].name == "alpha");
  CHECK(loaded.entries[0].shape == Shape{2, 3});
  CHECK(loaded.entries[0].values == ckpt.entries[0].values);
  save_checkpoint(loaded, path2);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("corrupted containers raise typed faults") {
  TempDir dir;
  auto path = dir.path() / "c.ckpt";
  save_checkpoint(sample_checkpoint(), path);
  std::vector<char> good = slurp(path);

  auto fault_of = [&](const std::vector<char>& bytes) {
    dump(path, bytes);
    try {
      load_checkpoint(path);
    } catch (const CheckpointError& e) {
      return e.fault();
    }
    return CheckpointError::Fault::BadHeader;  // unreachable on success
  };

  std::vector<char> magic = good;
  magic[0] = 'X';
  CHECK(fault_of(magic) == CheckpointError::Fault::BadHeader);

  std::vector<char> version = good;
  version[8] = 9;
  CHECK(fault_of(version) == CheckpointError::Fault::BadHeader);

  std::vector<char> cut(good.begin(), good.end() - 3);
  CHECK(fault_of(cut) == CheckpointError::Fault::Truncated);

  std::vector<char> extra = good;
  extra.push_back(0);
  CHECK(fault_of(extra) == CheckpointError::Fault::TrailingData);

  dump(path, good);
  CHECK_NOTHROW(load_checkpoint(path));
}

TEST_CASE("model save/load round-trips bytes, outputs and counts") {
  TempDir dir;
  UNetConfig c;
  c.depth = 1;
  c.base_channels = 4;
  Model m = build_unet<float>(c, 13);
  auto path = dir.path() / "m.ckpt";
  auto path2 = dir.path() / "m2.ckpt";
  save_model(m, path);
  Model loaded = load_model(path);
  CHECK(param_count(loaded) == param_count(m));
  save_model(loaded, path2);
  CHECK(slurp(path) == slurp(path2));

  Rng rng(4);
  std::vector<float> xv(64);
  for (float& v : xv) v = float(rng.next_double());
  Tensor x = Tensor::from_vector({1, 1, 8, 8}, xv);
  Tensor ya = unet_forward(m, x);
  Tensor yb = unet_forward(loaded, x);
  CHECK(std::memcmp(ya.data().data(), yb.data().data(),
                    sizeof(float) * size_t(ya.numel())) == 0);
}

TEST_CASE("loading a checkpoint with a flipped shape fails") {
  TempDir dir;
  UNetConfig c;
  c.depth = 1;
  c.base_channels = 4;
  Model m = build_unet<float>(c, 13);
  auto path = dir.path() / "m.ckpt";
  save_model(m, path);

  Checkpoint raw = load_checkpoint(path);
  std::swap(raw.entries[0].shape[2], raw.entries[0].shape[1]);
  auto bad = dir.path() / "bad.ckpt";
  save_checkpoint(raw, bad);
  try {
    load_model(bad);
    FAIL("expected a shape mismatch");
  } catch (const CheckpointError& e) {
    CHECK(e.fault() == CheckpointError::Fault::ShapeMismatch);
  }

  Checkpoint renamed = load_checkpoint(path);
  renamed.entries[0].name = "not_a_layer";
  auto bad2 = dir.path() / "bad2.ckpt";
  save_checkpoint(renamed, bad2);
  CHECK_THROWS_AS(load_model(bad2), CheckpointError);
}
