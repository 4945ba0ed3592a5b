#include <set>
#include <string>

#include "doctest.h"
#include "palmseg/augment.hpp"
#include "palmseg/errors.hpp"
#include "palmseg/rng.hpp"
#include "palmseg/transforms.hpp"
#include "synthetic.hpp"

using namespace palmseg;

namespace {

std::vector<ImageSample> noise_sources(size_t count, int size,
                                       uint64_t seed) {
  Rng rng(seed);
  std::vector<ImageSample> out(count);
  for (size_t i = 0; i < count; ++i) {
    out[i].id = "src_" + std::to_string(i);
    out[i].image = GrayImage::filled(size, size, 0);
    for (uint8_t& v : out[i].image.pixels) v = uint8_t(rng.next_below(256));
    out[i].mask = GrayImage::filled(size, size, 0);
    for (uint8_t& v : out[i].mask.pixels)
      v = rng.next_below(4) == 0 ? 255 : 0;
  }
  return out;
}

bool is_binary(const GrayImage& img) {
  for (uint8_t v : img.pixels)
    if (v != 0 && v != 255) return false;
  return true;
}

bool same_pixels(const ImageSample& a, const ImageSample& b) {
  return a.image.pixels == b.image.pixels && a.mask.pixels == b.mask.pixels;
}

}  // namespace

TEST_CASE("augment_dataset multiplies 1039 sources into 4156 samples") {
  std::vector<ImageSample> sources = noise_sources(1039, 8, 11);
  AugmentConfig config;
  config.multiplier = 4;
  std::vector<ImageSample> out = augment_dataset(sources, config);
  CHECK(out.size() == 4156);

  std::set<std::string> ids;
  for (const ImageSample& s : out) ids.insert(s.id);
  CHECK(ids.size() == out.size());
  for (const ImageSample& s : out) CHECK(is_binary(s.mask));
}

TEST_CASE("copy zero is the untouched source") {
  std::vector<ImageSample> sources = noise_sources(3, 8, 12);
  AugmentConfig config;
  config.multiplier = 3;
  std::vector<ImageSample> out = augment_dataset(sources, config);
  REQUIRE(out.size() == 9);
  for (size_t i = 0; i < 3; ++i) {
    const ImageSample& base = out[i * 3];
    CHECK(base.id == sources[i].id);
    CHECK(base.lineage.empty());
    CHECK(same_pixels(base, sources[i]));
    CHECK(out[i * 3 + 1].id == sources[i].id + "__aug1");
    CHECK(out[i * 3 + 2].id == sources[i].id + "__aug2");
  }
}

TEST_CASE("multiplier one with everything off is an identity copy") {
  std::vector<ImageSample> sources = noise_sources(4, 8, 13);
  AugmentConfig config;
  config.multiplier = 1;
  config.enable_hflip = false;
  config.enable_ssr = false;
  config.enable_brightness_contrast = false;
  config.enable_clahe = false;
  std::vector<ImageSample> out = augment_dataset(sources, config);
  REQUIRE(out.size() == sources.size());
  for (size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i].id == sources[i].id);
    CHECK(same_pixels(out[i], sources[i]));
  }
}

TEST_CASE("the same seed reproduces every byte") {
  std::vector<ImageSample> sources = noise_sources(6, 16, 14);
  AugmentConfig config;
  config.multiplier = 4;
  config.seed = 99;
  std::vector<ImageSample> a = augment_dataset(sources, config);
  std::vector<ImageSample> b = augment_dataset(sources, config);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(same_pixels(a[i], b[i]));
    CHECK(a[i].lineage == b[i].lineage);
  }

  config.seed = 100;
  std::vector<ImageSample> c = augment_dataset(sources, config);
  bool any_differ = false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!same_pixels(a[i], c[i])) any_differ = true;
  CHECK(any_differ);
}

TEST_CASE("masks survive the full pipeline binary") {
  std::vector<ImageSample> sources;
  for (int i = 0; i < 8; ++i)
    sources.push_back(testsupport::make_curve_sample(32, 200 + uint64_t(i)));
  AugmentConfig config;
  config.multiplier = 6;
  config.hflip_p = 1.0;
  config.ssr_p = 1.0;
  config.brightness_contrast_p = 1.0;
  config.clahe_p = 1.0;
  std::vector<ImageSample> out = augment_dataset(sources, config);
  CHECK(out.size() == 48);
  for (const ImageSample& s : out) {
    CHECK(is_binary(s.mask));
    CHECK(s.image.width == 32);
    CHECK(s.image.height == 32);
  }
}

TEST_CASE("geometric transforms hit image and mask in lockstep") {
  // With the mask equal to the image, a mirror (exact on both layers) must
  // keep them equal through the whole pipeline.
  ImageSample twin;
  twin.id = "twin";
  twin.image = GrayImage::filled(16, 16, 0);
  Rng rng(15);
  for (uint8_t& v : twin.image.pixels)
    v = rng.next_below(2) == 0 ? 0 : 255;
  twin.mask = twin.image;

  AugmentConfig config;
  config.multiplier = 8;
  config.enable_hflip = true;
  config.hflip_p = 1.0;
  config.enable_ssr = false;
  config.enable_brightness_contrast = false;
  config.enable_clahe = false;
  for (const ImageSample& s : augment_dataset({twin}, config)) {
    CHECK(s.image.pixels == s.mask.pixels);
  }

  // The warp itself is one shared coordinate map: nearest on both layers of
  // an identical pair gives identical outputs.
  AffineParams params{0.05, -0.03, 1.06, 9.0};
  GrayImage wi = warp_affine(twin.image, params, Interp::Nearest);
  GrayImage wm = warp_affine(twin.mask, params, Interp::Nearest);
  CHECK(wi.pixels == wm.pixels);
}

TEST_CASE("shift_scale_rotate rejects parameters outside the limits") {
  ImageSample s = testsupport::make_curve_sample(16, 1);
  SsrLimits limits;
  CHECK_THROWS_AS(
      shift_scale_rotate(s, AffineParams{0.2, 0.0, 1.0, 0.0}, limits),
      ArgumentError);
  CHECK_THROWS_AS(
      shift_scale_rotate(s, AffineParams{0.0, 0.0, 1.2, 0.0}, limits),
      ArgumentError);
  CHECK_THROWS_AS(
      shift_scale_rotate(s, AffineParams{0.0, 0.0, 1.0, 20.0}, limits),
      ArgumentError);
  CHECK_NOTHROW(
      shift_scale_rotate(s, AffineParams{0.1, -0.1, 0.9, -15.0}, limits));
}

TEST_CASE("lineage names every applied transform") {
  std::vector<ImageSample> sources = noise_sources(2, 16, 16);
  AugmentConfig config;
  config.multiplier = 3;
  config.hflip_p = 1.0;
  config.ssr_p = 1.0;
  config.brightness_contrast_p = 1.0;
  config.clahe_p = 1.0;
  std::vector<ImageSample> out = augment_dataset(sources, config);

  std::string manifest = lineage_manifest(out);
  size_t lines = 0;
  for (char c : manifest) lines += c == '\n';
  CHECK(lines == out.size());
  CHECK(manifest.find("src_0\n") != std::string::npos);
  CHECK(manifest.find("src_0__aug1\thflip()") != std::string::npos);
  CHECK(manifest.find("shift_scale_rotate(dx=") != std::string::npos);
  CHECK(manifest.find("brightness_contrast(db=") != std::string::npos);
  CHECK(manifest.find("clahe(clip=2.00,tiles=8x8)") != std::string::npos);

  for (const ImageSample& s : out) {
    if (s.id.find("__aug") != std::string::npos) {
      CHECK(s.lineage.size() == 4);
    } else {
      CHECK(s.lineage.empty());
    }
  }
}

TEST_CASE("resize_to shrinks both layers and keeps the mask binary") {
  ImageSample s = testsupport::make_curve_sample(64, 17);
  ImageSample small = resize_to(s, 16);
  CHECK(small.image.width == 16);
  CHECK(small.image.height == 16);
  CHECK(small.mask.width == 16);
  CHECK(small.mask.height == 16);
  CHECK(is_binary(small.mask));
  CHECK(small.id == s.id);
}

TEST_CASE("augment config validation") {
  AugmentConfig config;
  CHECK_NOTHROW(config.validate());

  AugmentConfig bad = config;
  bad.multiplier = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = config;
  bad.hflip_p = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = config;
  bad.ssr.scale_lo = 1.2;
  bad.ssr.scale_hi = 0.9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = config;
  bad.ssr.max_shift = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = config;
  bad.clahe_tiles = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = config;
  bad.max_contrast = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
