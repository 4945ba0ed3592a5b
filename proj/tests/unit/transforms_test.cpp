#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "palmseg/baseline.hpp"
#include "palmseg/rng.hpp"
#include "palmseg/transforms.hpp"

using namespace palmseg;

namespace {

GrayImage noise_image(int w, int h, uint64_t seed, int lo = 0, int hi = 255) {
  Rng rng(seed);
  GrayImage img = GrayImage::filled(w, h, 0);
  for (uint8_t& v : img.pixels) {
    v = uint8_t(lo + rng.next_below(hi - lo + 1));
  }
  return img;
}

double mean_of(const GrayImage& img) {
  double total = std::accumulate(img.pixels.begin(), img.pixels.end(), 0.0);
  return total / double(img.pixels.size());
}

double std_of(const GrayImage& img) {
  double m = mean_of(img);
  double acc = 0;
  for (uint8_t v : img.pixels) acc += (v - m) * (v - m);
  return std::sqrt(acc / double(img.pixels.size()));
}

bool within_band(const GrayImage& a, const GrayImage& b, int band) {
  GrayImage da = dilate(a, band);
  GrayImage db = dilate(b, band);
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    if (a.pixels[i] != 0 && db.pixels[i] == 0) return false;
    if (b.pixels[i] != 0 && da.pixels[i] == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("resize identity and binary preservation") {
  GrayImage img = noise_image(16, 16, 1);
  GrayImage same = resize(img, 16, 16, Interp::Bilinear);
  CHECK(same.pixels == img.pixels);

  // Checkerboard mask keeps only {0,255} through nearest resampling.
  GrayImage board = GrayImage::filled(512, 512, 0);
  for (int y = 0; y < 512; ++y)
    for (int x = 0; x < 512; ++x) {
      if (((x / 16) + (y / 16)) % 2 == 0) board.at(x, y) = 255;
    }
  GrayImage small = resize(board, 256, 256, Interp::Nearest);
  std::set<uint8_t> values(small.pixels.begin(), small.pixels.end());
  for (uint8_t v : values) CHECK((v == 0 || v == 255));
}

TEST_CASE("resize preserves the mean of a smooth ramp within 2%") {
  GrayImage ramp = GrayImage::filled(64, 64, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      ramp.at(x, y) = uint8_t((x * 255) / 63);
    }
  GrayImage shrunk = resize(ramp, 40, 40, Interp::Bilinear);
  CHECK(std::fabs(mean_of(shrunk) - mean_of(ramp)) / mean_of(ramp) < 0.02);
  GrayImage grown = resize(ramp, 100, 100, Interp::Bilinear);
  CHECK(std::fabs(mean_of(grown) - mean_of(ramp)) / mean_of(ramp) < 0.02);
}

TEST_CASE("hflip mirrors, preserves counts and is an involution") {
  GrayImage img = noise_image(9, 5, 2);
  GrayImage flipped = hflip(img);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 9; ++x) {
      CHECK(flipped.at(x, y) == img.at(8 - x, y));
    }
  CHECK(hflip(flipped).pixels == img.pixels);

  GrayImage edge = GrayImage::filled(8, 8, 0);
  for (int y = 0; y < 8; ++y) edge.at(0, y) = 255;
  GrayImage moved = hflip(edge);
  for (int y = 0; y < 8; ++y) {
    CHECK(moved.at(7, y) == 255);
    CHECK(moved.at(0, y) == 0);
  }
  size_t before = 0, after = 0;
  for (uint8_t v : edge.pixels) before += v != 0;
  for (uint8_t v : moved.pixels) after += v != 0;
  CHECK(before == after);
}

TEST_CASE("warp_affine identity and validation") {
  GrayImage img = noise_image(12, 10, 3);
  AffineParams id;
  CHECK(warp_affine(img, id, Interp::Nearest).pixels == img.pixels);
  CHECK(warp_affine(img, id, Interp::Bilinear).pixels == img.pixels);

  AffineParams bad;
  bad.scale = 0.0;
  CHECK_THROWS_AS(warp_affine(img, bad, Interp::Nearest), ArgumentError);
}

TEST_CASE("warp_affine keeps nearest-resampled masks binary") {
  Rng rng(4);
  GrayImage mask = GrayImage::filled(16, 16, 0);
  for (uint8_t& v : mask.pixels) v = rng.next_below(2) ? 255 : 0;
  for (int trial = 0; trial < 10; ++trial) {
    AffineParams p;
    p.shift_x = rng.uniform(-0.1, 0.1);
    p.shift_y = rng.uniform(-0.1, 0.1);
    p.scale = rng.uniform(0.9, 1.1);
    p.angle_deg = rng.uniform(-15, 15);
    GrayImage warped = warp_affine(mask, p, Interp::Nearest);
    for (uint8_t v : warped.pixels) CHECK((v == 0 || v == 255));
  }
}

TEST_CASE("a quarter turn moves a horizontal bar onto the vertical") {
  const int n = 64;
  GrayImage bar = GrayImage::filled(n, n, 0);
  for (int y = n / 2 - 2; y <= n / 2 + 2; ++y)
    for (int x = 8; x < n - 8; ++x) bar.at(x, y) = 255;
  GrayImage expected = GrayImage::filled(n, n, 0);
  for (int x = n / 2 - 2; x <= n / 2 + 2; ++x)
    for (int y = 8; y < n - 8; ++y) expected.at(x, y) = 255;

  AffineParams quarter;
  quarter.angle_deg = 90.0;
  GrayImage turned = warp_affine(bar, quarter, Interp::Nearest);
  CHECK(within_band(turned, expected, 2));
}

TEST_CASE("brightness_contrast identity, formula point and clamping") {
  GrayImage img = noise_image(8, 8, 5);
  CHECK(brightness_contrast(img, 0.0, 0.0).pixels == img.pixels);

  GrayImage mid = GrayImage::filled(2, 2, 128);
  CHECK(brightness_contrast(mid, 0.1, 0.0).pixels[0] == 154);

  GrayImage bright = GrayImage::filled(2, 2, 250);
  CHECK(brightness_contrast(bright, 0.2, 0.2).pixels[0] == 255);
  GrayImage dark = GrayImage::filled(2, 2, 5);
  CHECK(brightness_contrast(dark, -0.2, 0.2).pixels[0] == 0);
}

TEST_CASE("clahe keeps constants spatially flat and raises ramp contrast") {
  // Clip-limited equalization is not the identity on constants (the
  // redistributed excess shifts the CDF), but the output must stay
  // spatially constant and land within a few levels of the input.
  for (int v : {5, 77, 128, 200, 250}) {
    GrayImage flat = GrayImage::filled(32, 32, uint8_t(v));
    GrayImage eq_flat = clahe(flat, 2.0, 8, 8);
    for (uint8_t p : eq_flat.pixels) CHECK(p == eq_flat.pixels[0]);
    CHECK(std::abs(int(eq_flat.pixels[0]) - v) <= 3);
  }

  GrayImage low = GrayImage::filled(64, 64, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      low.at(x, y) = uint8_t(100 + (x * 40) / 63);  // narrow 100..140 ramp
    }
  GrayImage eq = clahe(low, 4.0, 8, 8);
  CHECK(std_of(eq) > std_of(low));

  GrayImage tiny = noise_image(4, 4, 6);
  CHECK_NOTHROW(clahe(tiny, 2.0, 8, 8));  // grid larger than the image
  CHECK_THROWS_AS(clahe(tiny, 0.0, 8, 8), ArgumentError);
  CHECK_THROWS_AS(clahe(tiny, 2.0, 0, 8), ArgumentError);
}
