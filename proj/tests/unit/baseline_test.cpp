#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>

#include "doctest.h"
#include "palmseg/baseline.hpp"
#include "palmseg/errors.hpp"
#include "palmseg/rng.hpp"
#include "synthetic.hpp"

using namespace palmseg;

namespace {

GrayImage noise_image(int w, int h, uint64_t seed) {
  Rng rng(seed);
  GrayImage img = GrayImage::filled(w, h, 0);
  for (uint8_t& v : img.pixels) v = uint8_t(rng.next_below(256));
  return img;
}

size_t count_on(const GrayImage& img) {
  size_t n = 0;
  for (uint8_t v : img.pixels) n += v != 0;
  return n;
}

}  // namespace

TEST_CASE("desaturate uses the luma weights") {
  RgbImage white = RgbImage::filled(3, 3, 255, 255, 255);
  for (uint8_t v : desaturate(white).pixels) CHECK(v == 255);

  RgbImage red = RgbImage::filled(3, 3, 255, 0, 0);
  for (uint8_t v : desaturate(red).pixels) CHECK(v == 76);

  RgbImage gray = RgbImage::filled(3, 3, 120, 120, 120);
  for (uint8_t v : desaturate(gray).pixels) CHECK(v == 120);

  RgbImage bad;
  bad.width = 2;
  bad.height = 2;
  bad.pixels.resize(11);
  CHECK_THROWS_AS(desaturate(bad), DimensionError);
}

TEST_CASE("negative inverts and is an involution") {
  GrayImage zero = GrayImage::filled(2, 2, 0);
  CHECK(negative(zero).pixels[0] == 255);

  GrayImage img = noise_image(16, 16, 7);
  CHECK(negative(negative(img)).pixels == img.pixels);

  double m = std::accumulate(img.pixels.begin(), img.pixels.end(), 0.0) /
             double(img.pixels.size());
  GrayImage neg = negative(img);
  double mn = std::accumulate(neg.pixels.begin(), neg.pixels.end(), 0.0) /
              double(neg.pixels.size());
  CHECK(mn == doctest::Approx(255.0 - m));
}

TEST_CASE("threshold splits at t and yields at most two values") {
  GrayImage img = noise_image(16, 16, 8);
  GrayImage all = threshold(img, 0);
  for (uint8_t v : all.pixels) CHECK(v == 255);

  GrayImage top = threshold(img, 255);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK((top.pixels[i] == 255) == (img.pixels[i] == 255));
  }

  std::set<uint8_t> values;
  for (uint8_t v : threshold(img, 97).pixels) values.insert(v);
  CHECK(values.size() <= 2);
  for (uint8_t v : values) CHECK((v == 0 || v == 255));

  CHECK_THROWS_AS(threshold(img, -1), ArgumentError);
  CHECK_THROWS_AS(threshold(img, 256), ArgumentError);
}

TEST_CASE("dilate grows binary regions monotonically") {
  GrayImage dot = GrayImage::filled(5, 5, 0);
  dot.at(2, 2) = 255;
  GrayImage grown = dilate(dot, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      bool inside = std::abs(x - 2) <= 1 && std::abs(y - 2) <= 1;
      CHECK((grown.at(x, y) == 255) == inside);
    }

  GrayImage white = GrayImage::filled(4, 4, 255);
  CHECK(dilate(white, 2).pixels == white.pixels);

  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    GrayImage m = GrayImage::filled(12, 12, 0);
    for (uint8_t& v : m.pixels) v = rng.next_below(4) == 0 ? 255 : 0;
    CHECK(count_on(dilate(m, 1)) >= count_on(m));
  }

  GrayImage notbinary = GrayImage::filled(3, 3, 7);
  CHECK_THROWS_AS(dilate(notbinary, 1), ArgumentError);
  CHECK_THROWS_AS(dilate(dot, -1), ArgumentError);
}

TEST_CASE("3x3 gaussian kernel is normalized and symmetric") {
  for (double sigma : {0.5, 1.0, 1.4, 3.0}) {
    auto k = gaussian_kernel3(sigma);
    double total = 0;
    for (auto& row : k)
      for (double v : row) total += v;
    CHECK(std::fabs(total - 1.0) < 1e-9);
    CHECK(k[0][0] == doctest::Approx(k[2][2]));
    CHECK(k[0][1] == doctest::Approx(k[2][1]));
    CHECK(k[1][0] == doctest::Approx(k[1][2]));
    CHECK(k[1][1] > k[0][0]);
  }
  CHECK_THROWS_AS(gaussian_kernel3(0.0), ArgumentError);
}

TEST_CASE("gaussian_blur keeps constants and spreads an impulse") {
  GrayImage flat = GrayImage::filled(9, 9, 81);
  CHECK(gaussian_blur(flat, 1.0).pixels == flat.pixels);

  GrayImage impulse = GrayImage::filled(9, 9, 0);
  impulse.at(4, 4) = 255;
  GrayImage blurred = gaussian_blur(impulse, 1.0);
  auto kernel = gaussian_kernel3(1.0);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      double expected = 255.0 * kernel[size_t(dy + 1)][size_t(dx + 1)];
      CHECK(std::fabs(double(blurred.at(4 + dx, 4 + dy)) - expected) <= 1.0);
    }
  CHECK(blurred.at(0, 0) == 0);
}

TEST_CASE("gaussian_blur leaves a linear ramp unchanged away from borders") {
  GrayImage img = GrayImage::filled(32, 32, 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = uint8_t(x * 8 + 3);
  GrayImage blurred = gaussian_blur(img, 1.0);
  for (int y = 0; y < 32; ++y)
    for (int x = 1; x < 31; ++x) {
      CHECK(std::abs(int(blurred.at(x, y)) - int(img.at(x, y))) <= 1);
    }
}

TEST_CASE("canny finds nothing on constants") {
  GrayImage flat = GrayImage::filled(32, 32, 140);
  CHECK(count_on(canny(flat, 1.4, 40, 100)) == 0);
}

TEST_CASE("canny marks a vertical step with a thin edge") {
  const int n = 32, step = 16;
  GrayImage img = GrayImage::filled(n, n, 0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      img.at(x, y) = x < step ? 50 : 200;
    }
  GrayImage edges = canny(img, 1.0, 40, 100);
  for (int y = 0; y < n; ++y) {
    int hits = 0;
    for (int x = 0; x < n; ++x) {
      if (edges.at(x, y) != 0) {
        ++hits;
        CHECK(x >= step - 2);
        CHECK(x <= step + 1);
      }
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("raising the low threshold never adds canny edges") {
  GrayImage img = testsupport::make_curve_sample(64, 77).image;
  size_t last = SIZE_MAX;
  for (int i = 0; i < 10; ++i) {
    double low = 10.0 + 15.0 * i;
    size_t onpix = count_on(canny(img, 1.4, low, 200.0));
    CHECK(onpix <= last);
    last = onpix;
  }
  CHECK_THROWS_AS(canny(img, 1.4, 100, 100), ArgumentError);
  CHECK_THROWS_AS(canny(img, 1.4, 120, 100), ArgumentError);
  CHECK_THROWS_AS(canny(img, 1.4, 0, 100), ArgumentError);
}

TEST_CASE("baseline pipeline is empty on blanks and deterministic") {
  GrayImage flat = GrayImage::filled(64, 64, 200);
  BaselineParams params;
  CHECK(count_on(baseline_pipeline(flat, params)) == 0);

  GrayImage img = testsupport::make_curve_sample(64, 5).image;
  GrayImage a = baseline_pipeline(img, params);
  GrayImage b = baseline_pipeline(img, params);
  CHECK(a.pixels == b.pixels);
}

TEST_CASE("baseline pipeline recovers most synthetic curve pixels") {
  BaselineParams params;
  size_t tp = 0, fn = 0;
  for (int i = 0; i < 20; ++i) {
    ImageSample s = testsupport::make_curve_sample(64, 1000 + uint64_t(i));
    GrayImage pred = baseline_pipeline(s.image, params);
    for (size_t p = 0; p < pred.pixels.size(); ++p) {
      if (s.mask.pixels[p] != 0) {
        if (pred.pixels[p] != 0) ++tp;
        else ++fn;
      }
    }
  }
  double recall = double(tp) / double(tp + fn);
  CAPTURE(recall);
  CHECK(recall >= 0.6);
}
