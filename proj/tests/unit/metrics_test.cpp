#include <cmath>
#include <string>

#include "doctest.h"
#include "palmseg/errors.hpp"
#include "palmseg/metrics.hpp"
#include "palmseg/rng.hpp"
#include "reference_ops.hpp"

using namespace palmseg;

namespace {

GrayImage mask_from_bits(int w, int h, Rng& rng, int on_in_four) {
  GrayImage img = GrayImage::filled(w, h, 0);
  for (uint8_t& v : img.pixels)
    v = rng.next_below(4) < uint64_t(on_in_four) ? 255 : 0;
  return img;
}

}  // namespace

TEST_CASE("a perfect mixed prediction scores one everywhere") {
  GrayImage target = GrayImage::filled(4, 4, 0);
  target.at(0, 0) = 255;
  target.at(3, 2) = 255;
  MetricsAccumulator acc;
  acc.add_masks(target, target);
  MetricsReport r = acc.finalize();
  CHECK(r.tp == 2);
  CHECK(r.tn == 14);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.iou_line == 1.0);
  CHECK(r.iou_background == 1.0);
  CHECK(r.miou == 1.0);
}

TEST_CASE("a fully inverted prediction scores zero") {
  GrayImage target = GrayImage::filled(4, 4, 255);
  GrayImage pred = GrayImage::filled(4, 4, 0);
  MetricsReport r = compute_metrics({pred}, {target});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.iou_line == 0.0);
  CHECK(r.iou_background == 0.0);
  CHECK(r.miou == 0.0);
}

TEST_CASE("the hand-worked four-by-four case is exact") {
  // 16 pixels: 4 hits, 2 false alarms, 2 misses, 8 correct rejections.
  GrayImage target = GrayImage::filled(4, 4, 0);
  GrayImage pred = GrayImage::filled(4, 4, 0);
  for (int x = 0; x < 4; ++x) {
    target.at(x, 0) = 255;
    pred.at(x, 0) = 255;
  }
  target.at(0, 1) = 255;
  target.at(1, 1) = 255;
  pred.at(2, 1) = 255;
  pred.at(3, 1) = 255;

  MetricsReport r = compute_metrics({pred}, {target});
  CHECK(r.tp == 4);
  CHECK(r.fp == 2);
  CHECK(r.fn == 2);
  CHECK(r.tn == 8);
  CHECK(r.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.iou_line == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.iou_background == doctest::Approx(8.0 / 12.0).epsilon(1e-12));
  CHECK(r.miou == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("counts match an independent tally on random masks") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    GrayImage pred = mask_from_bits(8, 8, rng, 1);
    GrayImage target = mask_from_bits(8, 8, rng, 1);
    testsupport::RefCounts ref =
        testsupport::ref_count(pred.pixels, target.pixels);
    MetricsReport r = compute_metrics({pred}, {target});
    CHECK(r.tp == ref.tp);
    CHECK(r.fp == ref.fp);
    CHECK(r.fn == ref.fn);
    CHECK(r.tn == ref.tn);
    if (r.precision + r.recall > 0) {
      const double f1 = 2.0 * r.precision * r.recall /
                        (r.precision + r.recall);
      CHECK(std::abs(r.f1 - f1) < 1e-12);
    } else {
      CHECK(r.f1 == 0.0);
    }
  }
}

TEST_CASE("empty-union classes score IoU one") {
  MetricsReport allbg = finalize_metrics(0, 0, 0, 16);
  CHECK(allbg.iou_line == 1.0);
  CHECK(allbg.iou_background == 1.0);
  CHECK(allbg.miou == 1.0);
  CHECK(allbg.precision == 0.0);
  CHECK(allbg.recall == 0.0);

  MetricsReport allline = finalize_metrics(16, 0, 0, 0);
  CHECK(allline.iou_line == 1.0);
  CHECK(allline.iou_background == 1.0);
}

TEST_CASE("add_probs binarizes at the threshold") {
  Tensor pred = Tensor::from_vector({1, 1, 1, 4}, {0.2f, 0.5f, 0.7f, 0.49f});
  Tensor target = Tensor::from_vector({1, 1, 1, 4}, {0.f, 1.f, 0.f, 1.f});
  MetricsAccumulator acc;
  acc.add_probs(pred, target, 0.5);
  MetricsReport r = acc.finalize(0.5);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.tn == 1);
  CHECK(r.threshold == 0.5);

  Tensor lopsided = Tensor::from_vector({1, 1, 1, 2}, {0.f, 1.f});
  CHECK_THROWS_AS(acc.add_probs(pred, lopsided, 0.5), DimensionError);
}

TEST_CASE("add_masks rejects size mismatches") {
  MetricsAccumulator acc;
  CHECK_THROWS_AS(
      acc.add_masks(GrayImage::filled(2, 2, 0), GrayImage::filled(2, 3, 0)),
      DimensionError);
  CHECK_THROWS_AS(compute_metrics({GrayImage::filled(2, 2, 0)}, {}),
                  DimensionError);
}

TEST_CASE("accumulation over several pairs equals one big tally") {
  Rng rng(32);
  MetricsAccumulator acc;
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (int i = 0; i < 5; ++i) {
    GrayImage pred = mask_from_bits(6, 6, rng, 2);
    GrayImage target = mask_from_bits(6, 6, rng, 2);
    acc.add_masks(pred, target);
    testsupport::RefCounts ref =
        testsupport::ref_count(pred.pixels, target.pixels);
    tp += ref.tp;
    fp += ref.fp;
    fn += ref.fn;
    tn += ref.tn;
  }
  MetricsReport r = acc.finalize();
  CHECK(r.tp == tp);
  CHECK(r.fp == fp);
  CHECK(r.fn == fn);
  CHECK(r.tn == tn);
}

TEST_CASE("metrics_text is line-oriented key = value") {
  MetricsReport r = finalize_metrics(4, 2, 2, 8);
  std::string text = metrics_text(r);
  CHECK(text.find("tp = 4\n") != std::string::npos);
  CHECK(text.find("precision = 0.666667\n") != std::string::npos);
  CHECK(text.find("recall = 0.666667\n") != std::string::npos);
  CHECK(text.find("f1 = 0.666667\n") != std::string::npos);
  CHECK(text.find("miou = 0.583333\n") != std::string::npos);
  CHECK(text.find("threshold = 0.500000\n") != std::string::npos);
}

TEST_CASE("metrics_table lines up methods for comparison") {
  std::string table = metrics_table({{"unet_cfm", 1898, 0.91, 0.84},
                                     {"baseline", 0, 0.55, 0.5}});
  CHECK(table.find("method\tparams\tf1\tmiou\n") == 0);
  CHECK(table.find("unet_cfm\t1898\t0.910000\t0.840000\n") !=
        std::string::npos);
  CHECK(table.find("baseline\t0\t0.550000\t0.500000\n") != std::string::npos);
}
