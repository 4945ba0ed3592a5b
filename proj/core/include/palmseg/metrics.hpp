#pragma once

#include <string>
#include <vector>

#include "palmseg/image.hpp"

namespace palmseg {

/// Pixel confusion counts and the binary-segmentation scores derived from
/// them. The line class is positive; background scores come from the
/// complement. A class with an empty union scores IoU 1.
struct MetricsReport {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double threshold = 0.5;

  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou_line = 0.0;
  double iou_background = 0.0;
  double miou = 0.0;
};

/// Derives all scores from raw counts.
MetricsReport finalize_metrics(int64_t tp, int64_t fp, int64_t fn, int64_t tn,
                               double threshold = 0.5);

class MetricsAccumulator {
public:
  /// Both masks binary (any nonzero pixel is positive). Sizes must match.
  void add_masks(const GrayImage& pred, const GrayImage& target);

  /// Probability map vs {0,1} target, both [N,1,H,W]; pred binarizes at
  /// `threshold`.
  void add_probs(const Tensor& pred, const Tensor& target, double threshold);

  MetricsReport finalize(double threshold = 0.5) const;

private:
  int64_t tp_ = 0, fp_ = 0, fn_ = 0, tn_ = 0;
};

/// Whole-dataset score over parallel mask lists.
MetricsReport compute_metrics(const std::vector<GrayImage>& preds,
                              const std::vector<GrayImage>& targets);

/// Key-value lines, one metric per line.
std::string metrics_text(const MetricsReport& report);

/// One comparison row: method, parameter count, F1, mIoU.
struct MetricsRow {
  std::string method;
  int64_t params = 0;
  double f1 = 0.0;
  double miou = 0.0;
};

/// Tab-separated table with a header line.
std::string metrics_table(const std::vector<MetricsRow>& rows);

}  // namespace palmseg
