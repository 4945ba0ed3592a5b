#include "palmseg/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "palmseg/errors.hpp"

namespace palmseg {

MetricsReport finalize_metrics(int64_t tp, int64_t fp, int64_t fn, int64_t tn,
                               double threshold) {
  MetricsReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  r.threshold = threshold;
  r.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.iou_line = tp + fp + fn > 0 ? double(tp) / double(tp + fp + fn) : 1.0;
  r.iou_background =
      tn + fp + fn > 0 ? double(tn) / double(tn + fp + fn) : 1.0;
  r.miou = (r.iou_line + r.iou_background) / 2.0;
  return r;
}

void MetricsAccumulator::add_masks(const GrayImage& pred,
                                   const GrayImage& target) {
  if (!pred.same_size(target))
    throw DimensionError("metrics: prediction is " +
                         std::to_string(pred.width) + "x" +
                         std::to_string(pred.height) + " but target is " +
                         std::to_string(target.width) + "x" +
                         std::to_string(target.height));
  for (size_t i = 0; i < pred.pixels.size(); ++i) {
    const bool p = pred.pixels[i] != 0;
    const bool t = target.pixels[i] != 0;
    if (p && t) {
      ++tp_;
    } else if (p) {
      ++fp_;
    } else if (t) {
      ++fn_;
    } else {
      ++tn_;
    }
  }
}

void MetricsAccumulator::add_probs(const Tensor& pred, const Tensor& target,
                                   double threshold) {
  if (pred.shape() != target.shape())
    throw DimensionError("metrics: prediction " + shape_str(pred.shape()) +
                         " and target " + shape_str(target.shape()) +
                         " differ");
  std::span<const float> p = pred.data();
  std::span<const float> t = target.data();
  for (size_t i = 0; i < p.size(); ++i) {
    const bool pp = double(p[i]) >= threshold;
    const bool tt = t[i] != 0.0f;
    if (pp && tt) {
      ++tp_;
    } else if (pp) {
      ++fp_;
    } else if (tt) {
      ++fn_;
    } else {
      ++tn_;
    }
  }
}

MetricsReport MetricsAccumulator::finalize(double threshold) const {
  return finalize_metrics(tp_, fp_, fn_, tn_, threshold);
}

MetricsReport compute_metrics(const std::vector<GrayImage>& preds,
                              const std::vector<GrayImage>& targets) {
  if (preds.size() != targets.size())
    throw DimensionError("metrics: " + std::to_string(preds.size()) +
                         " predictions for " + std::to_string(targets.size()) +
                         " targets");
  MetricsAccumulator acc;
  for (size_t i = 0; i < preds.size(); ++i)
    acc.add_masks(preds[i], targets[i]);
  return acc.finalize();
}

std::string metrics_text(const MetricsReport& r) {
  std::ostringstream out;
  char buf[64];
  out << "tp = " << r.tp << '\n'
      << "fp = " << r.fp << '\n'
      << "fn = " << r.fn << '\n'
      << "tn = " << r.tn << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.threshold);
  out << "threshold = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.precision);
  out << "precision = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.recall);
  out << "recall = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.f1);
  out << "f1 = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.iou_line);
  out << "iou_line = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.iou_background);
  out << "iou_background = " << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", r.miou);
  out << "miou = " << buf << '\n';
  return out.str();
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "method\tparams\tf1\tmiou\n";
  for (const MetricsRow& row : rows) {
    char buf[64];
    out << row.method << '\t' << row.params << '\t';
    std::snprintf(buf, sizeof buf, "%.6f", row.f1);
    out << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.6f", row.miou);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace palmseg
