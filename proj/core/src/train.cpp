#include "palmseg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "palmseg/adam.hpp"
#include "palmseg/baseline.hpp"
#include "palmseg/loss.hpp"
#include "palmseg/rng.hpp"

namespace palmseg {

namespace {

void check_uniform_dims(const std::vector<ImageSample>& samples,
                        const char* which) {
  for (const ImageSample& s : samples) {
    if (!s.image.same_size(samples.front().image) ||
        !s.mask.same_size(s.image)) {
      throw DataError(std::string("train: ") + which +
                      " sample '" + s.id + "' differs in size (" +
                      std::to_string(s.image.width) + "x" +
                      std::to_string(s.image.height) +
                      "); resize during preparation");
    }
  }
}

/// [B,1,H,W] image/target pair for the samples named by indices[from, to).
std::pair<Tensor, Tensor> make_batch(const std::vector<ImageSample>& samples,
                                     const std::vector<size_t>& indices,
                                     size_t from, size_t to) {
  const int height = samples[indices[from]].image.height;
  const int width = samples[indices[from]].image.width;
  const int64_t b = int64_t(to - from);
  Tensor x = Tensor::zeros({b, 1, height, width});
  Tensor y = Tensor::zeros({b, 1, height, width});
  std::span<float> xd = x.data();
  std::span<float> yd = y.data();
  const size_t plane = size_t(height) * size_t(width);
  for (size_t i = from; i < to; ++i) {
    const ImageSample& s = samples[indices[i]];
    const size_t base = (i - from) * plane;
    for (size_t p = 0; p < plane; ++p) {
      xd[base + p] = float(s.image.pixels[p]) / 255.0f;
      yd[base + p] = s.mask.pixels[p] != 0 ? 1.0f : 0.0f;
    }
  }
  return {x, y};
}

Tensor apply_loss(const std::string& kind, const Tensor& pred,
                  const Tensor& target) {
  if (kind == "bce") return bce_loss(pred, target);
  return mse_loss(pred, target);
}

/// Mean loss over the dataset, accumulated batch-by-batch so the result is
/// the exact per-sample mean regardless of a ragged final batch.
double dataset_loss(const Model& model, const std::vector<ImageSample>& samples,
                    const std::vector<size_t>& indices, int batch_size,
                    const std::string& loss_kind) {
  double weighted = 0.0;
  for (size_t from = 0; from < indices.size(); from += size_t(batch_size)) {
    const size_t to = std::min(indices.size(), from + size_t(batch_size));
    auto [x, y] = make_batch(samples, indices, from, to);
    Tensor out = unet_forward(model, x);
    weighted += double(apply_loss(loss_kind, out, y).item()) * double(to - from);
  }
  return weighted / double(indices.size());
}

std::vector<Tensor> snapshot_params(const Model& model) {
  std::vector<Tensor> copy;
  copy.reserve(model.params.size());
  for (const Tensor& p : model.params) copy.push_back(p.clone());
  return copy;
}

void restore_params(Model& model, const std::vector<Tensor>& snapshot) {
  for (size_t i = 0; i < model.params.size(); ++i) {
    std::span<float> dst = model.params[i].data();
    std::span<const float> src = snapshot[i].data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
  if (plateau_patience < 1)
    throw ConfigError("train: plateau_patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0))
    throw ConfigError("train: plateau_factor must be in (0, 1)");
  if (early_stop_patience < 1)
    throw ConfigError("train: early_stop_patience must be >= 1");
  if (loss != "bce" && loss != "mse")
    throw ConfigError("train: loss must be 'bce' or 'mse', got '" + loss +
                      "'");
}

TrainResult train(Model model, const std::vector<ImageSample>& train_set,
                  const std::vector<ImageSample>& val_set,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw DataError("train: training set is empty");
  if (val_set.empty()) throw DataError("train: validation set is empty");
  check_uniform_dims(train_set, "training");
  check_uniform_dims(val_set, "validation");
  if (!train_set.front().image.same_size(val_set.front().image)) {
    throw DataError("train: training and validation sizes differ");
  }

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();

  std::vector<size_t> train_order(train_set.size());
  std::iota(train_order.begin(), train_order.end(), size_t(0));
  std::vector<size_t> val_order(val_set.size());
  std::iota(val_order.begin(), val_order.end(), size_t(0));

  AdamState adam;
  double lr = config.lr;
  int plateau_count = 0;
  int stop_count = 0;
  std::vector<Tensor> best;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();

    Rng shuffle_rng(hash_combine(hash_combine(config.seed, "epoch"),
                                 uint64_t(epoch)));
    for (size_t i = train_order.size(); i > 1; --i) {
      std::swap(train_order[i - 1],
                train_order[shuffle_rng.next_below(i)]);
    }

    double train_weighted = 0.0;
    std::string fault;
    for (size_t from = 0; from < train_order.size() && fault.empty();
         from += size_t(config.batch_size)) {
      const size_t to =
          std::min(train_order.size(), from + size_t(config.batch_size));
      auto [x, y] = make_batch(train_set, train_order, from, to);
      Graph graph;
      Tensor loss;
      {
        GraphScope scope(graph);
        loss = apply_loss(config.loss, unet_forward(model, x), y);
      }
      const double value = double(loss.item());
      if (!std::isfinite(value)) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "non-finite training loss in epoch %d", epoch);
        fault = buf;
        break;
      }
      train_weighted += value * double(to - from);
      graph.backward(loss);
      AdamConfig step = {};
      step.lr = lr;
      try {
        adam_step(model.params, model.names, adam, step);
      } catch (const NumericError& e) {
        fault = e.what();
      }
    }
    if (!fault.empty()) {
      result.abort_reason = fault;
      break;
    }

    const double train_loss = train_weighted / double(train_set.size());
    const double val_loss =
        dataset_loss(model, val_set, val_order, config.batch_size,
                     config.loss);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.log.push_back({epoch, train_loss, val_loss, lr, seconds});

    if (!std::isfinite(val_loss)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "non-finite validation loss in epoch %d", epoch);
      result.abort_reason = buf;
      break;
    }

    if (val_loss < result.best_val_loss - 1e-6) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best = snapshot_params(model);
      plateau_count = 0;
      stop_count = 0;
    } else {
      ++plateau_count;
      ++stop_count;
      if (stop_count >= config.early_stop_patience) {
        result.stopped_early = true;
        break;
      }
      if (plateau_count >= config.plateau_patience) {
        lr *= config.plateau_factor;
        plateau_count = 0;
      }
    }
  }

  if (!best.empty()) restore_params(model, best);
  result.model = std::move(model);
  return result;
}

std::string format_log(const std::vector<EpochLog>& log) {
  std::string out;
  char line[160];
  for (const EpochLog& e : log) {
    std::snprintf(line, sizeof(line), "%d\t%.6f\t%.6f\t%.8g\t%.3f\n", e.epoch,
                  e.train_loss, e.val_loss, e.lr, e.seconds);
    out += line;
  }
  return out;
}

double evaluate_loss(const Model& model,
                     const std::vector<ImageSample>& samples,
                     const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw DataError("evaluate_loss: no samples");
  check_uniform_dims(samples, "evaluation");
  std::vector<size_t> order(samples.size());
  std::iota(order.begin(), order.end(), size_t(0));
  return dataset_loss(model, samples, order, config.batch_size, config.loss);
}

Prediction predict(const Model& model, const GrayImage& image,
                   double threshold, bool post_blur, double blur_sigma) {
  Tensor prob = unet_forward(model, tensor_from_gray(image));
  if (post_blur) {
    std::span<float> pd = prob.data();
    std::vector<float> plane(pd.begin(), pd.end());
    plane = gaussian_blur_plane(plane, image.width, image.height, blur_sigma);
    std::copy(plane.begin(), plane.end(), pd.begin());
  }
  return {mask_from_prob(prob, threshold), prob};
}

RgbImage overlay_mask(const GrayImage& image, const GrayImage& mask) {
  if (!image.same_size(mask)) {
    throw DimensionError("overlay_mask: image and mask sizes differ");
  }
  RgbImage out;
  out.width = image.width;
  out.height = image.height;
  out.pixels.resize(size_t(image.width) * size_t(image.height) * 3);
  for (size_t i = 0; i < image.pixels.size(); ++i) {
    const int v = image.pixels[i];
    if (mask.pixels[i] != 0) {
      out.pixels[i * 3 + 0] = uint8_t((v + 255) / 2);
      out.pixels[i * 3 + 1] = uint8_t(v / 2);
      out.pixels[i * 3 + 2] = uint8_t(v / 2);
    } else {
      out.pixels[i * 3 + 0] = uint8_t(v);
      out.pixels[i * 3 + 1] = uint8_t(v);
      out.pixels[i * 3 + 2] = uint8_t(v);
    }
  }
  return out;
}

}  // namespace palmseg
