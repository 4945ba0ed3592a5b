#pragma once

#include "palmseg/dataset.hpp"
#include "palmseg/unet.hpp"

namespace palmseg {

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 64;
  int max_epochs = 100;
  int plateau_patience = 8;    // epochs without val improvement before drop
  double plateau_factor = 0.2;
  int early_stop_patience = 10;
  std::string loss = "bce";  // or "mse"
  uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;  // rate used during this epoch
  double seconds = 0.0;
};

struct TrainResult {
  Model model;  // best-validation weights
  std::vector<EpochLog> log;
  double best_val_loss = 0.0;
  int best_epoch = 0;
  bool stopped_early = false;
  std::string abort_reason;  // non-empty if a numeric fault ended training
};

/// Mini-batch Adam training with validation-driven schedule: when the
/// validation loss fails to improve by more than 1e-6 for plateau_patience
/// epochs the rate is multiplied by plateau_factor; after
/// early_stop_patience such epochs training stops. The returned model
/// always carries the best-validation parameters, including when a
/// non-finite loss or gradient aborts the run (see abort_reason).
TrainResult train(Model model, const std::vector<ImageSample>& train_set,
                  const std::vector<ImageSample>& val_set,
                  const TrainConfig& config);

/// One `epoch<TAB>train_loss<TAB>val_loss<TAB>lr<TAB>seconds` line per epoch.
std::string format_log(const std::vector<EpochLog>& log);

/// Dataset-mean loss of the model on `samples`, without recording.
double evaluate_loss(const Model& model,
                     const std::vector<ImageSample>& samples,
                     const TrainConfig& config);

struct Prediction {
  GrayImage mask;  // 0/255
  Tensor prob;     // [1,1,H,W]
};

/// Forward pass on one image; optional 3x3 Gaussian smoothing of the
/// probability map before thresholding.
Prediction predict(const Model& model, const GrayImage& image,
                   double threshold = 0.5, bool post_blur = false,
                   double blur_sigma = 1.0);

/// Input with the mask blended over it in red at half strength.
RgbImage overlay_mask(const GrayImage& image, const GrayImage& mask);

}  // namespace palmseg
