#pragma once

#include <string>

#include "palmseg/augment.hpp"
#include "palmseg/baseline.hpp"
#include "palmseg/train.hpp"
#include "palmseg/unet.hpp"

namespace palmseg::cli {

/// Everything a subcommand can consume, resolved from three layers:
/// built-in defaults, then the --config file, then command-line flags.
struct RunConfig {
  std::string config_path;
  std::string data_root;
  std::string out_dir;
  std::string device = "cpu";
  uint64_t seed = 0;

  UNetConfig unet;
  TrainConfig train;
  AugmentConfig augment;
  BaselineParams baseline;

  int prepare_size = 256;
  double train_ratio = 0.8;
  double val_ratio = 0.1;
  double test_ratio = 0.1;

  std::string eval_split = "test";
  double threshold = 0.5;
  bool post_blur = false;
  double blur_sigma = 1.0;

  /// Applies one dotted `key = value` setting. Unknown keys and unparsable
  /// values raise ConfigError naming the key.
  void apply(const std::string& key, const std::string& value);

  /// Loads every setting from a `key = value` file (# starts a comment).
  void load_file(const std::string& path);

  /// Canonical `key = value` dump of the fully resolved state.
  std::string resolved_text() const;

  /// Propagates the root seed into the sub-configs and validates everything.
  void finalize();
};

}  // namespace palmseg::cli
