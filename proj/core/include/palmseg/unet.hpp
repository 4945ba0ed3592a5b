#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "palmseg/tensor.hpp"

namespace palmseg {

/// Architecture of the segmentation network: `depth` encoder levels of two
/// 3x3 convolutions each, channels doubling per level from `base_channels`,
/// a double-convolution bottleneck optionally followed by the context fusion
/// block, and a mirrored decoder with skip concatenations.
struct UNetConfig {
  int depth = 4;
  int base_channels = 32;
  int cfm_reduction = 4;
  int in_channels = 1;
  int out_channels = 1;
  bool use_cfm = true;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;

  /// `key = value` lines, parseable by from_text. Stored inside checkpoints
  /// so a saved model carries its own architecture.
  std::string to_text() const;
  static UNetConfig from_text(const std::string& text);
};

template <typename T>
struct ModelT {
  UNetConfig config;
  std::vector<std::string> names;
  std::vector<TensorT<T>> params;  // parallel to names, canonical order

  TensorT<T>& param(std::string_view name);
  const TensorT<T>& param(std::string_view name) const;
};

using Model = ModelT<float>;

/// Canonical (name, shape) list for a configuration, in storage order.
std::vector<std::pair<std::string, Shape>> parameter_layout(
    const UNetConfig& config);

/// Deterministic Kaiming-uniform build; each parameter draws from a stream
/// seeded by (seed, parameter name).
template <typename T>
ModelT<T> build_unet(const UNetConfig& config, uint64_t seed);

/// Probability map with the input's spatial extents and out_channels
/// channels. Spatial extents must be divisible by 2^depth; the error names
/// the encoder level that cannot halve.
template <typename T>
TensorT<T> unet_forward(const ModelT<T>& model, const TensorT<T>& x);

template <typename T>
int64_t param_count(const ModelT<T>& model);

/// Checkpoint round-trip, including the config text. Loading validates the
/// name/shape table against the config's canonical layout.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

#define PALMSEG_EXTERN_UNET(T)                                              \
  extern template struct ModelT<T>;                                         \
  extern template ModelT<T> build_unet<T>(const UNetConfig&, uint64_t);     \
  extern template TensorT<T> unet_forward<T>(const ModelT<T>&,              \
                                             const TensorT<T>&);            \
  extern template int64_t param_count<T>(const ModelT<T>&);

PALMSEG_EXTERN_UNET(float)
PALMSEG_EXTERN_UNET(double)
#undef PALMSEG_EXTERN_UNET

}  // namespace palmseg
