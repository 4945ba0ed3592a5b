#pragma once

#include "palmseg/dataset.hpp"
#include "palmseg/transforms.hpp"

namespace palmseg {

/// Bounds for the random shift/scale/rotate draw.
struct SsrLimits {
  double max_shift = 0.1;  // fraction of each extent
  double scale_lo = 0.9;
  double scale_hi = 1.1;
  double max_angle = 15.0;  // degrees
};

struct AugmentConfig {
  int multiplier = 4;  // output copies per source, original included
  uint64_t seed = 0;

  bool enable_hflip = true;
  double hflip_p = 0.5;

  bool enable_ssr = true;
  double ssr_p = 0.5;
  SsrLimits ssr;

  bool enable_brightness_contrast = true;
  double brightness_contrast_p = 0.5;
  double max_brightness = 0.2;
  double max_contrast = 0.2;

  bool enable_clahe = true;
  double clahe_p = 0.5;
  double clahe_clip = 2.0;
  int clahe_tiles = 8;

  void validate() const;
};

/// Resample a pair to size x size: bilinear for the image, nearest for the
/// mask so it stays binary.
ImageSample resize_to(const ImageSample& sample, int size);

/// Mirror image and mask together.
ImageSample hflip_sample(const ImageSample& sample);

/// One affine warp applied to both layers: bilinear image, nearest mask,
/// zero border fill. Parameters must lie within `limits`.
ImageSample shift_scale_rotate(const ImageSample& sample,
                               const AffineParams& params,
                               const SsrLimits& limits);

/// Expands each source into `multiplier` copies: copy 0 is the source
/// itself, later copies draw independent transforms from a stream seeded by
/// (seed, id, copy index) and are renamed `<id>__augN`. Geometric transforms
/// hit image and mask in lockstep; photometric ones never touch the mask.
std::vector<ImageSample> augment_dataset(
    const std::vector<ImageSample>& sources, const AugmentConfig& config);

/// One line per sample: `id<TAB>transform(params)...`, tab-separated.
std::string lineage_manifest(const std::vector<ImageSample>& samples);

}  // namespace palmseg
