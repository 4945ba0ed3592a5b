#pragma once

#include <cstdint>
#include <vector>

#include "palmseg/tensor.hpp"

namespace palmseg {

/// 8-bit single-channel image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  static GrayImage filled(int width, int height, uint8_t value);

  uint8_t& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  bool same_size(const GrayImage& other) const {
    return width == other.width && height == other.height;
  }
};

/// 8-bit interleaved RGB image, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // r,g,b per pixel

  static RgbImage filled(int width, int height, uint8_t r, uint8_t g,
                         uint8_t b);
};

/// [1,1,H,W] tensor with intensities scaled to [0,1].
Tensor tensor_from_gray(const GrayImage& image);

/// Mask as a {0,1}-valued [1,1,H,W] tensor (any nonzero pixel counts as 1).
Tensor tensor_from_mask(const GrayImage& mask);

/// [1,1,H,W] values in [0,1] back to 8-bit, rounding half up.
GrayImage gray_from_unit(const Tensor& t);

/// Binarize a [1,1,H,W] probability map at `threshold` into a 0/255 mask.
GrayImage mask_from_prob(const Tensor& prob, double threshold);

}  // namespace palmseg
