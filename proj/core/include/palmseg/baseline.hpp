#pragma once

#include <array>

#include "palmseg/image.hpp"

namespace palmseg {

/// Luma desaturation 0.299 R + 0.587 G + 0.114 B, rounded half up.
GrayImage desaturate(const RgbImage& image);

/// 255 - pixel.
GrayImage negative(const GrayImage& image);

/// pixel >= t ? 255 : 0. t must be in [0, 255].
GrayImage threshold(const GrayImage& image, int t);

/// Morphological max over a (2r+1)^2 square, window clipped at the borders.
/// The input must be binary (only 0 and 255).
GrayImage dilate(const GrayImage& image, int radius);

/// 3x3 kernel sampled from a centered Gaussian, normalized to sum 1.
/// Indexed [dy+1][dx+1].
std::array<std::array<double, 3>, 3> gaussian_kernel3(double sigma);

/// 3x3 Gaussian smoothing with mirrored (reflect-101) borders.
GrayImage gaussian_blur(const GrayImage& image, double sigma);

/// Same 3x3 smoothing over a float plane (used on probability maps).
std::vector<float> gaussian_blur_plane(const std::vector<float>& plane,
                                       int width, int height, double sigma);

/// Classic multi-stage edge detector: Gaussian smoothing, Sobel gradients,
/// direction quantization to 4 bins, non-maximum suppression, and
/// double-threshold hysteresis with 8-connectivity. Thresholds apply to the
/// Sobel gradient magnitude. Requires 0 < low < high.
GrayImage canny(const GrayImage& image, double sigma, double low,
                double high);

struct BaselineParams {
  double clahe_clip = 2.0;
  int clahe_tiles = 8;
  double blur_sigma = 1.0;
  double canny_sigma = 1.4;
  double canny_low = 40.0;
  double canny_high = 100.0;
  int dilate_radius = 1;
};

/// Non-learned palm-line pass: contrast equalization, negative, smoothing,
/// edge detection, then a dilation to thicken one-pixel edges into lines.
GrayImage baseline_pipeline(const GrayImage& gray,
                            const BaselineParams& params);
GrayImage baseline_pipeline(const RgbImage& rgb, const BaselineParams& params);

}  // namespace palmseg
