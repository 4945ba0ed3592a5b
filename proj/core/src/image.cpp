#include "palmseg/image.hpp"

#include <cmath>

#include "palmseg/errors.hpp"

namespace palmseg {

GrayImage GrayImage::filled(int width, int height, uint8_t value) {
  if (width <= 0 || height <= 0)
    throw DimensionError("image: extents must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(size_t(width) * height, value);
  return img;
}

RgbImage RgbImage::filled(int width, int height, uint8_t r, uint8_t g,
                          uint8_t b) {
  if (width <= 0 || height <= 0)
    throw DimensionError("image: extents must be positive, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(size_t(width) * height * 3);
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

Tensor tensor_from_gray(const GrayImage& image) {
  std::vector<float> values(image.pixels.size());
  for (size_t i = 0; i < values.size(); ++i)
    values[i] = float(image.pixels[i]) / 255.0f;
  return Tensor::from_vector({1, 1, image.height, image.width},
                             std::move(values));
}

Tensor tensor_from_mask(const GrayImage& mask) {
  std::vector<float> values(mask.pixels.size());
  for (size_t i = 0; i < values.size(); ++i)
    values[i] = mask.pixels[i] ? 1.0f : 0.0f;
  return Tensor::from_vector({1, 1, mask.height, mask.width},
                             std::move(values));
}

namespace {

void require_map(const Tensor& t, const char* what) {
  if (t.rank() != 4 || t.dim(0) != 1 || t.dim(1) != 1)
    throw DimensionError(std::string("image: ") + what +
                         " must be [1,1,H,W], got " + shape_str(t.shape()));
}

}  // namespace

GrayImage gray_from_unit(const Tensor& t) {
  require_map(t, "unit map");
  GrayImage img = GrayImage::filled(int(t.dim(3)), int(t.dim(2)), 0);
  std::span<const float> values = t.data();
  for (size_t i = 0; i < values.size(); ++i) {
    const double v = std::lround(double(values[i]) * 255.0);
    img.pixels[i] = uint8_t(std::min(255.0, std::max(0.0, v)));
  }
  return img;
}

GrayImage mask_from_prob(const Tensor& prob, double threshold) {
  require_map(prob, "probability map");
  GrayImage img = GrayImage::filled(int(prob.dim(3)), int(prob.dim(2)), 0);
  std::span<const float> values = prob.data();
  for (size_t i = 0; i < values.size(); ++i)
    img.pixels[i] = double(values[i]) >= threshold ? 255 : 0;
  return img;
}

}  // namespace palmseg
