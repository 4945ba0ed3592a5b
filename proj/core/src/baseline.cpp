#include "palmseg/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "palmseg/errors.hpp"
#include "palmseg/transforms.hpp"

namespace palmseg {

GrayImage desaturate(const RgbImage& image) {
  if (image.pixels.size() != size_t(image.width) * image.height * 3)
    throw DimensionError("desaturate: input is not a packed 3-channel image");
  GrayImage out = GrayImage::filled(image.width, image.height, 0);
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    const uint8_t* rgb = &image.pixels[i * 3];
    out.pixels[i] = uint8_t(
        std::lround(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]));
  }
  return out;
}

GrayImage negative(const GrayImage& image) {
  GrayImage out = image;
  for (uint8_t& p : out.pixels) p = uint8_t(255 - p);
  return out;
}

GrayImage threshold(const GrayImage& image, int t) {
  if (t < 0 || t > 255)
    throw ArgumentError("threshold: level " + std::to_string(t) +
                        " outside [0, 255]");
  GrayImage out = image;
  for (uint8_t& p : out.pixels) p = p >= t ? 255 : 0;
  return out;
}

GrayImage dilate(const GrayImage& image, int radius) {
  if (radius < 0) throw ArgumentError("dilate: radius must be >= 0");
  for (uint8_t p : image.pixels)
    if (p != 0 && p != 255)
      throw ArgumentError("dilate: input is not binary (found value " +
                          std::to_string(p) + ")");
  if (radius == 0) return image;

  GrayImage out = GrayImage::filled(image.width, image.height, 0);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      if (image.at(x, y) != 255) continue;
      const int y0 = std::max(0, y - radius);
      const int y1 = std::min(image.height - 1, y + radius);
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(image.width - 1, x + radius);
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) out.at(xx, yy) = 255;
    }
  }
  return out;
}

namespace {

// Mirror an index without repeating the border sample (..., 2, 1, 0, 1, 2...).
int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(size_t(radius) * 2 + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[size_t(i + radius)] = std::exp(-double(i) * i / (2.0 * sigma * sigma));
    total += taps[size_t(i + radius)];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable Gaussian over a double plane, reflect-101 borders.
std::vector<double> smooth_plane(const std::vector<double>& plane, int w,
                                 int h, double sigma) {
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  const std::vector<double> taps = gaussian_taps(sigma, radius);
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += taps[size_t(i + radius)] *
               plane[size_t(y) * w + reflect101(x + i, w)];
      tmp[size_t(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += taps[size_t(i + radius)] *
               tmp[size_t(reflect101(y + i, h)) * w + x];
      out[size_t(y) * w + x] = acc;
    }
  return out;
}

}  // namespace

std::array<std::array<double, 3>, 3> gaussian_kernel3(double sigma) {
  if (sigma <= 0)
    throw ArgumentError("gaussian: sigma must be positive, got " +
                        std::to_string(sigma));
  std::array<std::array<double, 3>, 3> k{};
  double total = 0.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const double w =
          std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      k[size_t(dy + 1)][size_t(dx + 1)] = w;
      total += w;
    }
  for (auto& row : k)
    for (double& w : row) w /= total;
  return k;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
  const auto kernel = gaussian_kernel3(sigma);
  GrayImage out = GrayImage::filled(image.width, image.height, 0);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += kernel[size_t(dy + 1)][size_t(dx + 1)] *
                 image.at(reflect101(x + dx, image.width),
                          reflect101(y + dy, image.height));
      out.at(x, y) = uint8_t(std::min(255.0, std::max(0.0,
                     double(std::lround(acc)))));
    }
  return out;
}

std::vector<float> gaussian_blur_plane(const std::vector<float>& plane,
                                       int width, int height, double sigma) {
  if (plane.size() != size_t(width) * height)
    throw DimensionError("gaussian: plane size does not match extents");
  const auto kernel = gaussian_kernel3(sigma);
  std::vector<float> out(plane.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          acc += kernel[size_t(dy + 1)][size_t(dx + 1)] *
                 plane[size_t(reflect101(y + dy, height)) * width +
                       reflect101(x + dx, width)];
      out[size_t(y) * width + x] = float(acc);
    }
  return out;
}

GrayImage canny(const GrayImage& image, double sigma, double low,
                double high) {
  if (sigma <= 0) throw ArgumentError("canny: sigma must be positive");
  if (low <= 0 || low >= high)
    throw ArgumentError("canny: thresholds must satisfy 0 < low < high, got "
                        "low=" + std::to_string(low) +
                        " high=" + std::to_string(high));
  const int w = image.width, h = image.height;
  std::vector<double> plane(image.pixels.begin(), image.pixels.end());
  const std::vector<double> smooth = smooth_plane(plane, w, h, sigma);

  std::vector<double> mag(size_t(w) * h, 0.0);
  std::vector<uint8_t> bin(size_t(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double gx = 0.0, gy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double v =
              smooth[size_t(reflect101(y + dy, h)) * w + reflect101(x + dx, w)];
          static const int sobel_x[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
          static const int sobel_y[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
          gx += sobel_x[dy + 1][dx + 1] * v;
          gy += sobel_y[dy + 1][dx + 1] * v;
        }
      }
      mag[size_t(y) * w + x] = std::hypot(gx, gy);
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      uint8_t b;
      if (angle < 22.5 || angle >= 157.5) {
        b = 0;  // horizontal neighbors
      } else if (angle < 67.5) {
        b = 1;  // down-right diagonal
      } else if (angle < 112.5) {
        b = 2;  // vertical neighbors
      } else {
        b = 3;  // down-left diagonal
      }
      bin[size_t(y) * w + x] = b;
    }
  }

  // Thin to local maxima along the gradient direction. The strict test on
  // one side and the permissive test on the other keeps exactly one pixel
  // of a two-wide magnitude plateau, as a clean step produces.
  static const int step_x[4] = {1, 1, 0, 1};
  static const int step_y[4] = {0, 1, 1, -1};
  const auto mag_at = [&](int x, int y) {
    return (x >= 0 && x < w && y >= 0 && y < h) ? mag[size_t(y) * w + x]
                                                : 0.0;
  };
  std::vector<uint8_t> kept(size_t(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const uint8_t b = bin[size_t(y) * w + x];
      const double m = mag[size_t(y) * w + x];
      const double before = mag_at(x - step_x[b], y - step_y[b]);
      const double after = mag_at(x + step_x[b], y + step_y[b]);
      kept[size_t(y) * w + x] = (m > before && m >= after) ? 1 : 0;
    }

  // Hysteresis: strong pixels seed a flood over connected weak pixels.
  GrayImage out = GrayImage::filled(w, h, 0);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (kept[size_t(y) * w + x] && mag[size_t(y) * w + x] >= high &&
          out.at(x, y) == 0) {
        out.at(x, y) = 255;
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          const auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
              const int nx = cx + dx, ny = cy + dy;
              if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
              if (out.at(nx, ny) != 0) continue;
              if (!kept[size_t(ny) * w + nx]) continue;
              if (mag[size_t(ny) * w + nx] < low) continue;
              out.at(nx, ny) = 255;
              stack.emplace_back(nx, ny);
            }
        }
      }
  return out;
}

GrayImage baseline_pipeline(const GrayImage& gray,
                            const BaselineParams& params) {
  GrayImage equalized =
      clahe(gray, params.clahe_clip, params.clahe_tiles, params.clahe_tiles);
  GrayImage inverted = negative(equalized);
  GrayImage smoothed = gaussian_blur(inverted, params.blur_sigma);
  GrayImage edges =
      canny(smoothed, params.canny_sigma, params.canny_low, params.canny_high);
  return dilate(edges, params.dilate_radius);
}

GrayImage baseline_pipeline(const RgbImage& rgb, const BaselineParams& params) {
  return baseline_pipeline(desaturate(rgb), params);
}

}  // namespace palmseg
