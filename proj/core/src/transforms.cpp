#include "palmseg/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "palmseg/errors.hpp"

namespace palmseg {

namespace {

uint8_t clamp_byte(double v) {
  return uint8_t(std::min(255.0, std::max(0.0, v)));
}

// Bilinear sample with zero fill outside the image.
double sample_bilinear_zero(const GrayImage& img, double x, double y) {
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int xi = x0 + dx, yi = y0 + dy;
      if (xi < 0 || xi >= img.width || yi < 0 || yi >= img.height) continue;
      const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      acc += w * img.at(xi, yi);
    }
  }
  return acc;
}

// Bilinear sample with edge clamping (for resize, which never leaves the
// source domain by more than half a pixel).
double sample_bilinear_clamp(const GrayImage& img, double x, double y) {
  x = std::min(double(img.width - 1), std::max(0.0, x));
  y = std::min(double(img.height - 1), std::max(0.0, y));
  const int x0 = std::min(img.width - 1, int(std::floor(x)));
  const int y0 = std::min(img.height - 1, int(std::floor(y)));
  const int x1 = std::min(img.width - 1, x0 + 1);
  const int y1 = std::min(img.height - 1, y0 + 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0) +
         fx * (1 - fy) * img.at(x1, y0) + (1 - fx) * fy * img.at(x0, y1) +
         fx * fy * img.at(x1, y1);
}

}  // namespace

GrayImage resize(const GrayImage& image, int out_width, int out_height,
                 Interp interp) {
  if (out_width <= 0 || out_height <= 0)
    throw DimensionError("resize: target extents must be positive");
  if (out_width == image.width && out_height == image.height) return image;

  GrayImage out = GrayImage::filled(out_width, out_height, 0);
  const double sx = double(image.width) / out_width;
  const double sy = double(image.height) / out_height;
  for (int y = 0; y < out_height; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_width; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      if (interp == Interp::Nearest) {
        const int xi = std::min(image.width - 1,
                                std::max(0, int(std::floor(src_x + 0.5))));
        const int yi = std::min(image.height - 1,
                                std::max(0, int(std::floor(src_y + 0.5))));
        out.at(x, y) = image.at(xi, yi);
      } else {
        out.at(x, y) =
            clamp_byte(std::lround(sample_bilinear_clamp(image, src_x, src_y)));
      }
    }
  }
  return out;
}

GrayImage hflip(const GrayImage& image) {
  GrayImage out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      out.at(x, y) = image.at(image.width - 1 - x, y);
  return out;
}

GrayImage warp_affine(const GrayImage& image, const AffineParams& params,
                      Interp interp) {
  if (params.scale <= 0)
    throw ArgumentError("warp: scale must be positive, got " +
                        std::to_string(params.scale));
  const double cx = (image.width - 1) / 2.0;
  const double cy = (image.height - 1) / 2.0;
  const double tx = params.shift_x * image.width;
  const double ty = params.shift_y * image.height;
  const double rad = params.angle_deg * std::numbers::pi / 180.0;
  // Inverse map: undo shift, then rotate by -angle and divide by scale.
  const double inv_cos = std::cos(rad) / params.scale;
  const double inv_sin = std::sin(rad) / params.scale;

  GrayImage out = GrayImage::filled(image.width, image.height, 0);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double ux = x - cx - tx;
      const double uy = y - cy - ty;
      const double src_x = inv_cos * ux + inv_sin * uy + cx;
      const double src_y = -inv_sin * ux + inv_cos * uy + cy;
      if (interp == Interp::Nearest) {
        const int xi = int(std::floor(src_x + 0.5));
        const int yi = int(std::floor(src_y + 0.5));
        out.at(x, y) = (xi >= 0 && xi < image.width && yi >= 0 &&
                        yi < image.height)
                           ? image.at(xi, yi)
                           : 0;
      } else {
        out.at(x, y) =
            clamp_byte(std::lround(sample_bilinear_zero(image, src_x, src_y)));
      }
    }
  }
  return out;
}

GrayImage brightness_contrast(const GrayImage& image, double brightness,
                              double contrast) {
  GrayImage out = image;
  for (uint8_t& p : out.pixels)
    p = clamp_byte(double(
        std::lround((p - 128.0) * (1.0 + contrast) + 128.0 +
                    255.0 * brightness)));
  return out;
}

GrayImage clahe(const GrayImage& image, double clip, int tiles_x,
                int tiles_y) {
  if (clip <= 0) throw ArgumentError("clahe: clip limit must be positive");
  if (tiles_x < 1 || tiles_y < 1)
    throw ArgumentError("clahe: tile grid must be at least 1x1");
  const int tx = std::min(tiles_x, image.width);
  const int ty = std::min(tiles_y, image.height);

  // Normalized per-tile histograms, so tiles of unequal area produce
  // identical mappings on identical content.
  std::vector<std::array<double, 256>> hist(size_t(tx) * ty);
  for (auto& h : hist) h.fill(0.0);
  std::vector<int64_t> area(size_t(tx) * ty, 0);
  for (int y = 0; y < image.height; ++y) {
    const int tj = std::min(ty - 1, y * ty / image.height);
    for (int x = 0; x < image.width; ++x) {
      const int ti = std::min(tx - 1, x * tx / image.width);
      hist[size_t(tj) * tx + ti][image.at(x, y)] += 1.0;
      area[size_t(tj) * tx + ti] += 1;
    }
  }

  const double limit = clip / 256.0;
  std::vector<std::array<uint8_t, 256>> lut(hist.size());
  for (size_t t = 0; t < hist.size(); ++t) {
    std::array<double, 256>& h = hist[t];
    const double n = double(std::max<int64_t>(area[t], 1));
    double excess = 0.0;
    for (double& bin : h) {
      bin /= n;
      if (bin > limit) {
        excess += bin - limit;
        bin = limit;
      }
    }
    const double share = excess / 256.0;
    double cdf = 0.0;
    for (int v = 0; v < 256; ++v) {
      cdf += h[v] + share;
      lut[t][v] = clamp_byte(double(std::lround(cdf * 255.0)));
    }
  }

  // Blend the four surrounding tile mappings per pixel.
  GrayImage out = GrayImage::filled(image.width, image.height, 0);
  const double tile_w = double(image.width) / tx;
  const double tile_h = double(image.height) / ty;
  for (int y = 0; y < image.height; ++y) {
    const double fy = (y + 0.5) / tile_h - 0.5;
    int j0 = int(std::floor(fy));
    double wy = fy - j0;
    if (j0 < 0) { j0 = 0; wy = 0.0; }
    if (j0 >= ty - 1) { j0 = ty - 1; wy = 0.0; }
    const int j1 = std::min(ty - 1, j0 + 1);
    for (int x = 0; x < image.width; ++x) {
      const double fx = (x + 0.5) / tile_w - 0.5;
      int i0 = int(std::floor(fx));
      double wx = fx - i0;
      if (i0 < 0) { i0 = 0; wx = 0.0; }
      if (i0 >= tx - 1) { i0 = tx - 1; wx = 0.0; }
      const int i1 = std::min(tx - 1, i0 + 1);
      const uint8_t v = image.at(x, y);
      const double blended =
          (1 - wx) * (1 - wy) * lut[size_t(j0) * tx + i0][v] +
          wx * (1 - wy) * lut[size_t(j0) * tx + i1][v] +
          (1 - wx) * wy * lut[size_t(j1) * tx + i0][v] +
          wx * wy * lut[size_t(j1) * tx + i1][v];
      out.at(x, y) = clamp_byte(double(std::lround(blended)));
    }
  }
  return out;
}

}  // namespace palmseg
