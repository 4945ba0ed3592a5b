#pragma once

#include <filesystem>

#include "palmseg/image.hpp"

namespace palmseg {

/// Decoded PNG, normalized to 8-bit with 1 (gray) or 3 (RGB) channels.
/// Palette and low-bit-depth images are expanded, 16-bit is narrowed,
/// alpha is stripped.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<uint8_t> pixels;

  GrayImage to_gray() const;  // 3-channel input is luma-desaturated
};

PngImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace palmseg
