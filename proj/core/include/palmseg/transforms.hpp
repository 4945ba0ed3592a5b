#pragma once

#include "palmseg/image.hpp"

namespace palmseg {

enum class Interp { Nearest, Bilinear };

/// Resample to new extents using pixel-center alignment. Nearest keeps the
/// value set intact, so masks stay binary.
GrayImage resize(const GrayImage& image, int out_width, int out_height,
                 Interp interp);

/// Mirror about the vertical axis.
GrayImage hflip(const GrayImage& image);

/// Shift (as a fraction of each extent), uniform scale and rotation (degrees,
/// positive turns the +x axis toward +y) about the image center.
struct AffineParams {
  double shift_x = 0.0;
  double shift_y = 0.0;
  double scale = 1.0;
  double angle_deg = 0.0;
};

/// Inverse-mapped affine warp; samples falling outside the source fill with 0.
GrayImage warp_affine(const GrayImage& image, const AffineParams& params,
                      Interp interp);

/// pixel' = clamp((pixel - 128) * (1 + contrast) + 128 + 255 * brightness),
/// rounded half away from zero.
GrayImage brightness_contrast(const GrayImage& image, double brightness,
                              double contrast);

/// Contrast-limited adaptive histogram equalization: per-tile clipped
/// histogram equalization with bilinear blending between tile mappings.
/// `clip` is the limit as a multiple of the uniform histogram level. Tile
/// grids larger than the image are reduced to one pixel per tile.
GrayImage clahe(const GrayImage& image, double clip, int tiles_x, int tiles_y);

}  // namespace palmseg
