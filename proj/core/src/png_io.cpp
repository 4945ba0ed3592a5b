#include "palmseg/png_io.hpp"

#include <png.h>

#include "palmseg/baseline.hpp"
#include "palmseg/errors.hpp"

namespace palmseg {

GrayImage PngImage::to_gray() const {
  if (channels == 1) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels = pixels;
    return img;
  }
  RgbImage rgb;
  rgb.width = width;
  rgb.height = height;
  rgb.pixels = pixels;
  return desaturate(rgb);
}

PngImage read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str()))
    throw DataError("png: cannot read " + path.string() + ": " + png.message);

  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  PngImage out;
  out.width = int(png.width);
  out.height = int(png.height);
  out.channels = color ? 3 : 1;
  out.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw DataError("png: cannot decode " + path.string() + ": " +
                    png.message);
  }
  return out;
}

namespace {

void write_png_buffer(const std::filesystem::path& path, int width,
                      int height, bool color, const uint8_t* pixels) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = png_uint_32(width);
  png.height = png_uint_32(height);
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, pixels, 0,
                               nullptr)) {
    png_image_free(&png);
    throw DataError("png: cannot write " + path.string() + ": " +
                    png.message);
  }
}

}  // namespace

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_png_buffer(path, image.width, image.height, false,
                   image.pixels.data());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_png_buffer(path, image.width, image.height, true,
                   image.pixels.data());
}

}  // namespace palmseg
