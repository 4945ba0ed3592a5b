#include "palmseg/augment.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "palmseg/errors.hpp"
#include "palmseg/rng.hpp"

namespace palmseg {

void AugmentConfig::validate() const {
  if (multiplier < 1)
    throw ConfigError("augment: multiplier must be >= 1, got " +
                      std::to_string(multiplier));
  for (double p : {hflip_p, ssr_p, brightness_contrast_p, clahe_p})
    if (p < 0.0 || p > 1.0)
      throw ConfigError("augment: probabilities must lie in [0, 1]");
  if (ssr.max_shift < 0 || ssr.max_angle < 0)
    throw ConfigError("augment: shift and angle bounds must be >= 0");
  if (ssr.scale_lo <= 0 || ssr.scale_lo > ssr.scale_hi)
    throw ConfigError("augment: scale range is empty or non-positive");
  if (max_brightness < 0 || max_contrast < 0)
    throw ConfigError("augment: brightness/contrast bounds must be >= 0");
  if (clahe_clip <= 0 || clahe_tiles < 1)
    throw ConfigError("augment: clahe settings out of range");
}

ImageSample resize_to(const ImageSample& sample, int size) {
  ImageSample out = sample;
  out.image = resize(sample.image, size, size, Interp::Bilinear);
  out.mask = resize(sample.mask, size, size, Interp::Nearest);
  return out;
}

ImageSample hflip_sample(const ImageSample& sample) {
  ImageSample out = sample;
  out.image = hflip(sample.image);
  out.mask = hflip(sample.mask);
  out.lineage.push_back("hflip()");
  return out;
}

ImageSample shift_scale_rotate(const ImageSample& sample,
                               const AffineParams& params,
                               const SsrLimits& limits) {
  if (std::abs(params.shift_x) > limits.max_shift ||
      std::abs(params.shift_y) > limits.max_shift)
    throw ArgumentError("shift_scale_rotate: shift exceeds +-" +
                        std::to_string(limits.max_shift));
  if (params.scale < limits.scale_lo || params.scale > limits.scale_hi)
    throw ArgumentError("shift_scale_rotate: scale " +
                        std::to_string(params.scale) + " outside [" +
                        std::to_string(limits.scale_lo) + ", " +
                        std::to_string(limits.scale_hi) + "]");
  if (std::abs(params.angle_deg) > limits.max_angle)
    throw ArgumentError("shift_scale_rotate: angle exceeds +-" +
                        std::to_string(limits.max_angle) + " degrees");

  ImageSample out = sample;
  out.image = warp_affine(sample.image, params, Interp::Bilinear);
  out.mask = warp_affine(sample.mask, params, Interp::Nearest);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "shift_scale_rotate(dx=%.4f,dy=%.4f,scale=%.4f,angle=%.2f)",
                params.shift_x, params.shift_y, params.scale,
                params.angle_deg);
  out.lineage.push_back(buf);
  return out;
}

std::vector<ImageSample> augment_dataset(
    const std::vector<ImageSample>& sources, const AugmentConfig& config) {
  config.validate();
  std::vector<ImageSample> out;
  out.reserve(sources.size() * size_t(config.multiplier));
  for (const ImageSample& source : sources) {
    out.push_back(source);
    const uint64_t id_seed = hash_combine(config.seed, source.id);
    for (int copy = 1; copy < config.multiplier; ++copy) {
      Rng rng(hash_combine(id_seed, uint64_t(copy)));
      ImageSample sample = source;
      sample.id = source.id + "__aug" + std::to_string(copy);

      if (config.enable_hflip && rng.next_double() < config.hflip_p)
        sample = hflip_sample(sample);

      if (config.enable_ssr && rng.next_double() < config.ssr_p) {
        AffineParams params;
        params.shift_x = rng.uniform(-config.ssr.max_shift,
                                     config.ssr.max_shift);
        params.shift_y = rng.uniform(-config.ssr.max_shift,
                                     config.ssr.max_shift);
        params.scale = rng.uniform(config.ssr.scale_lo, config.ssr.scale_hi);
        params.angle_deg = rng.uniform(-config.ssr.max_angle,
                                       config.ssr.max_angle);
        sample = shift_scale_rotate(sample, params, config.ssr);
      }

      if (config.enable_brightness_contrast &&
          rng.next_double() < config.brightness_contrast_p) {
        const double db =
            rng.uniform(-config.max_brightness, config.max_brightness);
        const double dc =
            rng.uniform(-config.max_contrast, config.max_contrast);
        sample.image = brightness_contrast(sample.image, db, dc);
        char buf[96];
        std::snprintf(buf, sizeof buf, "brightness_contrast(db=%.4f,dc=%.4f)",
                      db, dc);
        sample.lineage.push_back(buf);
      }

      if (config.enable_clahe && rng.next_double() < config.clahe_p) {
        sample.image = clahe(sample.image, config.clahe_clip,
                             config.clahe_tiles, config.clahe_tiles);
        char buf[96];
        std::snprintf(buf, sizeof buf, "clahe(clip=%.2f,tiles=%dx%d)",
                      config.clahe_clip, config.clahe_tiles,
                      config.clahe_tiles);
        sample.lineage.push_back(buf);
      }

      out.push_back(std::move(sample));
    }
  }
  return out;
}

std::string lineage_manifest(const std::vector<ImageSample>& samples) {
  std::ostringstream out;
  for (const ImageSample& s : samples) {
    out << s.id;
    for (const std::string& step : s.lineage) out << '\t' << step;
    out << '\n';
  }
  return out.str();
}

}  // namespace palmseg
