#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "palmseg/image.hpp"

namespace palmseg {

/// One image/mask pair. Images are grayscale by the time they are here
/// (color inputs are desaturated on load); masks hold only 0 and 255.
struct ImageSample {
  std::string id;
  GrayImage image;
  GrayImage mask;
  std::string split;                 // "train", "val", "test" or empty
  std::vector<std::string> lineage;  // applied transforms, oldest first
};

struct LoadReport {
  std::vector<std::string> issues;
  size_t n_loaded = 0;
  size_t n_rejected = 0;
};

/// Reads `root/images/*.png` with masks under `root/masks/<same stem>.png`,
/// sorted by id. Masks binarize at 128 (>= 128 becomes 255). Orphan images,
/// unreadable files, and size mismatches are skipped and noted in the
/// report. An empty result is a hard error.
std::vector<ImageSample> load_dataset(const std::filesystem::path& root,
                                      LoadReport* report = nullptr);

/// Deterministic shuffle then contiguous assignment. Counts floor for val
/// and test; the remainder goes to train. Ratios must sum to 1.
void split_samples(std::vector<ImageSample>& samples, double train_ratio,
                   double val_ratio, double test_ratio, uint64_t seed);

/// Line-oriented `id<TAB>split` manifest.
void write_split_manifest(const std::vector<ImageSample>& samples,
                          const std::filesystem::path& path);
void apply_split_manifest(std::vector<ImageSample>& samples,
                          const std::filesystem::path& path);

std::vector<const ImageSample*> samples_in_split(
    const std::vector<ImageSample>& samples, std::string_view split);

}  // namespace palmseg
