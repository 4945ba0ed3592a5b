#include "palmseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "palmseg/errors.hpp"
#include "palmseg/png_io.hpp"
#include "palmseg/rng.hpp"

namespace palmseg {

namespace {

GrayImage binarize_mask(const GrayImage& mask) {
  GrayImage out = mask;
  for (uint8_t& p : out.pixels) p = p >= 128 ? 255 : 0;
  return out;
}

void note(LoadReport* report, const std::string& issue) {
  if (report) {
    report->issues.push_back(issue);
    report->n_rejected += 1;
  }
}

}  // namespace

std::vector<ImageSample> load_dataset(const std::filesystem::path& root,
                                      LoadReport* report) {
  const std::filesystem::path images_dir = root / "images";
  const std::filesystem::path masks_dir = root / "masks";
  if (!std::filesystem::is_directory(images_dir))
    throw DataError("dataset: " + images_dir.string() +
                    " is not a directory");

  std::vector<std::filesystem::path> image_files;
  for (const auto& entry : std::filesystem::directory_iterator(images_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      image_files.push_back(entry.path());
  std::sort(image_files.begin(), image_files.end());

  std::vector<ImageSample> samples;
  for (const std::filesystem::path& image_path : image_files) {
    const std::string id = image_path.stem().string();
    const std::filesystem::path mask_path = masks_dir / (id + ".png");
    if (!std::filesystem::is_regular_file(mask_path)) {
      note(report, id + ": no mask at " + mask_path.string());
      continue;
    }
    ImageSample sample;
    sample.id = id;
    try {
      sample.image = read_png(image_path).to_gray();
      sample.mask = binarize_mask(read_png(mask_path).to_gray());
    } catch (const DataError& e) {
      note(report, id + ": " + e.what());
      continue;
    }
    if (!sample.image.same_size(sample.mask)) {
      note(report, id + ": image is " + std::to_string(sample.image.width) +
                       "x" + std::to_string(sample.image.height) +
                       " but mask is " + std::to_string(sample.mask.width) +
                       "x" + std::to_string(sample.mask.height));
      continue;
    }
    samples.push_back(std::move(sample));
  }

  if (report) report->n_loaded = samples.size();
  if (samples.empty())
    throw DataError("dataset: no samples under " + root.string());
  return samples;
}

void split_samples(std::vector<ImageSample>& samples, double train_ratio,
                   double val_ratio, double test_ratio, uint64_t seed) {
  if (train_ratio < 0 || val_ratio < 0 || test_ratio < 0 ||
      std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw ArgumentError("split: ratios must be non-negative and sum to 1");

  const int64_t n = int64_t(samples.size());
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(hash_combine(seed, "split"));
  for (int64_t i = n - 1; i > 0; --i)
    std::swap(order[size_t(i)], order[size_t(rng.next_below(i + 1))]);

  const int64_t n_val = int64_t(std::floor(double(n) * val_ratio));
  const int64_t n_test = int64_t(std::floor(double(n) * test_ratio));
  const int64_t n_train = n - n_val - n_test;
  for (int64_t i = 0; i < n; ++i) {
    ImageSample& s = samples[order[size_t(i)]];
    if (i < n_train) {
      s.split = "train";
    } else if (i < n_train + n_val) {
      s.split = "val";
    } else {
      s.split = "test";
    }
  }
}

void write_split_manifest(const std::vector<ImageSample>& samples,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw DataError("dataset: cannot write manifest " + path.string());
  for (const ImageSample& s : samples) out << s.id << '\t' << s.split << '\n';
  out.flush();
  if (!out)
    throw DataError("dataset: write to " + path.string() + " failed");
}

void apply_split_manifest(std::vector<ImageSample>& samples,
                          const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("dataset: cannot read manifest " + path.string());
  std::map<std::string, std::string> assignment;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("dataset: manifest line " + std::to_string(line_no) +
                      " has no tab separator");
    const std::string split = line.substr(tab + 1);
    if (split != "train" && split != "val" && split != "test")
      throw DataError("dataset: manifest line " + std::to_string(line_no) +
                      " names unknown split '" + split + "'");
    assignment[line.substr(0, tab)] = split;
  }
  for (ImageSample& s : samples) {
    const auto it = assignment.find(s.id);
    if (it == assignment.end())
      throw DataError("dataset: sample '" + s.id + "' missing from manifest " +
                      path.string());
    s.split = it->second;
  }
}

std::vector<const ImageSample*> samples_in_split(
    const std::vector<ImageSample>& samples, std::string_view split) {
  std::vector<const ImageSample*> out;
  for (const ImageSample& s : samples)
    if (s.split == split) out.push_back(&s);
  return out;
}

}  // namespace palmseg
