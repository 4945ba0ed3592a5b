#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "palmseg/errors.hpp"

namespace palmseg::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: '" + key + "' expects an integer, got '" +
                      value + "'");
  }
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(),
                                   out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: '" + key +
                      "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double out = std::stod(value, &used);
    if (used == value.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + value +
                    "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: '" + key + "' expects true or false, got '" +
                    value + "'");
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "data") data_root = value;
  else if (key == "out") out_dir = value;
  else if (key == "seed") seed = parse_u64(key, value);
  else if (key == "device") device = value;

  else if (key == "unet.depth") unet.depth = parse_int(key, value);
  else if (key == "unet.base_channels") unet.base_channels = parse_int(key, value);
  else if (key == "unet.cfm_reduction") unet.cfm_reduction = parse_int(key, value);
  else if (key == "unet.in_channels") unet.in_channels = parse_int(key, value);
  else if (key == "unet.out_channels") unet.out_channels = parse_int(key, value);
  else if (key == "unet.use_cfm") unet.use_cfm = parse_bool(key, value);

  else if (key == "train.lr") train.lr = parse_double(key, value);
  else if (key == "train.batch_size") train.batch_size = parse_int(key, value);
  else if (key == "train.max_epochs") train.max_epochs = parse_int(key, value);
  else if (key == "train.plateau_patience") train.plateau_patience = parse_int(key, value);
  else if (key == "train.plateau_factor") train.plateau_factor = parse_double(key, value);
  else if (key == "train.early_stop_patience") train.early_stop_patience = parse_int(key, value);
  else if (key == "train.loss") train.loss = value;

  else if (key == "augment.multiplier") augment.multiplier = parse_int(key, value);
  else if (key == "augment.hflip") augment.enable_hflip = parse_bool(key, value);
  else if (key == "augment.hflip_p") augment.hflip_p = parse_double(key, value);
  else if (key == "augment.ssr") augment.enable_ssr = parse_bool(key, value);
  else if (key == "augment.ssr_p") augment.ssr_p = parse_double(key, value);
  else if (key == "augment.max_shift") augment.ssr.max_shift = parse_double(key, value);
  else if (key == "augment.scale_lo") augment.ssr.scale_lo = parse_double(key, value);
  else if (key == "augment.scale_hi") augment.ssr.scale_hi = parse_double(key, value);
  else if (key == "augment.max_angle") augment.ssr.max_angle = parse_double(key, value);
  else if (key == "augment.brightness_contrast") augment.enable_brightness_contrast = parse_bool(key, value);
  else if (key == "augment.brightness_contrast_p") augment.brightness_contrast_p = parse_double(key, value);
  else if (key == "augment.max_brightness") augment.max_brightness = parse_double(key, value);
  else if (key == "augment.max_contrast") augment.max_contrast = parse_double(key, value);
  else if (key == "augment.clahe") augment.enable_clahe = parse_bool(key, value);
  else if (key == "augment.clahe_p") augment.clahe_p = parse_double(key, value);
  else if (key == "augment.clahe_clip") augment.clahe_clip = parse_double(key, value);
  else if (key == "augment.clahe_tiles") augment.clahe_tiles = parse_int(key, value);

  else if (key == "prepare.size") prepare_size = parse_int(key, value);
  else if (key == "prepare.train_ratio") train_ratio = parse_double(key, value);
  else if (key == "prepare.val_ratio") val_ratio = parse_double(key, value);
  else if (key == "prepare.test_ratio") test_ratio = parse_double(key, value);

  else if (key == "eval.split") eval_split = value;
  else if (key == "predict.threshold") threshold = parse_double(key, value);
  else if (key == "predict.post_blur") post_blur = parse_bool(key, value);
  else if (key == "predict.blur_sigma") blur_sigma = parse_double(key, value);

  else if (key == "baseline.clahe_clip") baseline.clahe_clip = parse_double(key, value);
  else if (key == "baseline.clahe_tiles") baseline.clahe_tiles = parse_int(key, value);
  else if (key == "baseline.blur_sigma") baseline.blur_sigma = parse_double(key, value);
  else if (key == "baseline.canny_sigma") baseline.canny_sigma = parse_double(key, value);
  else if (key == "baseline.canny_low") baseline.canny_low = parse_double(key, value);
  else if (key == "baseline.canny_high") baseline.canny_high = parse_double(key, value);
  else if (key == "baseline.dilate_radius") baseline.dilate_radius = parse_int(key, value);

  else throw ConfigError("config: unknown key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::string text = trim(line);
    if (text.empty()) continue;
    size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    apply(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  out << "data = " << data_root << "\n";
  out << "out = " << out_dir << "\n";
  out << "seed = " << seed << "\n";
  out << "device = " << device << "\n";
  out << "unet.depth = " << unet.depth << "\n";
  out << "unet.base_channels = " << unet.base_channels << "\n";
  out << "unet.cfm_reduction = " << unet.cfm_reduction << "\n";
  out << "unet.in_channels = " << unet.in_channels << "\n";
  out << "unet.out_channels = " << unet.out_channels << "\n";
  out << "unet.use_cfm = " << (unet.use_cfm ? "true" : "false") << "\n";
  out << "train.lr = " << num(train.lr) << "\n";
  out << "train.batch_size = " << train.batch_size << "\n";
  out << "train.max_epochs = " << train.max_epochs << "\n";
  out << "train.plateau_patience = " << train.plateau_patience << "\n";
  out << "train.plateau_factor = " << num(train.plateau_factor) << "\n";
  out << "train.early_stop_patience = " << train.early_stop_patience << "\n";
  out << "train.loss = " << train.loss << "\n";
  out << "augment.multiplier = " << augment.multiplier << "\n";
  out << "augment.hflip = " << (augment.enable_hflip ? "true" : "false") << "\n";
  out << "augment.hflip_p = " << num(augment.hflip_p) << "\n";
  out << "augment.ssr = " << (augment.enable_ssr ? "true" : "false") << "\n";
  out << "augment.ssr_p = " << num(augment.ssr_p) << "\n";
  out << "augment.max_shift = " << num(augment.ssr.max_shift) << "\n";
  out << "augment.scale_lo = " << num(augment.ssr.scale_lo) << "\n";
  out << "augment.scale_hi = " << num(augment.ssr.scale_hi) << "\n";
  out << "augment.max_angle = " << num(augment.ssr.max_angle) << "\n";
  out << "augment.brightness_contrast = "
      << (augment.enable_brightness_contrast ? "true" : "false") << "\n";
  out << "augment.brightness_contrast_p = " << num(augment.brightness_contrast_p) << "\n";
  out << "augment.max_brightness = " << num(augment.max_brightness) << "\n";
  out << "augment.max_contrast = " << num(augment.max_contrast) << "\n";
  out << "augment.clahe = " << (augment.enable_clahe ? "true" : "false") << "\n";
  out << "augment.clahe_p = " << num(augment.clahe_p) << "\n";
  out << "augment.clahe_clip = " << num(augment.clahe_clip) << "\n";
  out << "augment.clahe_tiles = " << augment.clahe_tiles << "\n";
  out << "prepare.size = " << prepare_size << "\n";
  out << "prepare.train_ratio = " << num(train_ratio) << "\n";
  out << "prepare.val_ratio = " << num(val_ratio) << "\n";
  out << "prepare.test_ratio = " << num(test_ratio) << "\n";
  out << "eval.split = " << eval_split << "\n";
  out << "predict.threshold = " << num(threshold) << "\n";
  out << "predict.post_blur = " << (post_blur ? "true" : "false") << "\n";
  out << "predict.blur_sigma = " << num(blur_sigma) << "\n";
  out << "baseline.clahe_clip = " << num(baseline.clahe_clip) << "\n";
  out << "baseline.clahe_tiles = " << baseline.clahe_tiles << "\n";
  out << "baseline.blur_sigma = " << num(baseline.blur_sigma) << "\n";
  out << "baseline.canny_sigma = " << num(baseline.canny_sigma) << "\n";
  out << "baseline.canny_low = " << num(baseline.canny_low) << "\n";
  out << "baseline.canny_high = " << num(baseline.canny_high) << "\n";
  out << "baseline.dilate_radius = " << baseline.dilate_radius << "\n";
  return out.str();
}

void RunConfig::finalize() {
  if (device != "cpu") {
    throw ConfigError("config: device must be 'cpu', got '" + device + "'");
  }
  train.seed = seed;
  augment.seed = seed;
}

}  // namespace palmseg::cli
