#include "palmseg/unet.hpp"

#include <algorithm>
#include <sstream>

#include "palmseg/cfm.hpp"
#include "palmseg/checkpoint.hpp"
#include "palmseg/init.hpp"
#include "palmseg/ops.hpp"

namespace palmseg {

void UNetConfig::validate() const {
  if (depth < 1 || depth > 8)
    throw ConfigError("unet: depth must be in [1, 8], got " +
                      std::to_string(depth));
  if (base_channels < 1)
    throw ConfigError("unet: base_channels must be positive");
  if (in_channels < 1 || out_channels < 1)
    throw ConfigError("unet: channel counts must be positive");
  if (cfm_reduction < 1)
    throw ConfigError("unet: cfm_reduction must be positive");
  const int64_t bottleneck = int64_t(base_channels) << depth;
  if (use_cfm && bottleneck % cfm_reduction != 0)
    throw ConfigError("unet: cfm_reduction " + std::to_string(cfm_reduction) +
                      " does not divide the " + std::to_string(bottleneck) +
                      " bottleneck channels");
}

std::string UNetConfig::to_text() const {
  std::ostringstream out;
  out << "depth = " << depth << '\n'
      << "base_channels = " << base_channels << '\n'
      << "cfm_reduction = " << cfm_reduction << '\n'
      << "in_channels = " << in_channels << '\n'
      << "out_channels = " << out_channels << '\n'
      << "use_cfm = " << (use_cfm ? "true" : "false") << '\n';
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("unet: value '" + value + "' for " + key +
                      " is not an integer");
  }
}

}  // namespace

UNetConfig UNetConfig::from_text(const std::string& text) {
  UNetConfig config;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("unet: config line '" + stripped +
                        "' is not 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "depth") {
      config.depth = parse_int(key, value);
    } else if (key == "base_channels") {
      config.base_channels = parse_int(key, value);
    } else if (key == "cfm_reduction") {
      config.cfm_reduction = parse_int(key, value);
    } else if (key == "in_channels") {
      config.in_channels = parse_int(key, value);
    } else if (key == "out_channels") {
      config.out_channels = parse_int(key, value);
    } else if (key == "use_cfm") {
      if (value == "true") {
        config.use_cfm = true;
      } else if (value == "false") {
        config.use_cfm = false;
      } else {
        throw ConfigError("unet: use_cfm must be true or false, got '" +
                          value + "'");
      }
    } else {
      throw ConfigError("unet: unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

namespace {

void push_conv(std::vector<std::pair<std::string, Shape>>& layout,
               const std::string& name, int64_t c_out, int64_t c_in,
               int64_t k) {
  layout.emplace_back(name + ".weight", Shape{c_out, c_in, k, k});
  layout.emplace_back(name + ".bias", Shape{c_out});
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_layout(
    const UNetConfig& config) {
  config.validate();
  std::vector<std::pair<std::string, Shape>> layout;
  const int64_t base = config.base_channels;

  int64_t prev = config.in_channels;
  for (int i = 0; i < config.depth; ++i) {
    const int64_t ch = base << i;
    const std::string level = "enc" + std::to_string(i);
    push_conv(layout, level + ".conv1", ch, prev, 3);
    push_conv(layout, level + ".conv2", ch, ch, 3);
    prev = ch;
  }

  const int64_t mid = base << config.depth;
  push_conv(layout, "bottleneck.conv1", mid, prev, 3);
  push_conv(layout, "bottleneck.conv2", mid, mid, 3);
  if (config.use_cfm) {
    const int64_t red = mid / config.cfm_reduction;
    push_conv(layout, "cfm.ctx_proj", 1, mid, 1);
    push_conv(layout, "cfm.left_a", red, mid, 1);
    push_conv(layout, "cfm.left_b", mid, red, 1);
    push_conv(layout, "cfm.right_a", red, mid, 1);
    push_conv(layout, "cfm.right_b", mid, red, 1);
  }

  for (int i = config.depth - 1; i >= 0; --i) {
    const int64_t ch = base << i;
    const std::string level = "dec" + std::to_string(i);
    push_conv(layout, level + ".up", ch, ch * 2, 3);
    push_conv(layout, level + ".conv1", ch, ch * 2, 3);
    push_conv(layout, level + ".conv2", ch, ch, 3);
  }

  push_conv(layout, "head", config.out_channels, base, 1);
  return layout;
}

template <typename T>
TensorT<T>& ModelT<T>::param(std::string_view name) {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw ConfigError("unet: no parameter named '" + std::string(name) + "'");
}

template <typename T>
const TensorT<T>& ModelT<T>::param(std::string_view name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return params[i];
  throw ConfigError("unet: no parameter named '" + std::string(name) + "'");
}

template <typename T>
ModelT<T> build_unet(const UNetConfig& config, uint64_t seed) {
  ModelT<T> model;
  model.config = config;
  for (const auto& [name, shape] : parameter_layout(config)) {
    if (shape.size() == 4) {
      model.params.push_back(kaiming_conv_weight<T>(
          shape[0], shape[1], shape[2], shape[3], seed, name));
    } else {
      model.params.push_back(zero_bias<T>(shape[0]));
    }
    model.names.push_back(name);
  }
  return model;
}

namespace {

template <typename T>
TensorT<T> conv_block(const ModelT<T>& m, const std::string& name,
                      const TensorT<T>& x, int padding) {
  return relu(conv2d(x, m.param(name + ".weight"), m.param(name + ".bias"), 1,
                     padding));
}

template <typename T>
CFMWeightsT<T> cfm_view(const ModelT<T>& m) {
  CFMWeightsT<T> w;
  w.channels = int64_t(m.config.base_channels) << m.config.depth;
  w.reduction = m.config.cfm_reduction;
  w.ctx_proj_w = m.param("cfm.ctx_proj.weight");
  w.ctx_proj_b = m.param("cfm.ctx_proj.bias");
  w.left_a_w = m.param("cfm.left_a.weight");
  w.left_a_b = m.param("cfm.left_a.bias");
  w.left_b_w = m.param("cfm.left_b.weight");
  w.left_b_b = m.param("cfm.left_b.bias");
  w.right_a_w = m.param("cfm.right_a.weight");
  w.right_a_b = m.param("cfm.right_a.bias");
  w.right_b_w = m.param("cfm.right_b.weight");
  w.right_b_b = m.param("cfm.right_b.bias");
  return w;
}

}  // namespace

template <typename T>
TensorT<T> unet_forward(const ModelT<T>& model, const TensorT<T>& x) {
  if (x.rank() != 4)
    throw DimensionError("unet: input must be rank 4, got shape " +
                         shape_str(x.shape()));
  if (x.dim(1) != model.config.in_channels)
    throw DimensionError("unet: input has " + std::to_string(x.dim(1)) +
                         " channels, model expects " +
                         std::to_string(model.config.in_channels));

  std::vector<TensorT<T>> skips;
  TensorT<T> cur = x;
  for (int i = 0; i < model.config.depth; ++i) {
    const std::string level = "enc" + std::to_string(i);
    cur = conv_block(model, level + ".conv1", cur, 1);
    cur = conv_block(model, level + ".conv2", cur, 1);
    skips.push_back(cur);
    if (cur.dim(2) % 2 != 0 || cur.dim(3) % 2 != 0)
      throw DimensionError("unet: encoder level " + std::to_string(i) +
                           " cannot halve extents " + shape_str(cur.shape()));
    cur = maxpool2(cur);
  }

  cur = conv_block(model, "bottleneck.conv1", cur, 1);
  cur = conv_block(model, "bottleneck.conv2", cur, 1);
  if (model.config.use_cfm) cur = cfm_forward(cur, cfm_view(model));

  for (int i = model.config.depth - 1; i >= 0; --i) {
    const std::string level = "dec" + std::to_string(i);
    cur = conv_block(model, level + ".up", upsample2(cur), 1);
    cur = concat_channels(skips[size_t(i)], cur);
    cur = conv_block(model, level + ".conv1", cur, 1);
    cur = conv_block(model, level + ".conv2", cur, 1);
  }

  return sigmoid(
      conv2d(cur, model.param("head.weight"), model.param("head.bias"), 1, 0));
}

template <typename T>
int64_t param_count(const ModelT<T>& model) {
  int64_t total = 0;
  for (const TensorT<T>& p : model.params) total += p.numel();
  return total;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  Checkpoint ck;
  ck.config_text = model.config.to_text();
  for (size_t i = 0; i < model.params.size(); ++i) {
    const TensorT<float>& p = model.params[i];
    ck.entries.push_back(CheckpointEntry{
        model.names[i], p.shape(),
        std::vector<float>(p.data().begin(), p.data().end())});
  }
  save_checkpoint(ck, path);
}

Model load_model(const std::filesystem::path& path) {
  const Checkpoint ck = load_checkpoint(path);
  Model model;
  model.config = UNetConfig::from_text(ck.config_text);

  const auto layout = parameter_layout(model.config);
  if (ck.entries.size() != layout.size())
    throw CheckpointError(
        CheckpointError::Fault::ShapeMismatch,
        "checkpoint: " + std::to_string(ck.entries.size()) +
            " tensors where the architecture needs " +
            std::to_string(layout.size()));
  for (size_t i = 0; i < layout.size(); ++i) {
    const CheckpointEntry& e = ck.entries[i];
    if (e.name != layout[i].first)
      throw CheckpointError(CheckpointError::Fault::ShapeMismatch,
                            "checkpoint: tensor " + std::to_string(i) +
                                " is named '" + e.name + "', expected '" +
                                layout[i].first + "'");
    if (e.shape != layout[i].second)
      throw CheckpointError(CheckpointError::Fault::ShapeMismatch,
                            "checkpoint: " + e.name + " has shape " +
                                shape_str(e.shape) + ", expected " +
                                shape_str(layout[i].second));
    model.names.push_back(e.name);
    model.params.push_back(
        TensorT<float>::from_vector(e.shape, e.values, true));
  }
  return model;
}

#define PALMSEG_INSTANTIATE_UNET(T)                                        \
  template struct ModelT<T>;                                               \
  template ModelT<T> build_unet<T>(const UNetConfig&, uint64_t);           \
  template TensorT<T> unet_forward<T>(const ModelT<T>&, const TensorT<T>&);\
  template int64_t param_count<T>(const ModelT<T>&);

PALMSEG_INSTANTIATE_UNET(float)
PALMSEG_INSTANTIATE_UNET(double)
#undef PALMSEG_INSTANTIATE_UNET

}  // namespace palmseg
