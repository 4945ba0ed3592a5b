#include "palmseg/cfm.hpp"

#include <string>

#include "palmseg/errors.hpp"
#include "palmseg/init.hpp"
#include "palmseg/ops.hpp"

namespace palmseg {

template <typename T>
CFMWeightsT<T> make_cfm(int64_t channels, int64_t reduction, uint64_t seed,
                        std::string_view name_prefix) {
  if (channels <= 0 || reduction <= 0)
    throw ConfigError("cfm: channels and reduction must be positive");
  if (channels % reduction != 0)
    throw ConfigError("cfm: reduction " + std::to_string(reduction) +
                      " does not divide " + std::to_string(channels) +
                      " channels");
  const int64_t mid = channels / reduction;
  const std::string p(name_prefix);

  CFMWeightsT<T> w;
  w.channels = channels;
  w.reduction = reduction;
  w.ctx_proj_w =
      kaiming_conv_weight<T>(1, channels, 1, 1, seed, p + "ctx_proj.weight");
  w.ctx_proj_b = zero_bias<T>(1);
  w.left_a_w =
      kaiming_conv_weight<T>(mid, channels, 1, 1, seed, p + "left_a.weight");
  w.left_a_b = zero_bias<T>(mid);
  w.left_b_w =
      kaiming_conv_weight<T>(channels, mid, 1, 1, seed, p + "left_b.weight");
  w.left_b_b = zero_bias<T>(channels);
  w.right_a_w =
      kaiming_conv_weight<T>(mid, channels, 1, 1, seed, p + "right_a.weight");
  w.right_a_b = zero_bias<T>(mid);
  w.right_b_w =
      kaiming_conv_weight<T>(channels, mid, 1, 1, seed, p + "right_b.weight");
  w.right_b_b = zero_bias<T>(channels);
  return w;
}

namespace {

// 1x1 convolution over a pooled [N,C] vector.
template <typename T>
TensorT<T> conv_vec(const TensorT<T>& g, const TensorT<T>& weight,
                    const TensorT<T>& bias) {
  TensorT<T> as_map = reshape(g, {g.dim(0), g.dim(1), 1, 1});
  TensorT<T> out = conv2d(as_map, weight, bias, 1, 0);
  return reshape(out, {out.dim(0), out.dim(1)});
}

template <typename T>
void check_channels(const TensorT<T>& x, const CFMWeightsT<T>& w,
                    const char* op) {
  if (x.dim(1) != w.channels)
    throw DimensionError(std::string(op) + ": input has " +
                         std::to_string(x.dim(1)) + " channels, weights are "
                         "built for " + std::to_string(w.channels));
}

}  // namespace

template <typename T>
TensorT<T> context_modeling(const TensorT<T>& x, const CFMWeightsT<T>& w) {
  check_channels(x, w, "context_modeling");
  TensorT<T> logits = conv2d(x, w.ctx_proj_w, w.ctx_proj_b, 1, 0);
  TensorT<T> alpha = softmax_spatial(logits);
  return attention_pool(x, alpha);
}

template <typename T>
TensorT<T> transform_left(const TensorT<T>& g, const CFMWeightsT<T>& w) {
  return sigmoid(conv_vec(relu(conv_vec(g, w.left_a_w, w.left_a_b)),
                          w.left_b_w, w.left_b_b));
}

template <typename T>
TensorT<T> transform_right(const TensorT<T>& g, const CFMWeightsT<T>& w) {
  return conv_vec(relu(conv_vec(g, w.right_a_w, w.right_a_b)), w.right_b_w,
                  w.right_b_b);
}

template <typename T>
TensorT<T> cfm_forward(const TensorT<T>& x, const CFMWeightsT<T>& w) {
  check_channels(x, w, "cfm_forward");
  TensorT<T> g = context_modeling(x, w);
  TensorT<T> gate = transform_left(g, w);
  TensorT<T> add = transform_right(g, w);
  return add_channels(scale_channels(x, gate), add);
}

#define PALMSEG_INSTANTIATE_CFM(T)                                         \
  template struct CFMWeightsT<T>;                                          \
  template CFMWeightsT<T> make_cfm<T>(int64_t, int64_t, uint64_t,          \
                                      std::string_view);                   \
  template TensorT<T> context_modeling<T>(const TensorT<T>&,               \
                                          const CFMWeightsT<T>&);          \
  template TensorT<T> transform_left<T>(const TensorT<T>&,                 \
                                        const CFMWeightsT<T>&);            \
  template TensorT<T> transform_right<T>(const TensorT<T>&,                \
                                         const CFMWeightsT<T>&);           \
  template TensorT<T> cfm_forward<T>(const TensorT<T>&,                    \
                                     const CFMWeightsT<T>&);

PALMSEG_INSTANTIATE_CFM(float)
PALMSEG_INSTANTIATE_CFM(double)
#undef PALMSEG_INSTANTIATE_CFM

}  // namespace palmseg
