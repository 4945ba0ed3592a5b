#pragma once

#include "palmseg/tensor.hpp"

namespace palmseg {

/// Context Fusion Module weights: a 1x1 projection producing attention
/// logits, plus two independent squeeze/expand branches. The left branch
/// ends in a sigmoid and gates the input per channel; the right branch is
/// unbounded and is added per channel.
template <typename T>
struct CFMWeightsT {
  int64_t channels = 0;
  int64_t reduction = 0;

  TensorT<T> ctx_proj_w, ctx_proj_b;  // [1,C,1,1], [1]
  TensorT<T> left_a_w, left_a_b;      // [C/r,C,1,1], [C/r]
  TensorT<T> left_b_w, left_b_b;      // [C,C/r,1,1], [C]
  TensorT<T> right_a_w, right_a_b;    // [C/r,C,1,1], [C/r]
  TensorT<T> right_b_w, right_b_b;    // [C,C/r,1,1], [C]
};

using CFMWeights = CFMWeightsT<float>;

/// Kaiming-initialized weights. `name_prefix` scopes the per-tensor seed
/// streams (e.g. "cfm."). reduction must divide channels.
template <typename T>
CFMWeightsT<T> make_cfm(int64_t channels, int64_t reduction, uint64_t seed,
                        std::string_view name_prefix = "cfm.");

/// Attention-pooled global context: softmax over the spatial positions of
/// the ctx_proj logits, then a weighted average of x per channel -> [N,C].
template <typename T>
TensorT<T> context_modeling(const TensorT<T>& x, const CFMWeightsT<T>& w);

/// sigmoid(left_b(relu(left_a(g)))), values strictly in (0,1).
template <typename T>
TensorT<T> transform_left(const TensorT<T>& g, const CFMWeightsT<T>& w);

/// right_b(relu(right_a(g))), unbounded.
template <typename T>
TensorT<T> transform_right(const TensorT<T>& g, const CFMWeightsT<T>& w);

/// out[n,c,h,w] = gate[n,c] * x[n,c,h,w] + add[n,c], with gate and add
/// derived from the pooled context. Shape-preserving.
template <typename T>
TensorT<T> cfm_forward(const TensorT<T>& x, const CFMWeightsT<T>& w);

#define PALMSEG_EXTERN_CFM(T)                                               \
  extern template struct CFMWeightsT<T>;                                    \
  extern template CFMWeightsT<T> make_cfm<T>(int64_t, int64_t, uint64_t,    \
                                             std::string_view);             \
  extern template TensorT<T> context_modeling<T>(const TensorT<T>&,         \
                                                 const CFMWeightsT<T>&);    \
  extern template TensorT<T> transform_left<T>(const TensorT<T>&,           \
                                               const CFMWeightsT<T>&);      \
  extern template TensorT<T> transform_right<T>(const TensorT<T>&,          \
                                                const CFMWeightsT<T>&);     \
  extern template TensorT<T> cfm_forward<T>(const TensorT<T>&,              \
                                            const CFMWeightsT<T>&);

PALMSEG_EXTERN_CFM(float)
PALMSEG_EXTERN_CFM(double)
#undef PALMSEG_EXTERN_CFM

}  // namespace palmseg
