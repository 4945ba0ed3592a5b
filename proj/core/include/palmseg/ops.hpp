#pragma once

#include "palmseg/tensor.hpp"

namespace palmseg {

// Differentiable tensor operations. Each op computes its value immediately
// and, when a graph is active and any input requires gradients, records a
// backward rule onto the active tape. Activation tensors are N,C,H,W.

/// Cross-correlation of `input` [N,Cin,H,W] with `kernel` [Cout,Cin,kH,kW]
/// plus `bias` [Cout]. Output extent is (H + 2*padding - kH) / stride + 1.
/// Kernel extents must be odd.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& kernel,
                  const TensorT<T>& bias, int stride = 1, int padding = 0);

/// Elementwise max(0, x).
template <typename T>
TensorT<T> relu(const TensorT<T>& x);

/// Elementwise 1 / (1 + exp(-x)), computed overflow-free on both tails.
template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x);

/// Softmax over the H*W positions of a single-channel map [N,1,H,W], with
/// max subtraction for stability. Per-sample outputs sum to 1.
template <typename T>
TensorT<T> softmax_spatial(const TensorT<T>& x);

/// 2x2 non-overlapping max pooling. Spatial extents must be even. The
/// gradient routes to the first maximal element in row-major scan order.
template <typename T>
TensorT<T> maxpool2(const TensorT<T>& x);

/// Nearest-neighbor 2x upsampling; backward sums each 2x2 block.
template <typename T>
TensorT<T> upsample2(const TensorT<T>& x);

/// Channel concatenation [N,Ca,H,W] + [N,Cb,H,W] -> [N,Ca+Cb,H,W].
template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b);

/// Same data, new extents (element count must match).
template <typename T>
TensorT<T> reshape(const TensorT<T>& x, Shape new_shape);

/// Spatial weighted average: weights [N,1,H,W] applied to x [N,C,H,W],
/// producing one pooled value per channel, [N,C].
template <typename T>
TensorT<T> attention_pool(const TensorT<T>& x, const TensorT<T>& weights);

/// Per-channel gain: out[n,c,h,w] = x[n,c,h,w] * gain[n,c].
template <typename T>
TensorT<T> scale_channels(const TensorT<T>& x, const TensorT<T>& gain);

/// Per-channel offset: out[n,c,h,w] = x[n,c,h,w] + offset[n,c].
template <typename T>
TensorT<T> add_channels(const TensorT<T>& x, const TensorT<T>& offset);

/// Elementwise product of same-shape tensors.
template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b);

/// Sum of all elements, as a single-element tensor.
template <typename T>
TensorT<T> sum(const TensorT<T>& x);

#define PALMSEG_EXTERN_OPS(T)                                                \
  extern template TensorT<T> conv2d<T>(const TensorT<T>&, const TensorT<T>&, \
                                       const TensorT<T>&, int, int);         \
  extern template TensorT<T> relu<T>(const TensorT<T>&);                     \
  extern template TensorT<T> sigmoid<T>(const TensorT<T>&);                  \
  extern template TensorT<T> softmax_spatial<T>(const TensorT<T>&);          \
  extern template TensorT<T> maxpool2<T>(const TensorT<T>&);                 \
  extern template TensorT<T> upsample2<T>(const TensorT<T>&);                \
  extern template TensorT<T> concat_channels<T>(const TensorT<T>&,           \
                                                const TensorT<T>&);          \
  extern template TensorT<T> reshape<T>(const TensorT<T>&, Shape);           \
  extern template TensorT<T> attention_pool<T>(const TensorT<T>&,            \
                                               const TensorT<T>&);           \
  extern template TensorT<T> scale_channels<T>(const TensorT<T>&,            \
                                               const TensorT<T>&);           \
  extern template TensorT<T> add_channels<T>(const TensorT<T>&,              \
                                             const TensorT<T>&);             \
  extern template TensorT<T> mul<T>(const TensorT<T>&, const TensorT<T>&);   \
  extern template TensorT<T> sum<T>(const TensorT<T>&);

PALMSEG_EXTERN_OPS(float)
PALMSEG_EXTERN_OPS(double)
#undef PALMSEG_EXTERN_OPS

}  // namespace palmseg
