#pragma once

#include <cmath>
#include <string_view>

#include "palmseg/rng.hpp"
#include "palmseg/tensor.hpp"

namespace palmseg {

// Parameter initialization. Every tensor draws from its own stream, seeded
// from the run seed and the tensor's name, so a parameter's initial values do
// not depend on which other parameters exist in the model.

/// Kaiming-uniform convolution weight [c_out, c_in, k_h, k_w]: bound
/// sqrt(6 / fan_in) with fan_in = c_in * k_h * k_w. requires_grad is set.
template <typename T>
TensorT<T> kaiming_conv_weight(int64_t c_out, int64_t c_in, int64_t k_h,
                               int64_t k_w, uint64_t seed,
                               std::string_view name) {
  Rng rng(hash_combine(seed, name));
  const double bound = std::sqrt(6.0 / double(c_in * k_h * k_w));
  std::vector<T> values(static_cast<size_t>(c_out * c_in * k_h * k_w));
  for (T& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
  return TensorT<T>::from_vector({c_out, c_in, k_h, k_w}, std::move(values),
                                 true);
}

/// Zero bias [c_out] with requires_grad set.
template <typename T>
TensorT<T> zero_bias(int64_t c_out) {
  return TensorT<T>::zeros({c_out}, true);
}

}  // namespace palmseg
