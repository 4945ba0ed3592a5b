#pragma once

#include <string>
#include <vector>

#include "palmseg/tensor.hpp"

namespace palmseg {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates, allocated lazily on the first step.
template <typename T>
struct AdamStateT {
  std::vector<TensorT<T>> m;
  std::vector<TensorT<T>> v;
  int64_t step = 0;
};

using AdamState = AdamStateT<float>;

/// One bias-corrected Adam update over `params`, reading each tensor's own
/// gradient buffer. `names` parallels `params` and is used in diagnostics.
/// A non-finite gradient raises NumericError naming the parameter.
template <typename T>
void adam_step(std::vector<TensorT<T>>& params,
               const std::vector<std::string>& names, AdamStateT<T>& state,
               const AdamConfig& config);

extern template void adam_step<float>(std::vector<TensorT<float>>&,
                                      const std::vector<std::string>&,
                                      AdamStateT<float>&, const AdamConfig&);
extern template void adam_step<double>(std::vector<TensorT<double>>&,
                                       const std::vector<std::string>&,
                                       AdamStateT<double>&, const AdamConfig&);

}  // namespace palmseg
