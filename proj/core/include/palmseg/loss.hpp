#pragma once

#include "palmseg/tensor.hpp"

namespace palmseg {

/// Binary cross-entropy, averaged over every element (batch and pixels).
/// Predictions are clamped to [1e-7, 1 - 1e-7] before the logs; elements in
/// the clamped region contribute no gradient.
template <typename T>
TensorT<T> bce_loss(const TensorT<T>& pred, const TensorT<T>& target);

/// Mean squared difference over every element.
template <typename T>
TensorT<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target);

extern template TensorT<float> bce_loss<float>(const TensorT<float>&,
                                               const TensorT<float>&);
extern template TensorT<double> bce_loss<double>(const TensorT<double>&,
                                                 const TensorT<double>&);
extern template TensorT<float> mse_loss<float>(const TensorT<float>&,
                                               const TensorT<float>&);
extern template TensorT<double> mse_loss<double>(const TensorT<double>&,
                                                 const TensorT<double>&);

}  // namespace palmseg
