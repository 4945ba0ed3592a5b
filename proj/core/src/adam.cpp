#include "palmseg/adam.hpp"

#include <cmath>

namespace palmseg {

template <typename T>
void adam_step(std::vector<TensorT<T>>& params,
               const std::vector<std::string>& names, AdamStateT<T>& state,
               const AdamConfig& config) {
  if (params.size() != names.size())
    throw ArgumentError("adam: " + std::to_string(params.size()) +
                        " parameters but " + std::to_string(names.size()) +
                        " names");
  if (state.m.empty()) {
    for (const TensorT<T>& p : params) {
      state.m.push_back(TensorT<T>::zeros(p.shape()));
      state.v.push_back(TensorT<T>::zeros(p.shape()));
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw ArgumentError("adam: optimizer state does not match parameter list");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, double(state.step));
  const T b1 = T(config.beta1), b2 = T(config.beta2);
  const T lr = T(config.lr), eps = T(config.eps);

  for (size_t i = 0; i < params.size(); ++i) {
    TensorT<T>& p = params[i];
    if (p.shape() != state.m[i].shape())
      throw ArgumentError("adam: state shape drifted for parameter " +
                          names[i]);
    std::span<T> g = p.grad();
    std::span<T> pd = p.data();
    std::span<T> m = state.m[i].data();
    std::span<T> v = state.v[i].data();
    for (size_t j = 0; j < pd.size(); ++j) {
      if (!std::isfinite(g[j]))
        throw NumericError("adam: non-finite gradient in parameter " +
                           names[i]);
      m[j] = b1 * m[j] + (T(1) - b1) * g[j];
      v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
      const T m_hat = T(double(m[j]) / bc1);
      const T v_hat = T(double(v[j]) / bc2);
      pd[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

template void adam_step<float>(std::vector<TensorT<float>>&,
                               const std::vector<std::string>&,
                               AdamStateT<float>&, const AdamConfig&);
template void adam_step<double>(std::vector<TensorT<double>>&,
                                const std::vector<std::string>&,
                                AdamStateT<double>&, const AdamConfig&);

}  // namespace palmseg
