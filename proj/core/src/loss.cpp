#include "palmseg/loss.hpp"

#include <cmath>

namespace palmseg {

namespace {

constexpr double kClamp = 1e-7;

template <typename T>
void check_same_shape(const TensorT<T>& pred, const TensorT<T>& target,
                      const char* op) {
  if (pred.shape() != target.shape())
    throw DimensionError(std::string(op) + ": prediction " +
                         shape_str(pred.shape()) + " and target " +
                         shape_str(target.shape()) + " differ");
}

template <typename T>
bool loss_recording(const TensorT<T>& pred, const TensorT<T>& target) {
  return GraphT<T>::active() &&
         (pred.requires_grad() || target.requires_grad());
}

}  // namespace

template <typename T>
TensorT<T> bce_loss(const TensorT<T>& pred, const TensorT<T>& target) {
  check_same_shape(pred, target, "bce");
  const int64_t n = pred.numel();
  const T* p = pred.data().data();
  const T* t = target.data().data();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double ph =
        std::min(1.0 - kClamp, std::max(kClamp, double(p[i])));
    acc -= double(t[i]) * std::log(ph) +
           (1.0 - double(t[i])) * std::log(1.0 - ph);
  }
  TensorT<T> out = TensorT<T>::from_vector({1}, {T(acc / double(n))});

  const bool rec = loss_recording(pred, target);
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {pred, target, out},
        [pred = pred, target = target, out, n]() mutable {
          const T d = out.grad()[0];
          const T* p = pred.data().data();
          const T* t = target.data().data();
          if (pred.requires_grad()) {
            T* dp = pred.grad().data();
            for (int64_t i = 0; i < n; ++i) {
              const double ph = double(p[i]);
              if (ph <= kClamp || ph >= 1.0 - kClamp) continue;
              dp[i] += d * T((ph - double(t[i])) / (ph * (1.0 - ph)) /
                             double(n));
            }
          }
          if (target.requires_grad()) {
            T* dt = target.grad().data();
            for (int64_t i = 0; i < n; ++i) {
              const double ph =
                  std::min(1.0 - kClamp, std::max(kClamp, double(p[i])));
              dt[i] += d * T((std::log(1.0 - ph) - std::log(ph)) / double(n));
            }
          }
        });
  }
  return out;
}

template <typename T>
TensorT<T> mse_loss(const TensorT<T>& pred, const TensorT<T>& target) {
  check_same_shape(pred, target, "mse");
  const int64_t n = pred.numel();
  const T* p = pred.data().data();
  const T* t = target.data().data();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double diff = double(p[i]) - double(t[i]);
    acc += diff * diff;
  }
  TensorT<T> out = TensorT<T>::from_vector({1}, {T(acc / double(n))});

  const bool rec = loss_recording(pred, target);
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {pred, target, out},
        [pred = pred, target = target, out, n]() mutable {
          const T d = out.grad()[0];
          const T* p = pred.data().data();
          const T* t = target.data().data();
          if (pred.requires_grad()) {
            T* dp = pred.grad().data();
            for (int64_t i = 0; i < n; ++i)
              dp[i] += d * T(2.0 * (double(p[i]) - double(t[i])) / double(n));
          }
          if (target.requires_grad()) {
            T* dt = target.grad().data();
            for (int64_t i = 0; i < n; ++i)
              dt[i] += d * T(2.0 * (double(t[i]) - double(p[i])) / double(n));
          }
        });
  }
  return out;
}

template TensorT<float> bce_loss<float>(const TensorT<float>&,
                                        const TensorT<float>&);
template TensorT<double> bce_loss<double>(const TensorT<double>&,
                                          const TensorT<double>&);
template TensorT<float> mse_loss<float>(const TensorT<float>&,
                                        const TensorT<float>&);
template TensorT<double> mse_loss<double>(const TensorT<double>&,
                                          const TensorT<double>&);

}  // namespace palmseg
