#pragma once

// Independent plain-loop references the fast implementations are checked
// against. Everything here favors clarity over speed and accumulates in
// double regardless of the tensor element type.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "palmseg/tensor.hpp"

namespace testsupport {

struct RefConvResult {
  int64_t h_out = 0;
  int64_t w_out = 0;
  std::vector<double> values;  // [N,Cout,h_out,w_out] row-major
};

template <typename T>
RefConvResult ref_conv2d(const palmseg::TensorT<T>& input,
                         const palmseg::TensorT<T>& kernel,
                         const palmseg::TensorT<T>& bias, int64_t stride,
                         int64_t padding) {
  const auto& is = input.shape();
  const auto& ks = kernel.shape();
  const int64_t n = is[0], ci = is[1], h = is[2], w = is[3];
  const int64_t co = ks[0], kh = ks[2], kw = ks[3];
  RefConvResult out;
  out.h_out = (h + 2 * padding - kh) / stride + 1;
  out.w_out = (w + 2 * padding - kw) / stride + 1;
  out.values.assign(size_t(n * co * out.h_out * out.w_out), 0.0);
  auto in_at = [&](int64_t b, int64_t c, int64_t y, int64_t x) -> double {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return double(input.data()[size_t(((b * ci + c) * h + y) * w + x)]);
  };
  for (int64_t b = 0; b < n; ++b)
    for (int64_t oc = 0; oc < co; ++oc)
      for (int64_t oy = 0; oy < out.h_out; ++oy)
        for (int64_t ox = 0; ox < out.w_out; ++ox) {
          double acc = double(bias.data()[size_t(oc)]);
          for (int64_t c = 0; c < ci; ++c)
            for (int64_t dy = 0; dy < kh; ++dy)
              for (int64_t dx = 0; dx < kw; ++dx) {
                const double kv = double(
                    kernel.data()[size_t(((oc * ci + c) * kh + dy) * kw + dx)]);
                acc += kv * in_at(b, c, oy * stride + dy - padding,
                                  ox * stride + dx - padding);
              }
          out.values[size_t(((b * co + oc) * out.h_out + oy) * out.w_out +
                            ox)] = acc;
        }
  return out;
}

template <typename T>
std::vector<double> ref_maxpool2(const palmseg::TensorT<T>& x) {
  const auto& s = x.shape();
  const int64_t n = s[0], c = s[1], h = s[2], w = s[3];
  std::vector<double> out(size_t(n * c * (h / 2) * (w / 2)));
  size_t o = 0;
  for (int64_t b = 0; b < n; ++b)
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t y = 0; y < h; y += 2)
        for (int64_t xx = 0; xx < w; xx += 2) {
          double best = -1e300;
          for (int64_t dy = 0; dy < 2; ++dy)
            for (int64_t dx = 0; dx < 2; ++dx) {
              best = std::max(
                  best, double(x.data()[size_t(
                            ((b * c + ch) * h + y + dy) * w + xx + dx)]));
            }
          out[o++] = best;
        }
  return out;
}

/// Attention-pooled context vector computed as an explicit double loop:
/// softmax of the 1x1-projected logits, then the weighted sum per channel.
template <typename T>
std::vector<double> ref_attention_pool(const palmseg::TensorT<T>& x,
                                       const palmseg::TensorT<T>& weights) {
  const auto& s = x.shape();
  const int64_t n = s[0], c = s[1], plane = s[2] * s[3];
  std::vector<double> out(size_t(n * c), 0.0);
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int64_t p = 0; p < plane; ++p) {
        acc += double(weights.data()[size_t(b * plane + p)]) *
               double(x.data()[size_t((b * c + ch) * plane + p)]);
      }
      out[size_t(b * c + ch)] = acc;
    }
  }
  return out;
}

/// y = W2·relu(W1·g + b1) + b2 over [N,C] rows; the linear maps are given as
/// [Cout,Cin,1,1] kernels the way the fused block stores them.
template <typename T>
std::vector<double> ref_two_layer(const palmseg::TensorT<T>& g,
                                  const palmseg::TensorT<T>& w1,
                                  const palmseg::TensorT<T>& b1,
                                  const palmseg::TensorT<T>& w2,
                                  const palmseg::TensorT<T>& b2,
                                  bool sigmoid_out) {
  const int64_t n = g.shape()[0], c = g.shape()[1];
  const int64_t mid = w1.shape()[0];
  std::vector<double> out(size_t(n * c));
  for (int64_t b = 0; b < n; ++b) {
    std::vector<double> hidden(static_cast<size_t>(mid));
    for (int64_t m = 0; m < mid; ++m) {
      double acc = double(b1.data()[size_t(m)]);
      for (int64_t k = 0; k < c; ++k) {
        acc += double(w1.data()[size_t(m * c + k)]) *
               double(g.data()[size_t(b * c + k)]);
      }
      hidden[size_t(m)] = std::max(0.0, acc);
    }
    for (int64_t k = 0; k < c; ++k) {
      double acc = double(b2.data()[size_t(k)]);
      for (int64_t m = 0; m < mid; ++m) {
        acc += double(w2.data()[size_t(k * mid + m)]) * hidden[size_t(m)];
      }
      out[size_t(b * c + k)] = sigmoid_out ? 1.0 / (1.0 + std::exp(-acc)) : acc;
    }
  }
  return out;
}

template <typename T>
double ref_bce(const palmseg::TensorT<T>& pred,
               const palmseg::TensorT<T>& target) {
  double acc = 0.0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    double p = std::clamp(double(pred.data()[size_t(i)]), 1e-7, 1.0 - 1e-7);
    double t = double(target.data()[size_t(i)]);
    acc += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  }
  return acc / double(pred.numel());
}

template <typename T>
double ref_mse(const palmseg::TensorT<T>& pred,
               const palmseg::TensorT<T>& target) {
  double acc = 0.0;
  for (int64_t i = 0; i < pred.numel(); ++i) {
    double d = double(pred.data()[size_t(i)]) - double(target.data()[size_t(i)]);
    acc += d * d;
  }
  return acc / double(pred.numel());
}

struct RefCounts {
  int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline RefCounts ref_count(const std::vector<uint8_t>& pred,
                           const std::vector<uint8_t>& target) {
  RefCounts c;
  for (size_t i = 0; i < pred.size(); ++i) {
    bool p = pred[i] != 0, t = target[i] != 0;
    if (p && t) ++c.tp;
    else if (p && !t) ++c.fp;
    else if (!p && t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

}  // namespace testsupport
