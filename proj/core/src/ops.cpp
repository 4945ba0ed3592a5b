#include "palmseg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace palmseg {

namespace {

// b must be positive.
int64_t div_floor(int64_t a, int64_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

int64_t div_ceil(int64_t a, int64_t b) {
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

template <typename T>
bool recording_for(std::initializer_list<const TensorT<T>*> inputs) {
  if (!GraphT<T>::active()) return false;
  for (const TensorT<T>* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

template <typename T>
void require_rank(const TensorT<T>& t, size_t rank, const char* op,
                  const char* what) {
  if (t.rank() != rank)
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got shape " +
                         shape_str(t.shape()));
}

}  // namespace

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& kernel,
                  const TensorT<T>& bias, int stride, int padding) {
  require_rank(input, 4, "conv2d", "input");
  require_rank(kernel, 4, "conv2d", "kernel");
  require_rank(bias, 1, "conv2d", "bias");
  if (stride < 1) throw ArgumentError("conv2d: stride must be >= 1");
  if (padding < 0) throw ArgumentError("conv2d: padding must be >= 0");

  const int64_t n_batch = input.dim(0), c_in = input.dim(1);
  const int64_t h_in = input.dim(2), w_in = input.dim(3);
  const int64_t c_out = kernel.dim(0), k_h = kernel.dim(2),
                k_w = kernel.dim(3);
  if (kernel.dim(1) != c_in)
    throw DimensionError("conv2d: input has " + std::to_string(c_in) +
                         " channels but kernel expects " +
                         std::to_string(kernel.dim(1)));
  if (bias.dim(0) != c_out)
    throw DimensionError("conv2d: bias has " + std::to_string(bias.dim(0)) +
                         " entries for " + std::to_string(c_out) +
                         " output channels");
  if (k_h % 2 == 0 || k_w % 2 == 0)
    throw DimensionError("conv2d: kernel extents must be odd, got " +
                         shape_str(kernel.shape()));
  if (h_in + 2 * padding < k_h || w_in + 2 * padding < k_w)
    throw DimensionError("conv2d: kernel " + shape_str(kernel.shape()) +
                         " does not fit padded input " +
                         shape_str(input.shape()));

  const int64_t h_out = (h_in + 2 * padding - k_h) / stride + 1;
  const int64_t w_out = (w_in + 2 * padding - k_w) / stride + 1;
  const int64_t s = stride, p = padding;

  TensorT<T> out = TensorT<T>::zeros({n_batch, c_out, h_out, w_out});

  {
    const T* in = input.data().data();
    const T* k = kernel.data().data();
    const T* b = bias.data().data();
    T* o = out.data().data();
    for (int64_t n = 0; n < n_batch; ++n) {
      for (int64_t co = 0; co < c_out; ++co) {
        T* out_plane = o + ((n * c_out + co) * h_out) * w_out;
        std::fill(out_plane, out_plane + h_out * w_out, b[co]);
        for (int64_t ci = 0; ci < c_in; ++ci) {
          const T* in_plane = in + ((n * c_in + ci) * h_in) * w_in;
          const T* k_plane = k + ((co * c_in + ci) * k_h) * k_w;
          for (int64_t kh = 0; kh < k_h; ++kh) {
            const int64_t ho_lo =
                std::max<int64_t>(0, div_ceil(p - kh, s));
            const int64_t ho_hi =
                std::min(h_out - 1, div_floor(h_in - 1 + p - kh, s));
            for (int64_t kw = 0; kw < k_w; ++kw) {
              const T wk = k_plane[kh * k_w + kw];
              const int64_t wo_lo =
                  std::max<int64_t>(0, div_ceil(p - kw, s));
              const int64_t wo_hi =
                  std::min(w_out - 1, div_floor(w_in - 1 + p - kw, s));
              for (int64_t ho = ho_lo; ho <= ho_hi; ++ho) {
                const T* in_row = in_plane + (ho * s - p + kh) * w_in;
                T* out_row = out_plane + ho * w_out;
                for (int64_t wo = wo_lo; wo <= wo_hi; ++wo)
                  out_row[wo] += wk * in_row[wo * s - p + kw];
              }
            }
          }
        }
      }
    }
  }

  const bool rec = recording_for<T>({&input, &kernel, &bias});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {input, kernel, bias, out},
        [input = input, kernel = kernel, bias = bias, out, s, p, n_batch,
         c_in, c_out, h_in, w_in, h_out, w_out, k_h, k_w]() mutable {
          const T* dout = out.grad().data();
          if (bias.requires_grad()) {
            T* db = bias.grad().data();
            for (int64_t n = 0; n < n_batch; ++n)
              for (int64_t co = 0; co < c_out; ++co) {
                const T* d_plane = dout + ((n * c_out + co) * h_out) * w_out;
                T acc = 0;
                for (int64_t i = 0; i < h_out * w_out; ++i) acc += d_plane[i];
                db[co] += acc;
              }
          }
          if (kernel.requires_grad()) {
            const T* in = input.data().data();
            T* dk = kernel.grad().data();
            for (int64_t n = 0; n < n_batch; ++n)
              for (int64_t co = 0; co < c_out; ++co) {
                const T* d_plane = dout + ((n * c_out + co) * h_out) * w_out;
                for (int64_t ci = 0; ci < c_in; ++ci) {
                  const T* in_plane = in + ((n * c_in + ci) * h_in) * w_in;
                  T* dk_plane = dk + ((co * c_in + ci) * k_h) * k_w;
                  for (int64_t kh = 0; kh < k_h; ++kh) {
                    const int64_t ho_lo =
                        std::max<int64_t>(0, div_ceil(p - kh, s));
                    const int64_t ho_hi =
                        std::min(h_out - 1, div_floor(h_in - 1 + p - kh, s));
                    for (int64_t kw = 0; kw < k_w; ++kw) {
                      const int64_t wo_lo =
                          std::max<int64_t>(0, div_ceil(p - kw, s));
                      const int64_t wo_hi =
                          std::min(w_out - 1, div_floor(w_in - 1 + p - kw, s));
                      T acc = 0;
                      for (int64_t ho = ho_lo; ho <= ho_hi; ++ho) {
                        const T* in_row = in_plane + (ho * s - p + kh) * w_in;
                        const T* d_row = d_plane + ho * w_out;
                        for (int64_t wo = wo_lo; wo <= wo_hi; ++wo)
                          acc += d_row[wo] * in_row[wo * s - p + kw];
                      }
                      dk_plane[kh * k_w + kw] += acc;
                    }
                  }
                }
              }
          }
          if (input.requires_grad()) {
            const T* k = kernel.data().data();
            T* din = input.grad().data();
            for (int64_t n = 0; n < n_batch; ++n)
              for (int64_t co = 0; co < c_out; ++co) {
                const T* d_plane = dout + ((n * c_out + co) * h_out) * w_out;
                for (int64_t ci = 0; ci < c_in; ++ci) {
                  T* din_plane = din + ((n * c_in + ci) * h_in) * w_in;
                  const T* k_plane = k + ((co * c_in + ci) * k_h) * k_w;
                  for (int64_t kh = 0; kh < k_h; ++kh) {
                    const int64_t ho_lo =
                        std::max<int64_t>(0, div_ceil(p - kh, s));
                    const int64_t ho_hi =
                        std::min(h_out - 1, div_floor(h_in - 1 + p - kh, s));
                    for (int64_t kw = 0; kw < k_w; ++kw) {
                      const T wk = k_plane[kh * k_w + kw];
                      const int64_t wo_lo =
                          std::max<int64_t>(0, div_ceil(p - kw, s));
                      const int64_t wo_hi =
                          std::min(w_out - 1, div_floor(w_in - 1 + p - kw, s));
                      for (int64_t ho = ho_lo; ho <= ho_hi; ++ho) {
                        T* din_row = din_plane + (ho * s - p + kh) * w_in;
                        const T* d_row = d_plane + ho * w_out;
                        for (int64_t wo = wo_lo; wo <= wo_hi; ++wo)
                          din_row[wo * s - p + kw] += wk * d_row[wo];
                      }
                    }
                  }
                }
              }
          }
        });
  }
  return out;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  TensorT<T> out = TensorT<T>::zeros(x.shape());
  const T* xs = x.data().data();
  T* os = out.data().data();
  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) os[i] = xs[i] > T(0) ? xs[i] : T(0);

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out}, [x = x, out, n]() mutable {
      if (!x.requires_grad()) return;
      const T* dout = out.grad().data();
      const T* xs = x.data().data();
      T* dx = x.grad().data();
      for (int64_t i = 0; i < n; ++i)
        if (xs[i] > T(0)) dx[i] += dout[i];
    });
  }
  return out;
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  TensorT<T> out = TensorT<T>::zeros(x.shape());
  const T* xs = x.data().data();
  T* os = out.data().data();
  const int64_t n = x.numel();
  for (int64_t i = 0; i < n; ++i) {
    const T v = xs[i];
    if (v >= T(0)) {
      os[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      os[i] = e / (T(1) + e);
    }
  }

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out}, [x = x, out, n]() mutable {
      if (!x.requires_grad()) return;
      const T* dout = out.grad().data();
      const T* y = out.data().data();
      T* dx = x.grad().data();
      for (int64_t i = 0; i < n; ++i) dx[i] += dout[i] * y[i] * (T(1) - y[i]);
    });
  }
  return out;
}

template <typename T>
TensorT<T> softmax_spatial(const TensorT<T>& x) {
  require_rank(x, 4, "softmax_spatial", "input");
  if (x.dim(1) != 1)
    throw DimensionError("softmax_spatial: expected a single channel, got " +
                         shape_str(x.shape()));
  const int64_t n_batch = x.dim(0), plane = x.dim(2) * x.dim(3);
  TensorT<T> out = TensorT<T>::zeros(x.shape());
  const T* xs = x.data().data();
  T* os = out.data().data();
  for (int64_t n = 0; n < n_batch; ++n) {
    const T* row = xs + n * plane;
    T* orow = os + n * plane;
    T m = row[0];
    for (int64_t i = 1; i < plane; ++i) m = std::max(m, row[i]);
    T total = 0;
    for (int64_t i = 0; i < plane; ++i) {
      orow[i] = std::exp(row[i] - m);
      total += orow[i];
    }
    for (int64_t i = 0; i < plane; ++i) orow[i] /= total;
  }

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out},
                                [x = x, out, n_batch, plane]() mutable {
      if (!x.requires_grad()) return;
      const T* dout = out.grad().data();
      const T* y = out.data().data();
      T* dx = x.grad().data();
      for (int64_t n = 0; n < n_batch; ++n) {
        const T* yrow = y + n * plane;
        const T* drow = dout + n * plane;
        T* dxrow = dx + n * plane;
        T dot = 0;
        for (int64_t i = 0; i < plane; ++i) dot += drow[i] * yrow[i];
        for (int64_t i = 0; i < plane; ++i)
          dxrow[i] += yrow[i] * (drow[i] - dot);
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> maxpool2(const TensorT<T>& x) {
  require_rank(x, 4, "maxpool2", "input");
  const int64_t n_batch = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0)
    throw DimensionError("maxpool2: spatial extents must be even, got " +
                         shape_str(x.shape()));
  const int64_t ho = h / 2, wo = w / 2;
  TensorT<T> out = TensorT<T>::zeros({n_batch, ch, ho, wo});
  std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));

  const T* xs = x.data().data();
  T* os = out.data().data();
  int64_t oi = 0;
  for (int64_t nc = 0; nc < n_batch * ch; ++nc) {
    const T* plane = xs + nc * h * w;
    for (int64_t i = 0; i < ho; ++i) {
      for (int64_t j = 0; j < wo; ++j, ++oi) {
        // First maximal element in row-major scan order wins ties.
        int64_t best = (2 * i) * w + (2 * j);
        T best_v = plane[best];
        const int64_t cand[3] = {(2 * i) * w + (2 * j + 1),
                                 (2 * i + 1) * w + (2 * j),
                                 (2 * i + 1) * w + (2 * j + 1)};
        for (int64_t c : cand) {
          if (plane[c] > best_v) {
            best_v = plane[c];
            best = c;
          }
        }
        os[oi] = best_v;
        argmax[static_cast<size_t>(oi)] = nc * h * w + best;
      }
    }
  }

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {x, out}, [x = x, out, argmax = std::move(argmax)]() mutable {
          if (!x.requires_grad()) return;
          const T* dout = out.grad().data();
          T* dx = x.grad().data();
          for (size_t i = 0; i < argmax.size(); ++i)
            dx[argmax[i]] += dout[i];
        });
  }
  return out;
}

template <typename T>
TensorT<T> upsample2(const TensorT<T>& x) {
  require_rank(x, 4, "upsample2", "input");
  const int64_t n_batch = x.dim(0), ch = x.dim(1), h = x.dim(2), w = x.dim(3);
  TensorT<T> out = TensorT<T>::zeros({n_batch, ch, 2 * h, 2 * w});
  const T* xs = x.data().data();
  T* os = out.data().data();
  for (int64_t nc = 0; nc < n_batch * ch; ++nc) {
    const T* plane = xs + nc * h * w;
    T* oplane = os + nc * 4 * h * w;
    for (int64_t i = 0; i < h; ++i) {
      for (int64_t j = 0; j < w; ++j) {
        const T v = plane[i * w + j];
        T* row0 = oplane + (2 * i) * 2 * w + 2 * j;
        T* row1 = row0 + 2 * w;
        row0[0] = row0[1] = row1[0] = row1[1] = v;
      }
    }
  }

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out}, [x = x, out, n_batch, ch, h,
                                           w]() mutable {
      if (!x.requires_grad()) return;
      const T* dout = out.grad().data();
      T* dx = x.grad().data();
      for (int64_t nc = 0; nc < n_batch * ch; ++nc) {
        const T* dplane = dout + nc * 4 * h * w;
        T* dxplane = dx + nc * h * w;
        for (int64_t i = 0; i < h; ++i) {
          for (int64_t j = 0; j < w; ++j) {
            const T* row0 = dplane + (2 * i) * 2 * w + 2 * j;
            const T* row1 = row0 + 2 * w;
            dxplane[i * w + j] += row0[0] + row0[1] + row1[0] + row1[1];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  require_rank(a, 4, "concat_channels", "first input");
  require_rank(b, 4, "concat_channels", "second input");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw DimensionError("concat_channels: inputs " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()) +
                         " differ outside the channel axis");
  const int64_t n_batch = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  const int64_t plane = a.dim(2) * a.dim(3);
  TensorT<T> out =
      TensorT<T>::zeros({n_batch, ca + cb, a.dim(2), a.dim(3)});
  const T* as = a.data().data();
  const T* bs = b.data().data();
  T* os = out.data().data();
  for (int64_t n = 0; n < n_batch; ++n) {
    std::copy(as + n * ca * plane, as + (n + 1) * ca * plane,
              os + n * (ca + cb) * plane);
    std::copy(bs + n * cb * plane, bs + (n + 1) * cb * plane,
              os + n * (ca + cb) * plane + ca * plane);
  }

  const bool rec = recording_for<T>({&a, &b});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {a, b, out}, [a = a, b = b, out, n_batch, ca, cb, plane]() mutable {
          const T* dout = out.grad().data();
          if (a.requires_grad()) {
            T* da = a.grad().data();
            for (int64_t n = 0; n < n_batch; ++n) {
              const T* src = dout + n * (ca + cb) * plane;
              T* dst = da + n * ca * plane;
              for (int64_t i = 0; i < ca * plane; ++i) dst[i] += src[i];
            }
          }
          if (b.requires_grad()) {
            T* db = b.grad().data();
            for (int64_t n = 0; n < n_batch; ++n) {
              const T* src = dout + n * (ca + cb) * plane + ca * plane;
              T* dst = db + n * cb * plane;
              for (int64_t i = 0; i < cb * plane; ++i) dst[i] += src[i];
            }
          }
        });
  }
  return out;
}

template <typename T>
TensorT<T> reshape(const TensorT<T>& x, Shape new_shape) {
  if (shape_numel(new_shape) != x.numel())
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) +
                         " as " + shape_str(new_shape));
  TensorT<T> out = TensorT<T>::from_vector(
      std::move(new_shape),
      std::vector<T>(x.data().begin(), x.data().end()));

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out}, [x = x, out]() mutable {
      if (!x.requires_grad()) return;
      const T* dout = out.grad().data();
      T* dx = x.grad().data();
      const int64_t n = x.numel();
      for (int64_t i = 0; i < n; ++i) dx[i] += dout[i];
    });
  }
  return out;
}

template <typename T>
TensorT<T> attention_pool(const TensorT<T>& x, const TensorT<T>& weights) {
  require_rank(x, 4, "attention_pool", "input");
  require_rank(weights, 4, "attention_pool", "weights");
  if (weights.dim(1) != 1)
    throw DimensionError("attention_pool: weights must be single-channel, "
                         "got " + shape_str(weights.shape()));
  if (weights.dim(0) != x.dim(0) || weights.dim(2) != x.dim(2) ||
      weights.dim(3) != x.dim(3))
    throw DimensionError("attention_pool: weights " +
                         shape_str(weights.shape()) + " do not match input " +
                         shape_str(x.shape()));
  const int64_t n_batch = x.dim(0), ch = x.dim(1);
  const int64_t plane = x.dim(2) * x.dim(3);
  TensorT<T> out = TensorT<T>::zeros({n_batch, ch});
  const T* xs = x.data().data();
  const T* ws = weights.data().data();
  T* os = out.data().data();
  for (int64_t n = 0; n < n_batch; ++n) {
    const T* wrow = ws + n * plane;
    for (int64_t c = 0; c < ch; ++c) {
      const T* xrow = xs + (n * ch + c) * plane;
      T acc = 0;
      for (int64_t i = 0; i < plane; ++i) acc += wrow[i] * xrow[i];
      os[n * ch + c] = acc;
    }
  }

  const bool rec = recording_for<T>({&x, &weights});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {x, weights, out},
        [x = x, weights = weights, out, n_batch, ch, plane]() mutable {
          const T* dout = out.grad().data();
          if (x.requires_grad()) {
            const T* ws = weights.data().data();
            T* dx = x.grad().data();
            for (int64_t n = 0; n < n_batch; ++n) {
              const T* wrow = ws + n * plane;
              for (int64_t c = 0; c < ch; ++c) {
                const T dg = dout[n * ch + c];
                T* dxrow = dx + (n * ch + c) * plane;
                for (int64_t i = 0; i < plane; ++i) dxrow[i] += dg * wrow[i];
              }
            }
          }
          if (weights.requires_grad()) {
            const T* xs = x.data().data();
            T* dw = weights.grad().data();
            for (int64_t n = 0; n < n_batch; ++n) {
              T* dwrow = dw + n * plane;
              for (int64_t c = 0; c < ch; ++c) {
                const T dg = dout[n * ch + c];
                const T* xrow = xs + (n * ch + c) * plane;
                for (int64_t i = 0; i < plane; ++i) dwrow[i] += dg * xrow[i];
              }
            }
          }
        });
  }
  return out;
}

namespace {

template <typename T>
void check_channel_vector(const TensorT<T>& x, const TensorT<T>& v,
                          const char* op) {
  require_rank(x, 4, op, "input");
  require_rank(v, 2, op, "per-channel operand");
  if (v.dim(0) != x.dim(0) || v.dim(1) != x.dim(1))
    throw DimensionError(std::string(op) + ": operand " +
                         shape_str(v.shape()) + " does not match input " +
                         shape_str(x.shape()));
}

}  // namespace

template <typename T>
TensorT<T> scale_channels(const TensorT<T>& x, const TensorT<T>& gain) {
  check_channel_vector(x, gain, "scale_channels");
  const int64_t nc = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  TensorT<T> out = TensorT<T>::zeros(x.shape());
  const T* xs = x.data().data();
  const T* gs = gain.data().data();
  T* os = out.data().data();
  for (int64_t k = 0; k < nc; ++k) {
    const T g = gs[k];
    const T* xrow = xs + k * plane;
    T* orow = os + k * plane;
    for (int64_t i = 0; i < plane; ++i) orow[i] = g * xrow[i];
  }

  const bool rec = recording_for<T>({&x, &gain});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {x, gain, out}, [x = x, gain = gain, out, nc, plane]() mutable {
          const T* dout = out.grad().data();
          if (x.requires_grad()) {
            const T* gs = gain.data().data();
            T* dx = x.grad().data();
            for (int64_t k = 0; k < nc; ++k) {
              const T g = gs[k];
              const T* drow = dout + k * plane;
              T* dxrow = dx + k * plane;
              for (int64_t i = 0; i < plane; ++i) dxrow[i] += g * drow[i];
            }
          }
          if (gain.requires_grad()) {
            const T* xs = x.data().data();
            T* dg = gain.grad().data();
            for (int64_t k = 0; k < nc; ++k) {
              const T* drow = dout + k * plane;
              const T* xrow = xs + k * plane;
              T acc = 0;
              for (int64_t i = 0; i < plane; ++i) acc += drow[i] * xrow[i];
              dg[k] += acc;
            }
          }
        });
  }
  return out;
}

template <typename T>
TensorT<T> add_channels(const TensorT<T>& x, const TensorT<T>& offset) {
  check_channel_vector(x, offset, "add_channels");
  const int64_t nc = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  TensorT<T> out = TensorT<T>::zeros(x.shape());
  const T* xs = x.data().data();
  const T* vs = offset.data().data();
  T* os = out.data().data();
  for (int64_t k = 0; k < nc; ++k) {
    const T v = vs[k];
    const T* xrow = xs + k * plane;
    T* orow = os + k * plane;
    for (int64_t i = 0; i < plane; ++i) orow[i] = xrow[i] + v;
  }

  const bool rec = recording_for<T>({&x, &offset});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record(
        {x, offset, out},
        [x = x, offset = offset, out, nc, plane]() mutable {
          const T* dout = out.grad().data();
          if (x.requires_grad()) {
            T* dx = x.grad().data();
            for (int64_t i = 0; i < nc * plane; ++i) dx[i] += dout[i];
          }
          if (offset.requires_grad()) {
            T* dv = offset.grad().data();
            for (int64_t k = 0; k < nc; ++k) {
              const T* drow = dout + k * plane;
              T acc = 0;
              for (int64_t i = 0; i < plane; ++i) acc += drow[i];
              dv[k] += acc;
            }
          }
        });
  }
  return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.shape() != b.shape())
    throw DimensionError("mul: shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  const int64_t n = a.numel();
  TensorT<T> out = TensorT<T>::zeros(a.shape());
  const T* as = a.data().data();
  const T* bs = b.data().data();
  T* os = out.data().data();
  for (int64_t i = 0; i < n; ++i) os[i] = as[i] * bs[i];

  const bool rec = recording_for<T>({&a, &b});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({a, b, out}, [a = a, b = b, out, n]() mutable {
      const T* dout = out.grad().data();
      if (a.requires_grad()) {
        const T* bs = b.data().data();
        T* da = a.grad().data();
        for (int64_t i = 0; i < n; ++i) da[i] += dout[i] * bs[i];
      }
      if (b.requires_grad()) {
        const T* as = a.data().data();
        T* db = b.grad().data();
        for (int64_t i = 0; i < n; ++i) db[i] += dout[i] * as[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> sum(const TensorT<T>& x) {
  const int64_t n = x.numel();
  const T* xs = x.data().data();
  T acc = 0;
  for (int64_t i = 0; i < n; ++i) acc += xs[i];
  TensorT<T> out = TensorT<T>::from_vector({1}, {acc});

  const bool rec = recording_for<T>({&x});
  out.set_requires_grad(rec);
  if (rec) {
    GraphT<T>::active()->record({x, out}, [x = x, out, n]() mutable {
      if (!x.requires_grad()) return;
      const T d = out.grad()[0];
      T* dx = x.grad().data();
      for (int64_t i = 0; i < n; ++i) dx[i] += d;
    });
  }
  return out;
}

#define PALMSEG_INSTANTIATE_OPS(T)                                        \
  template TensorT<T> conv2d<T>(const TensorT<T>&, const TensorT<T>&,     \
                                const TensorT<T>&, int, int);             \
  template TensorT<T> relu<T>(const TensorT<T>&);                         \
  template TensorT<T> sigmoid<T>(const TensorT<T>&);                      \
  template TensorT<T> softmax_spatial<T>(const TensorT<T>&);              \
  template TensorT<T> maxpool2<T>(const TensorT<T>&);                     \
  template TensorT<T> upsample2<T>(const TensorT<T>&);                    \
  template TensorT<T> concat_channels<T>(const TensorT<T>&,               \
                                         const TensorT<T>&);              \
  template TensorT<T> reshape<T>(const TensorT<T>&, Shape);               \
  template TensorT<T> attention_pool<T>(const TensorT<T>&,                \
                                        const TensorT<T>&);               \
  template TensorT<T> scale_channels<T>(const TensorT<T>&,                \
                                        const TensorT<T>&);               \
  template TensorT<T> add_channels<T>(const TensorT<T>&,                  \
                                      const TensorT<T>&);                 \
  template TensorT<T> mul<T>(const TensorT<T>&, const TensorT<T>&);       \
  template TensorT<T> sum<T>(const TensorT<T>&);

PALMSEG_INSTANTIATE_OPS(float)
PALMSEG_INSTANTIATE_OPS(double)
#undef PALMSEG_INSTANTIATE_OPS

}  // namespace palmseg
