#include "palmseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "palmseg/cfm.hpp"
#include "palmseg/ops.hpp"
#include "palmseg/rng.hpp"
#include "palmseg/unet.hpp"

namespace palmseg {

double grad_check(const std::function<double()>& eval, TensorT<double>& x,
                  double h) {
  if (h <= 0) throw ArgumentError("grad check: step must be positive");
  if (!x.has_grad())
    throw ArgumentError("grad check: tensor has no populated gradient");
  std::span<double> data = x.data();
  std::span<double> grad = x.grad();
  double worst = 0.0;
  for (size_t i = 0; i < data.size(); ++i) {
    const double orig = data[i];
    data[i] = orig + h;
    const double f_plus = eval();
    data[i] = orig - h;
    const double f_minus = eval();
    data[i] = orig;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
      throw NumericError("grad check: objective is non-finite near x");
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double analytic = grad[i];
    // The floor turns the ratio into an absolute comparison for near-zero
    // gradients, where the central difference is dominated by rounding noise.
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

namespace {

using TD = TensorT<double>;

TD rand_tensor(Shape shape, Rng& rng, bool requires_grad) {
  std::vector<double> values(static_cast<size_t>(shape_numel(shape)));
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  return TD::from_vector(std::move(shape), std::move(values), requires_grad);
}

// Values bounded away from zero, for ops with a kink there.
TD rand_tensor_off_zero(Shape shape, Rng& rng, bool requires_grad) {
  std::vector<double> values(static_cast<size_t>(shape_numel(shape)));
  for (double& v : values) {
    const double mag = rng.uniform(0.1, 1.0);
    v = rng.next_u64() & 1 ? mag : -mag;
  }
  return TD::from_vector(std::move(shape), std::move(values), requires_grad);
}

// A shuffled, centered ramp: all values distinct, so max selections cannot
// flip under the finite-difference step.
TD distinct_tensor(Shape shape, Rng& rng, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  std::vector<double> values(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    values[size_t(i)] = double(i) / double(n) - 0.5;
  for (int64_t i = n - 1; i > 0; --i)
    std::swap(values[size_t(i)], values[size_t(rng.next_below(i + 1))]);
  return TD::from_vector(std::move(shape), std::move(values), requires_grad);
}

class Suite {
public:
  explicit Suite(uint64_t seed) : rng_(hash_combine(seed, "gradcheck")) {}

  Rng& rng() { return rng_; }

  // Runs `forward` once under a recording graph, backpropagates, then
  // finite-difference checks each listed tensor against the same forward.
  double measure(const std::function<TD()>& forward, std::vector<TD> tensors,
                 double h) {
    GraphT<double> graph;
    {
      GraphScopeT<double> scope(graph);
      TD loss = forward();
      graph.backward(loss);
    }
    const auto eval = [&forward]() { return forward().item(); };
    double worst = 0.0;
    for (TD& t : tensors) worst = std::max(worst, grad_check(eval, t, h));
    return worst;
  }

  void record(const std::string& name, double worst,
              double tolerance = 1e-4) {
    items_.push_back(GradCheckItem{name, worst, tolerance});
  }

  void check(const std::string& name, const std::function<TD()>& forward,
             std::vector<TD> tensors, double h = 1e-4,
             double tolerance = 1e-4) {
    record(name, measure(forward, std::move(tensors), h), tolerance);
  }

  std::vector<GradCheckItem> take() { return std::move(items_); }

private:
  Rng rng_;
  std::vector<GradCheckItem> items_;
};

// Fixed random projection making the objective sensitive to every output.
TD project(const TD& out, Rng& rng) {
  Rng local(rng.next_u64());
  std::vector<double> values(static_cast<size_t>(out.numel()));
  for (double& v : values) v = local.uniform(-1.0, 1.0);
  TD c = TD::from_vector(out.shape(), std::move(values), false);
  return sum(mul(out, c));
}

}  // namespace

std::vector<GradCheckItem> gradcheck_suite(uint64_t seed) {
  Suite suite(seed);
  Rng& rng = suite.rng();

  {
    TD x = rand_tensor({2, 3, 5, 4}, rng, true);
    TD k = rand_tensor({2, 3, 3, 3}, rng, true);
    TD b = rand_tensor({2}, rng, true);
    TD c = rand_tensor({2, 2, 3, 2}, rng, false);
    suite.check(
        "conv2d(stride 2, pad 1)",
        [&]() { return sum(mul(conv2d(x, k, b, 2, 1), c)); }, {x, k, b});
  }
  {
    TD x = rand_tensor({1, 2, 4, 4}, rng, true);
    TD k = rand_tensor({3, 2, 1, 1}, rng, true);
    TD b = rand_tensor({3}, rng, true);
    TD c = rand_tensor({1, 3, 4, 4}, rng, false);
    suite.check(
        "conv2d(1x1)", [&]() { return sum(mul(conv2d(x, k, b, 1, 0), c)); },
        {x, k, b});
  }
  {
    TD x = rand_tensor_off_zero({2, 3, 4}, rng, true);
    TD c = rand_tensor({2, 3, 4}, rng, false);
    suite.check("relu", [&]() { return sum(mul(relu(x), c)); }, {x});
  }
  {
    TD x = rand_tensor({3, 7}, rng, true);
    TD c = rand_tensor({3, 7}, rng, false);
    suite.check("sigmoid", [&]() { return sum(mul(sigmoid(x), c)); }, {x});
  }
  {
    TD x = rand_tensor({2, 1, 3, 3}, rng, true);
    TD c = rand_tensor({2, 1, 3, 3}, rng, false);
    suite.check("softmax_spatial",
                [&]() { return sum(mul(softmax_spatial(x), c)); }, {x});
  }
  {
    TD x = distinct_tensor({1, 2, 4, 4}, rng, true);
    TD c = rand_tensor({1, 2, 2, 2}, rng, false);
    suite.check("maxpool2", [&]() { return sum(mul(maxpool2(x), c)); }, {x});
  }
  {
    TD x = rand_tensor({1, 2, 3, 2}, rng, true);
    TD c = rand_tensor({1, 2, 6, 4}, rng, false);
    suite.check("upsample2", [&]() { return sum(mul(upsample2(x), c)); },
                {x});
  }
  {
    TD a = rand_tensor({2, 2, 3, 3}, rng, true);
    TD b = rand_tensor({2, 3, 3, 3}, rng, true);
    TD c = rand_tensor({2, 5, 3, 3}, rng, false);
    suite.check(
        "concat_channels",
        [&]() { return sum(mul(concat_channels(a, b), c)); }, {a, b});
  }
  {
    TD x = rand_tensor({2, 6}, rng, true);
    TD c = rand_tensor({2, 6, 1, 1}, rng, false);
    suite.check(
        "reshape",
        [&]() { return sum(mul(reshape(x, {2, 6, 1, 1}), c)); }, {x});
  }
  {
    TD x = rand_tensor({2, 3, 3, 3}, rng, true);
    TD w = rand_tensor({2, 1, 3, 3}, rng, true);
    TD c = rand_tensor({2, 3}, rng, false);
    suite.check(
        "attention_pool",
        [&]() { return sum(mul(attention_pool(x, w), c)); }, {x, w});
  }
  {
    TD x = rand_tensor({2, 3, 2, 2}, rng, true);
    TD g = rand_tensor({2, 3}, rng, true);
    TD c = rand_tensor({2, 3, 2, 2}, rng, false);
    suite.check(
        "scale_channels",
        [&]() { return sum(mul(scale_channels(x, g), c)); }, {x, g});
  }
  {
    TD x = rand_tensor({2, 3, 2, 2}, rng, true);
    TD o = rand_tensor({2, 3}, rng, true);
    TD c = rand_tensor({2, 3, 2, 2}, rng, false);
    suite.check(
        "add_channels", [&]() { return sum(mul(add_channels(x, o), c)); },
        {x, o});
  }
  {
    TD a = rand_tensor({3, 4}, rng, true);
    TD b = rand_tensor({3, 4}, rng, true);
    TD c = rand_tensor({3, 4}, rng, false);
    suite.check("mul", [&]() { return sum(mul(mul(a, b), c)); }, {a, b});
  }
  {
    TD x = rand_tensor({2, 5}, rng, true);
    suite.check("sum", [&]() { return sum(mul(x, x)); }, {x});
  }
  // The composite graphs route every probe through stacked relu and pooling
  // stages, so an unlucky draw can land an activation within the step of a
  // kink, where a two-sided difference measures nothing. Fresh draws move
  // the evaluation to a smooth point; a genuine gradient defect fails every
  // attempt.
  constexpr int kCompositeAttempts = 6;
  constexpr double kCompositeStep = 1e-5;

  {
    double worst = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kCompositeAttempts; ++attempt) {
      TD x = rand_tensor({1, 8, 4, 4}, rng, true);
      CFMWeightsT<double> w =
          make_cfm<double>(8, 4, rng.next_u64(), "gradcheck.cfm.");
      TD c = rand_tensor({1, 8, 4, 4}, rng, false);
      std::vector<TD> tensors{x,
                              w.ctx_proj_w,
                              w.ctx_proj_b,
                              w.left_a_w,
                              w.left_a_b,
                              w.left_b_w,
                              w.left_b_b,
                              w.right_a_w,
                              w.right_a_b,
                              w.right_b_w,
                              w.right_b_b};
      worst = std::min(
          worst,
          suite.measure([&]() { return sum(mul(cfm_forward(x, w), c)); },
                        tensors, kCompositeStep));
      if (worst < 1e-4) break;
    }
    suite.record("cfm block (1x8x4x4)", worst);
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kCompositeAttempts; ++attempt) {
      UNetConfig config;
      config.depth = 2;
      config.base_channels = 4;
      config.cfm_reduction = 4;
      ModelT<double> model = build_unet<double>(config, rng.next_u64());
      TD x = rand_tensor({1, 1, 16, 16}, rng, true);
      TD c = rand_tensor({1, 1, 16, 16}, rng, false);
      std::vector<TD> tensors = model.params;
      tensors.push_back(x);
      worst = std::min(
          worst,
          suite.measure([&]() { return sum(mul(unet_forward(model, x), c)); },
                        tensors, kCompositeStep));
      if (worst < 1e-4) break;
    }
    suite.record("unet end to end (depth 2, base 4, 16x16)", worst);
  }

  return suite.take();
}

}  // namespace palmseg
