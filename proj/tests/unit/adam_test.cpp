#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "palmseg/adam.hpp"
#include "palmseg/ops.hpp"

using namespace palmseg;

namespace {

/// Textbook bias-corrected update for one coordinate, step counted from 1.
struct ScalarAdamOracle {
  double m = 0.0, v = 0.0;
  int step = 0;

  double update(double g, const AdamConfig& c) {
    step += 1;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / (1.0 - std::pow(c.beta1, step));
    const double v_hat = v / (1.0 - std::pow(c.beta2, step));
    return c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
};

}  // namespace

TEST_CASE("two hand-checked steps match the oracle exactly") {
  TensorD p = TensorD::from_vector({1}, {1.0});
  p.set_requires_grad(true);
  std::vector<TensorT<double>> params = {p};
  std::vector<std::string> names = {"p"};
  AdamStateT<double> state;
  AdamConfig config;
  config.lr = 0.1;

  ScalarAdamOracle oracle;
  double expected = 1.0;

  p.grad()[0] = 2.0;
  adam_step(params, names, state, config);
  expected -= oracle.update(2.0, config);
  CHECK(p.data()[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(p.data()[0] == doctest::Approx(1.0 - 0.1 * 2.0 / (2.0 + 1e-8))
                           .epsilon(1e-12));

  p.zero_grad();
  p.grad()[0] = -1.0;
  adam_step(params, names, state, config);
  expected -= oracle.update(-1.0, config);
  CHECK(p.data()[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(state.step == 2);
}

TEST_CASE("a long gradient sequence tracks the oracle per coordinate") {
  TensorD p = TensorD::from_vector({2, 2}, {0.5, -0.25, 2.0, 0.0});
  p.set_requires_grad(true);
  std::vector<TensorT<double>> params = {p};
  std::vector<std::string> names = {"p"};
  AdamStateT<double> state;
  AdamConfig config;
  config.lr = 0.01;

  std::vector<ScalarAdamOracle> oracles(4);
  std::vector<double> expected(p.data().begin(), p.data().end());
  for (int step = 1; step <= 25; ++step) {
    p.zero_grad();
    for (int j = 0; j < 4; ++j) {
      const double g = std::sin(0.3 * step + j);
      p.grad()[size_t(j)] = g;
      expected[size_t(j)] -= oracles[size_t(j)].update(g, config);
    }
    adam_step(params, names, state, config);
  }
  for (int j = 0; j < 4; ++j)
    CHECK(p.data()[size_t(j)] ==
          doctest::Approx(expected[size_t(j)]).epsilon(1e-12));
}

TEST_CASE("state is allocated lazily and validated") {
  TensorD a = TensorD::zeros({3});
  TensorD b = TensorD::zeros({2, 2});
  std::vector<TensorT<double>> params = {a, b};
  std::vector<std::string> names = {"a", "b"};
  AdamStateT<double> state;
  CHECK(state.m.empty());

  adam_step(params, names, state, AdamConfig{});
  REQUIRE(state.m.size() == 2);
  REQUIRE(state.v.size() == 2);
  CHECK(state.m[1].shape() == b.shape());
  CHECK(state.step == 1);

  std::vector<std::string> short_names = {"a"};
  CHECK_THROWS_AS(adam_step(params, short_names, state, AdamConfig{}),
                  ArgumentError);

  std::vector<TensorT<double>> swapped = {b, a};
  CHECK_THROWS_AS(adam_step(swapped, names, state, AdamConfig{}),
                  ArgumentError);
}

TEST_CASE("a non-finite gradient is refused by name") {
  TensorD p = TensorD::zeros({2});
  std::vector<TensorT<double>> params = {p};
  std::vector<std::string> names = {"enc0.conv1.weight"};
  AdamStateT<double> state;
  p.grad()[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(params, names, state, AdamConfig{}),
                       doctest::Contains("enc0.conv1.weight"), NumericError);
}

TEST_CASE("adam walks a quadratic bowl to its minimum") {
  Tensor x = Tensor::from_vector({2}, {3.0f, -2.0f}, true);
  std::vector<Tensor> params = {x};
  std::vector<std::string> names = {"x"};
  AdamState state;
  AdamConfig config;
  config.lr = 0.1;

  for (int step = 0; step < 500; ++step) {
    Graph graph;
    Tensor loss;
    {
      GraphScope scope(graph);
      loss = sum(mul(x, x));
    }
    graph.backward(loss);
    adam_step(params, names, state, config);
  }
  CHECK(std::abs(x.data()[0]) < 1e-2);
  CHECK(std::abs(x.data()[1]) < 1e-2);
}
