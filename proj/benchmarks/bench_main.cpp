#include <benchmark/benchmark.h>

#include "palmseg/baseline.hpp"
#include "palmseg/cfm.hpp"
#include "palmseg/ops.hpp"
#include "palmseg/rng.hpp"
#include "palmseg/tensor.hpp"
#include "palmseg/transforms.hpp"
#include "palmseg/unet.hpp"

namespace {

using namespace palmseg;

Tensor rand_tensor(Shape shape, uint64_t seed, bool requires_grad = false) {
  Rng rng(seed);
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (float& v : t.data()) v = float(rng.uniform(-1.0, 1.0));
  return t;
}

GrayImage rand_image(int size, uint64_t seed) {
  Rng rng(seed);
  GrayImage img = GrayImage::filled(size, size, 0);
  for (uint8_t& v : img.pixels) v = uint8_t(rng.next_below(256));
  return img;
}

void BM_Conv2dForward(benchmark::State& state) {
  const int64_t c = state.range(0);
  Tensor x = rand_tensor({1, c, 64, 64}, 1);
  Tensor k = rand_tensor({c, c, 3, 3}, 2);
  Tensor b = rand_tensor({c}, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conv2d(x, k, b, 1, 1));
  }
  state.SetItemsProcessed(state.iterations() * c * c * 9 * 64 * 64);
}
BENCHMARK(BM_Conv2dForward)->Arg(8)->Arg(16)->Arg(32);

void BM_Conv2dBackward(benchmark::State& state) {
  const int64_t c = state.range(0);
  Tensor x = rand_tensor({1, c, 64, 64}, 1, true);
  Tensor k = rand_tensor({c, c, 3, 3}, 2, true);
  Tensor b = rand_tensor({c}, 3, true);
  for (auto _ : state) {
    Graph graph;
    Tensor loss;
    {
      GraphScope scope(graph);
      loss = sum(conv2d(x, k, b, 1, 1));
    }
    graph.backward(loss);
    benchmark::DoNotOptimize(k.grad().data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Arg(8)->Arg(16);

void BM_ContextFusion(benchmark::State& state) {
  const int64_t c = state.range(0);
  CFMWeights weights = make_cfm<float>(c, 4, 5);
  Tensor x = rand_tensor({1, c, 16, 16}, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cfm_forward(x, weights));
  }
}
BENCHMARK(BM_ContextFusion)->Arg(32)->Arg(64)->Arg(128);

void BM_UNetForward(benchmark::State& state) {
  UNetConfig config;
  config.depth = int(state.range(0));
  config.base_channels = 8;
  Model model = build_unet<float>(config, 7);
  Tensor x = rand_tensor({1, 1, 64, 64}, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(unet_forward(model, x));
  }
}
BENCHMARK(BM_UNetForward)->Arg(2)->Arg(3);

void BM_Canny(benchmark::State& state) {
  GrayImage img = rand_image(int(state.range(0)), 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(canny(img, 1.4, 40.0, 100.0));
  }
}
BENCHMARK(BM_Canny)->Arg(128)->Arg(256);

void BM_Clahe(benchmark::State& state) {
  GrayImage img = rand_image(int(state.range(0)), 10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(clahe(img, 2.0, 8, 8));
  }
}
BENCHMARK(BM_Clahe)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
