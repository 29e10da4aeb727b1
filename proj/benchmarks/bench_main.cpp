#include <benchmark/benchmark.h>

#include <vector>

#include "scenezsl/dataset/shapes.hpp"
#include "scenezsl/loss/contrastive.hpp"
#include "scenezsl/nn/model.hpp"
#include "scenezsl/rng.hpp"
#include "scenezsl/scenegen/scene.hpp"

namespace {

using namespace scenezsl;

dataset::PointCloud uniform_cloud(std::size_t n, std::uint64_t seed) {
  Philox rng(seed);
  dataset::PointCloud cloud;
  cloud.points.resize(n);
  for (auto& p : cloud.points) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return cloud;
}

void BM_EncoderForward(benchmark::State& state) {
  const auto params = nn::ModelParams::kaiming(nn::ModelConfig{}, 1);
  const auto cloud = uniform_cloud(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(nn::encoder_forward(params, cloud));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncoderForward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ContrastiveLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 512;
  Philox rng(3);
  std::vector<double> z(n * dim), v(n * dim);
  for (double& x : z) x = rng.normal();
  for (double& x : v) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(loss::contrastive_loss(z, v, n, dim, 0.1));
}
BENCHMARK(BM_ContrastiveLoss)->Arg(16)->Arg(64)->Arg(100);

void BM_SurfaceSampling(benchmark::State& state) {
  const auto mesh = dataset::shapes::torus(1.0, 0.3, 32, 48);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(dataset::sample_points(mesh, 1024, ++seed));
}
BENCHMARK(BM_SurfaceSampling);

void BM_GenerateBatch(benchmark::State& state) {
  scenegen::ObjectBank bank;
  for (std::uint64_t c = 0; c < 4; ++c) bank.add("class" + std::to_string(c), uniform_cloud(1024, c));
  const scenegen::SceneParams params;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(scenegen::generate_batch(bank, params, 64, ++seed));
}
BENCHMARK(BM_GenerateBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
