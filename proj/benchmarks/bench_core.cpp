#include "fouriermix/augmix.hpp"
#include "fouriermix/fourier_basis.hpp"
#include "fouriermix/heatmap.hpp"
#include "fouriermix/metrics.hpp"
#include "fouriermix/perturb.hpp"
#include "fouriermix/toy_model.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace fouriermix;

namespace {

Image noise_image(int side, std::uint64_t seed) {
  Rng rng(seed);
  Image img(side, side, 3);
  for (double& v : img.data)
    v = uniform_real(rng, 0.0, 1.0);
  return img;
}

LabeledDataset noise_dataset(std::size_t n, int side) {
  LabeledDataset ds;
  ds.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) {
    ds.images.push_back(noise_image(side, i));
    ds.labels.push_back(static_cast<int>(i % 2));
  }
  return ds;
}

} // namespace

static void BM_PlaneWave(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BasisSpec spec{{side, side}, {3, 5}, kEvalPhase, 2.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(plane_wave(spec));
}
BENCHMARK(BM_PlaneWave)->Arg(8)->Arg(32);

static void BM_EnumerateCatalog(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(enumerate_catalog({side, side}));
}
BENCHMARK(BM_EnumerateCatalog)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_AugMix(benchmark::State& state) {
  const AugmentConfig cfg = augment_config_for(state.range(0) ? "svf" : "sv");
  const Image img = noise_image(32, 1);
  Rng rng(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(augmix(img, cfg, rng));
}
BENCHMARK(BM_AugMix)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

static void BM_PerturbDataset(benchmark::State& state) {
  const LabeledDataset ds = noise_dataset(256, 32);
  const BasisMatrix basis = plane_wave({{32, 32}, {4, 7}, kEvalPhase, 2.0});
  for (auto _ : state)
    benchmark::DoNotOptimize(perturb_dataset(ds, basis, PerturbOptions{ChannelMode::RandomFlip, 3, false}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_PerturbDataset)->Unit(benchmark::kMillisecond);

static void BM_ToyForward(benchmark::State& state) {
  const ToyNet net = ToyNet::random(3072, 128, 10, 4);
  const LabeledDataset ds = noise_dataset(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state)
    benchmark::DoNotOptimize(predict(net, ds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ToyForward)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_RmsCalibration(benchmark::State& state) {
  Rng rng(5);
  PredictionSet p;
  for (int i = 0; i < state.range(0); ++i) {
    const double c = uniform_real(rng, 0.5, 1.0);
    p.probs.push_back({c, 1.0 - c});
    p.labels.push_back(static_cast<int>(uniform_index(rng, 2)));
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(rms_calibration_error(p, 15));
}
BENCHMARK(BM_RmsCalibration)->Arg(10000);
BENCHMARK_MAIN();
