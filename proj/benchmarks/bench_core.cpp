#include <random>

#include <benchmark/benchmark.h>

#include "ringtower/detector.hpp"
#include "ringtower/optical_flow.hpp"
#include "ringtower/synth.hpp"

using namespace ringtower;

namespace {

SceneScript scene(double sigma) {
  CaseSpec spec;
  spec.noise_sigma = sigma;
  spec.segment_frames = {60, 60, 60, 60};
  const auto r = segment_ranges(spec);
  spec.jitters = {{TowerId::RV, r[0].first + 10, r[0].first + 40, 3, 0, true}};
  return build_script(spec);
}

}  // namespace

static void BM_HornSchunckFull(benchmark::State& state) {
  const SceneScript s = scene(2.0);
  const GrayImage a = to_gray(render_frame(s, 20)), b = to_gray(render_frame(s, 21));
  for (auto _ : state) benchmark::DoNotOptimize(horn_schunck(a, b, 1.0, 10));
}
BENCHMARK(BM_HornSchunckFull)->Unit(benchmark::kMillisecond);

static void BM_HornSchunckRoi(benchmark::State& state) {
  const SceneScript s = scene(2.0);
  const GrayImage a = to_gray(render_frame(s, 20)), b = to_gray(render_frame(s, 21));
  const Rect roi = s.segmentation.segments[0].roi;
  for (auto _ : state) benchmark::DoNotOptimize(horn_schunck_window(a, b, roi, 1.0, 10));
}
BENCHMARK(BM_HornSchunckRoi)->Unit(benchmark::kMicrosecond);

static void BM_TowerMask(benchmark::State& state) {
  const RgbImage frame = render_frame(scene(2.0), 20);
  const DetectorConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(tower_mask(frame, config));
}
BENCHMARK(BM_TowerMask)->Unit(benchmark::kMicrosecond);

static void BM_RenderFrame(benchmark::State& state) {
  const SceneScript s = scene(static_cast<double>(state.range(0)));
  int f = 0;
  for (auto _ : state) benchmark::DoNotOptimize(render_frame(s, f++ % s.frame_count));
}
BENCHMARK(BM_RenderFrame)->Arg(0)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_Cleanup(benchmark::State& state) {
  const InteractionSegment seg{TowerId::RV, 0, static_cast<int>(state.range(0)) - 1, {0, 0, 10, 10}, std::nullopt};
  std::mt19937_64 rng(1);
  std::vector<bool> flags(static_cast<std::size_t>(seg.length()));
  for (auto&& f : flags) f = std::bernoulli_distribution(0.2)(rng);
  const std::vector<CrashInterval> crashes{{seg.length() / 2, seg.length() / 2 + 8}};
  const DetectorConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(cleanup(flags, seg, crashes, config));
}
BENCHMARK(BM_Cleanup)->Arg(200)->Arg(2000);

static void BM_DetectInteraction(benchmark::State& state) {
  const SyntheticCase sc = render(scene(2.0));
  const DetectorConfig config;
  const auto& seg = sc.segmentation.segments[0];
  for (auto _ : state) benchmark::DoNotOptimize(detect_interaction(sc.frames, seg, {}, config));
}
BENCHMARK(BM_DetectInteraction)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
