// Copyright 2026 The embdistill Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "embdistill/frontend.hpp"
#include "embdistill/metrics.hpp"
#include "embdistill/probes.hpp"
#include "embdistill/students.hpp"
#include "embdistill/teacher.hpp"

using namespace embdistill;

namespace {

Waveform noise(double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.1f);
  Waveform w;
  w.samples.resize(static_cast<std::size_t>(seconds * w.sample_rate));
  for (auto& s : w.samples) s = g(rng);
  return w;
}

void BM_LogMelPatch(benchmark::State& state) {
  const SpectrogramConfig cfg;
  const Waveform w = noise(2.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(compute_log_mel(w, cfg));
}
BENCHMARK(BM_LogMelPatch)->Unit(benchmark::kMicrosecond);

void BM_FramePatches(benchmark::State& state) {
  const SpectrogramConfig cfg;
  const Waveform w = noise(static_cast<double>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(frame_patches(w, cfg, 1.0));
}
BENCHMARK(BM_FramePatches)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TeacherPatch(benchmark::State& state) {
  const SpectrogramConfig cfg;
  const auto teacher = make_teacher(TeacherSpec{}, cfg);
  const LogMelPatch p = compute_log_mel(noise(2.0, 3), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(teacher->embed_patch(p));
}
BENCHMARK(BM_TeacherPatch)->Unit(benchmark::kMicrosecond);

// One benchmark argument per ladder rung.
void BM_StudentForward(benchmark::State& state) {
  const auto rung = desk_ladder()[static_cast<std::size_t>(state.range(0))];
  const StudentModel m = init_student(rung);
  const LogMelPatch p = compute_log_mel(noise(2.0, 4), SpectrogramConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(student_forward(m, p));
  state.SetLabel(to_string(rung.family) + " params=" + std::to_string(m.parameters.size()));
}
BENCHMARK(BM_StudentForward)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

void BM_StudentBackward(benchmark::State& state) {
  const auto rung = desk_ladder()[static_cast<std::size_t>(state.range(0))];
  const StudentModel m = init_student(rung);
  const LogMelPatch p = compute_log_mel(noise(2.0, 5), SpectrogramConfig{});
  EmbeddingVector g;
  g.values.assign(rung.embedding_dim, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(student_backward(m, p, g));
  state.SetLabel(to_string(rung.family));
}
BENCHMARK(BM_StudentBackward)->DenseRange(0, 4)->Unit(benchmark::kMicrosecond);

void BM_RocAuc(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  ScoredExamples s;
  for (int i = 0; i < state.range(0); ++i) {
    s.labels.push_back(i % 2);
    s.scores.push_back(g(rng) + (i % 2));
  }
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(s));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RocAuc)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

void BM_ProbeFit(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g;
  LabeledEmbeddings train;
  train.dim = 64;
  for (int i = 0; i < 320; ++i) {
    train.labels.push_back(i % 2);
    for (std::size_t d = 0; d < train.dim; ++d) train.rows.push_back(g(rng) + 0.3f * (i % 2));
  }
  const auto variant = kProbeVariants[state.range(0)];
  const ProbeConfig pc = ProbeConfig::defaults(variant);
  for (auto _ : state) benchmark::DoNotOptimize(train_probe(train, 2, pc));
  state.SetLabel(to_string(variant));
}
BENCHMARK(BM_ProbeFit)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
