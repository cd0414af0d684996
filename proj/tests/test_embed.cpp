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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "embdistill/cache.hpp"
#include "embdistill/embed.hpp"
#include "embdistill/synth.hpp"
#include "helpers.hpp"

namespace embdistill {
namespace {

using testing_helpers::error_kind_of;
using testing_helpers::noise_clip;
using testing_helpers::TempDir;

StudentModel small_student() {
  StudentConfig c;
  c.width = 8;
  c.embedding_dim = 16;
  c.input_mean = -6.0;
  c.input_std = 3.0;
  return init_student(c);
}

Waveform slice(const Waveform& w, std::size_t from, std::size_t n) {
  Waveform s;
  s.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(from),
                   w.samples.begin() + static_cast<std::ptrdiff_t>(from + n));
  return s;
}

TEST(StudentEmbedClip, TwoSecondClipEqualsSinglePatch) {
  SpectrogramConfig cfg;
  const StudentModel m = small_student();
  const Waveform w = noise_clip(32000, 1);
  EXPECT_EQ(student_embed_clip(m, w, cfg, 2.0), student_forward(m, compute_log_mel(w, cfg)));
}

TEST(StudentEmbedClip, FourSecondClipIsMeanOfTwoPatches) {
  SpectrogramConfig cfg;
  const StudentModel m = small_student();
  const Waveform w = noise_clip(64000, 2);
  const EmbeddingVector a = student_forward(m, compute_log_mel(slice(w, 0, 32000), cfg));
  const EmbeddingVector b = student_forward(m, compute_log_mel(slice(w, 32000, 32000), cfg));
  const EmbeddingVector e = student_embed_clip(m, w, cfg, 2.0);
  ASSERT_EQ(e.size(), 16u);
  for (std::size_t d = 0; d < 16; ++d) EXPECT_NEAR(e[d], 0.5 * (a[d] + b[d]), 1e-6);
}

TEST(StudentEmbedClip, PropertyWithinPatchRange) {
  SpectrogramConfig cfg;
  const StudentModel m = small_student();
  for (int i = 0; i < 6; ++i) {
    const Waveform w = noise_clip(33000 + 7919 * i, 10 + i, 0.02f * (1 + i));
    const double adv = 0.25 * (1 + i % 4);
    const EmbeddingVector e = student_embed_clip(m, w, cfg, adv);
    std::vector<float> lo(16, 1e30f), hi(16, -1e30f);
    for (const auto& p : frame_patches(w, cfg, adv)) {
      const EmbeddingVector y = student_forward(m, p);
      for (std::size_t d = 0; d < 16; ++d) {
        lo[d] = std::min(lo[d], y[d]);
        hi[d] = std::max(hi[d], y[d]);
      }
    }
    for (std::size_t d = 0; d < 16; ++d) {
      ASSERT_GE(e[d], lo[d] - 1e-5f);
      ASSERT_LE(e[d], hi[d] + 1e-5f);
    }
  }
}

TEST(FramePlan, HalvingTheAdvanceRefinesTheOffsets) {
  SpectrogramConfig cfg;
  for (std::size_t k = 0; k < 6; ++k) {
    for (double adv : {0.5, 1.0, 2.0}) {
      const std::size_t padded = 32000 + k * static_cast<std::size_t>(adv * 16000);
      const auto coarse = plan_frames(padded, cfg, adv).patch_offsets;
      const auto fine = plan_frames(padded, cfg, adv / 2).patch_offsets;
      EXPECT_EQ(coarse.size(), k + 1);
      for (std::size_t off : coarse) {
        EXPECT_TRUE(std::find(fine.begin(), fine.end(), off) != fine.end());
      }
    }
  }
}

TEST(Embedders, StudentAndTeacherAgreeWithFreeFunctions) {
  SpectrogramConfig cfg;
  const StudentModel m = small_student();
  const StudentEmbedder se("s", m, cfg);
  const Waveform w = noise_clip(50000, 3);
  EXPECT_EQ(se.embed(w, "c", 1.0), student_embed_clip(m, w, cfg, 1.0));
  EXPECT_EQ(se.param_count(), m.parameters.size());
  TeacherSpec spec;
  const TeacherEmbedder te("t", spec, cfg);
  EXPECT_EQ(te.embed(w, "c", 1.0), teacher_embed_clip(w, spec, cfg, 1.0));
  EXPECT_EQ(te.param_count(), 0u);
  EXPECT_EQ(te.embedding_dim(), 64u);
}

TEST(Embedders, FingerprintTracksEveryInput) {
  SpectrogramConfig cfg;
  StudentModel m = small_student();
  const std::string base = StudentEmbedder("s", m, cfg).fingerprint(1.0);
  EXPECT_EQ(StudentEmbedder("s", m, cfg).fingerprint(1.0), base);
  EXPECT_NE(StudentEmbedder("s", m, cfg).fingerprint(2.0), base);
  m.parameters[0] += 1.0f;
  EXPECT_NE(StudentEmbedder("s", m, cfg).fingerprint(1.0), base);
  SpectrogramConfig other = cfg;
  other.fmin_hz = 60.0;
  EXPECT_NE(StudentEmbedder("s", small_student(), other).fingerprint(1.0), base);
  TeacherSpec a, b;
  b.seed = 1;
  EXPECT_NE(TeacherEmbedder("t", a, cfg).fingerprint(1.0),
            TeacherEmbedder("t", b, cfg).fingerprint(1.0));
}

// Binary loudness task built from noise clips of random length.
TaskData loudness_task(std::size_t per_split, std::uint64_t seed) {
  TaskData t;
  t.task = {"loud", SelectionMetric::kAccuracy, 2};
  t.classes = {"quiet", "loud"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(24000, 56000);
  std::size_t id = 0;
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    for (std::size_t i = 0; i < per_split; ++i, ++id) {
      const int label = static_cast<int>(i % 2);
      const float sd = (label ? 0.08f : 0.04f) * std::exp(0.35f * std::normal_distribution<float>()(rng));
      t.clips.push_back({"c" + std::to_string(id), noise_clip(len(rng), seed * 1000 + id, sd),
                         label, s, ""});
    }
  }
  return t;
}

TEST(EmbedTask, CacheHitsReproduceRowsAndSkipTestWhenAsked) {
  TempDir dir("embed-cache");
  EmbeddingCache cache(dir.path());
  SpectrogramConfig cfg;
  const StudentEmbedder se("s", small_student(), cfg);
  const TaskData task = loudness_task(6, 4);
  const SplitEmbeddings cold = embed_task(se, task, 1.0, &cache);
  EXPECT_EQ(cache.hits(), 0u);
  EXPECT_EQ(cache.misses(), 3u);
  const SplitEmbeddings warm = embed_task(se, task, 1.0, &cache);
  EXPECT_EQ(cache.hits(), 3u);
  EXPECT_EQ(warm.train.rows, cold.train.rows);
  EXPECT_EQ(warm.test.rows, cold.test.rows);
  EXPECT_EQ(warm.dev.labels, cold.dev.labels);
  const SplitEmbeddings uncached = embed_task(se, task, 1.0);
  EXPECT_EQ(uncached.dev.rows, cold.dev.rows);
  const SplitEmbeddings no_test = embed_task(se, task, 1.0, nullptr, false);
  EXPECT_EQ(no_test.test.size(), 0u);
  EXPECT_EQ(no_test.train.rows, cold.train.rows);
}

TEST(Sweep, SingleAdvanceOnTwoSecondClipsMatchesThePlainPipeline) {
  SpectrogramConfig cfg;
  const TeacherEmbedder te("t", TeacherSpec{}, cfg);
  TaskData task = loudness_task(10, 5);
  for (auto& c : task.clips) c.waveform.samples.resize(32000, 0.01f);
  const auto rows = sweep_frame_advance(te, task, {2.0});
  ASSERT_EQ(rows.size(), 1u);
  const SplitEmbeddings emb = embed_task(te, task, 2.0);
  const TaskEvaluation ev = evaluate_task(emb.train, emb.dev, emb.test, task.task);
  EXPECT_EQ(rows[0].dev_metric, ev.best.dev_score);
  EXPECT_EQ(rows[0].probe, ev.best.variant);
}

TEST(Sweep, DuplicatesAndRerunsAreBitIdentical) {
  SpectrogramConfig cfg;
  const StudentEmbedder se("s", small_student(), cfg);
  const TaskData task = loudness_task(8, 6);
  const auto a = sweep_frame_advance(se, task, {1.0, 1.0});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].dev_metric, a[1].dev_metric);
  const auto b = sweep_frame_advance(se, task, {0.5, 1.0, 2.0});
  const auto c = sweep_frame_advance(se, task, {0.5, 1.0, 2.0});
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(b[i].dev_metric, c[i].dev_metric);
    EXPECT_EQ(b[i].probe, c[i].probe);
  }
  EXPECT_EQ(sweep_to_csv(b), sweep_to_csv(c));
  EXPECT_EQ(sweep_to_csv(b).substr(0, 30), "advance,dev_metric,probe_type\n");
}

TEST(Sweep, NeverReadsTheTestSplit) {
  SpectrogramConfig cfg;
  const TeacherEmbedder te("t", TeacherSpec{}, cfg);
  TaskData task = loudness_task(8, 7);
  const auto before = sweep_frame_advance(te, task, {1.0});
  // Test clips that cannot be embedded would throw if they were touched.
  for (auto& c : task.clips) {
    if (c.split == Split::kTest) c.waveform.sample_rate = 8000;
  }
  const auto after = sweep_frame_advance(te, task, {1.0});
  EXPECT_EQ(before[0].dev_metric, after[0].dev_metric);
  EXPECT_EQ(error_kind_of([&] { sweep_frame_advance(te, task, {}); }), ErrorKind::kConfig);
  EXPECT_EQ(error_kind_of([&] { sweep_frame_advance(te, task, {0.0}); }), ErrorKind::kConfig);
}

TEST(EvaluateTask, TeacherSignTaskIsSeparableWithTeacherEmbeddings) {
  SynthConfig sc;
  sc.seed = 3;
  SynthTaskSpec spec;
  spec.name = "sign";
  spec.kind = SynthTaskKind::kTeacherSign;
  spec.train = 120;
  spec.dev = 40;
  spec.test = 80;
  const TaskData task = make_synth_task(sc, spec);
  const TeacherEmbedder te("t", sc.teacher, sc.frontend);
  const SplitEmbeddings emb = embed_task(te, task, 2.0);
  const TaskEvaluation ev = evaluate_task(emb.train, emb.dev, emb.test, task.task);
  EXPECT_GE(ev.best.test.accuracy, 0.95);
}

}  // namespace
}  // namespace embdistill
