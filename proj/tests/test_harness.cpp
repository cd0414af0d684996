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

#include <filesystem>
#include <fstream>

#include "embdistill/cache.hpp"
#include "embdistill/dataset.hpp"
#include "embdistill/io.hpp"
#include "embdistill/pipeline.hpp"
#include "embdistill/synth.hpp"
#include "helpers.hpp"

namespace embdistill {
namespace {

namespace fs = std::filesystem;
using testing_helpers::error_kind_of;
using testing_helpers::noise_clip;
using testing_helpers::TempDir;

TEST(Wav, RoundTripIsExactAfterQuantization) {
  TempDir dir("wav");
  Waveform w = noise_clip(12345, 1, 0.3f);
  quantize_pcm16(w);
  write_wav(dir.path() / "a.wav", w);
  const WavInfo info = read_wav_info(dir.path() / "a.wav");
  EXPECT_EQ(info.sample_rate, 16000);
  EXPECT_EQ(info.channels, 1);
  EXPECT_EQ(info.bits_per_sample, 16);
  EXPECT_EQ(info.num_samples, 12345u);
  EXPECT_EQ(read_wav(dir.path() / "a.wav", 16000).samples, w.samples);
}

TEST(Wav, Errors) {
  TempDir dir("wav-err");
  EXPECT_EQ(error_kind_of([&] { read_wav(dir.path() / "missing.wav"); }), ErrorKind::kIo);
  write_text(dir.path() / "junk.wav", "not a riff file at all");
  EXPECT_EQ(error_kind_of([&] { read_wav(dir.path() / "junk.wav"); }), ErrorKind::kIo);
  Waveform w = noise_clip(100, 2);
  w.sample_rate = 8000;
  write_wav(dir.path() / "slow.wav", w);
  EXPECT_EQ(error_kind_of([&] { read_wav(dir.path() / "slow.wav", 16000); }), ErrorKind::kConfig);
}

TEST(Hashing, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Tensor, RoundTrip) {
  TempDir dir("tensor");
  const std::vector<float> v = {1.5f, -2.25f, 3e-8f, 7.0f};
  write_tensor(dir.path() / "sub" / "t.f32", v);
  EXPECT_EQ(read_tensor(dir.path() / "sub" / "t.f32"), v);
  EXPECT_EQ(fs::file_size(dir.path() / "sub" / "t.f32"), 16u);
}

struct ManifestFixture : ::testing::Test {
  TempDir dir{"manifest"};
  void SetUp() override {
    for (const char* n : {"a", "b", "c"}) write_wav(dir.path() / (std::string(n) + ".wav"), noise_clip(16000, 3));
  }
  std::string header() const {
    return R"({"task":{"name":"toy","metric":"accuracy","num_classes":2,"classes":["no","yes"]}})"
           "\n";
  }
};

TEST_F(ManifestFixture, AcceptsThreeRowsCoveringAllSplits) {
  const std::string text = header() +
                           R"({"clip_path":"a.wav","label":"no","split":"train"})" "\n"
                           R"({"clip_path":"b.wav","label":1,"split":"dev"})" "\n"
                           R"({"clip_path":"c.wav","label":"yes","split":"test","source_tag":"x"})" "\n";
  write_text(dir.path() / "m.jsonl", text);
  const DatasetManifest m = ingest_manifest(dir.path() / "m.jsonl");
  ASSERT_EQ(m.rows.size(), 3u);
  EXPECT_EQ(m.rows[0].clip_id, "a");
  EXPECT_EQ(m.rows[1].label, 1);
  EXPECT_EQ(m.rows[2].source_tag, "x");
  EXPECT_EQ(m.task->name, "toy");
  // Serialization round-trips.
  const DatasetManifest again = parse_manifest(manifest_to_jsonl(m), dir.path());
  EXPECT_EQ(manifest_to_jsonl(again), manifest_to_jsonl(m));
  const TaskData t = load_task(m, {Split::kTrain, Split::kDev}, 16000);
  EXPECT_EQ(t.split(Split::kTrain).size(), 1u);
  EXPECT_EQ(t.split(Split::kTest).size(), 0u);
}

TEST_F(ManifestFixture, RejectsBadRows) {
  auto kind = [&](const std::string& rows) {
    return error_kind_of([&] { parse_manifest(header() + rows, dir.path()); });
  };
  const std::string ok_dev = R"({"clip_path":"b.wav","label":"no","split":"dev"})" "\n";
  const std::string ok_test = R"({"clip_path":"c.wav","label":"no","split":"test"})" "\n";
  try {
    parse_manifest(header() + R"({"clip_path":"a.wav","label":"no","split":"validation"})" "\n",
                   dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kManifest);
    EXPECT_NE(std::string(e.what()).find("split"), std::string::npos);
  }
  try {
    parse_manifest(header() + R"({"clip_path":"a.wav","label":"no","split":"train"})" "\n" +
                       R"({"clip_id":"a","clip_path":"b.wav","label":"no","split":"dev"})" "\n" +
                       ok_test,
                   dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
  EXPECT_EQ(kind(R"({"clip_path":"a.wav","label":"maybe","split":"train"})" "\n" + ok_dev + ok_test),
            ErrorKind::kManifest);
  EXPECT_EQ(kind(R"({"clip_path":"zzz.wav","label":"no","split":"train"})" "\n" + ok_dev + ok_test),
            ErrorKind::kManifest);
  EXPECT_EQ(kind(R"({"clip_path":"a.wav","label":"no","split":"train"})" "\n" + ok_dev),
            ErrorKind::kManifest);
  EXPECT_EQ(kind("{not json\n"), ErrorKind::kManifest);
}

TEST_F(ManifestFixture, CorpusManifestsNeedNoLabels) {
  const DatasetManifest m = parse_manifest(
      R"({"corpus":"c"})" "\n" R"({"clip_path":"a.wav","source_tag":"s"})" "\n", dir.path());
  EXPECT_FALSE(m.task.has_value());
  EXPECT_EQ(m.corpus, "c");
  const auto clips = load_clips(m, 16000);
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_EQ(clips[0].waveform.samples.size(), 16000u);
}

TEST(Cache, LookupStoreAndFingerprintInvalidation) {
  TempDir dir("cache");
  EmbeddingCache cache(dir.path());
  CachedBlock block{2, {"x", "y"}, {1, 2, 3, 4}};
  EXPECT_FALSE(cache.lookup("m", "t.train", "fp1", block.clip_ids));
  cache.store("m", "t.train", "fp1", block);
  const auto hit = cache.lookup("m", "t.train", "fp1", block.clip_ids);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->rows, block.rows);
  EXPECT_FALSE(cache.lookup("m", "t.train", "fp2", block.clip_ids));
  EXPECT_FALSE(cache.lookup("m", "t.train", "fp1", {"y", "x"}));
  EXPECT_FALSE(cache.lookup("other", "t.train", "fp1", block.clip_ids));
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 4u);
}

TEST(Checkpoint, RoundTripAndIntegrity) {
  TempDir dir("ckpt");
  StudentConfig sc;
  sc.family = StudentFamily::kConvScaledLike;
  sc.width = 4;
  sc.input_mean = -5.5;
  Checkpoint ck{"m1", init_student(sc), SpectrogramConfig{}, {{"note", "x"}}};
  save_checkpoint(dir.path() / "m1", ck);
  const Checkpoint back = load_checkpoint(dir.path() / "m1.json");
  EXPECT_EQ(back.model_id, "m1");
  EXPECT_EQ(back.model.config, sc);
  EXPECT_EQ(back.model.parameters, ck.model.parameters);
  EXPECT_EQ(back.provenance["note"], "x");
  EXPECT_EQ(checkpoint_digest(back.model), checkpoint_digest(ck.model));

  EXPECT_EQ(error_kind_of([&] { load_checkpoint(dir.path() / "nope.json"); }),
            ErrorKind::kMissingModel);
  std::vector<float> params = read_tensor(dir.path() / "m1.bin");
  params[0] += 1.0f;
  write_tensor(dir.path() / "m1.bin", params);
  EXPECT_EQ(error_kind_of([&] { load_checkpoint(dir.path() / "m1.json"); }), ErrorKind::kIo);
  params.pop_back();
  write_tensor(dir.path() / "m1.bin", params);
  EXPECT_EQ(error_kind_of([&] { load_checkpoint(dir.path() / "m1.json"); }),
            ErrorKind::kShapeMismatch);
}

TEST(ConfigJson, RoundTrips) {
  SpectrogramConfig f;
  f.fmin_hz = 60.0;
  EXPECT_EQ(to_json(spectrogram_config_from_json(to_json(f))), to_json(f));
  TeacherSpec t;
  t.kind = TeacherKind::kSyntheticMlp;
  t.embedding_dim = 32;
  EXPECT_EQ(to_json(teacher_spec_from_json(to_json(t))), to_json(t));
  StudentConfig s;
  s.family = StudentFamily::kAttentionLike;
  EXPECT_EQ(student_config_from_json(to_json(s)), s);
}

TEST(RunConfigJson, ParsesValidatesAndHashes) {
  TempDir dir("runcfg");
  const std::string text = R"({"root_seed": 7, "mode": "global",
    "teacher": {"embedding_dim": 16}, "student": {"embedding_dim": 16, "width": 4},
    "train": {"steps": 5, "optimizer": "sgd", "weight_decay": 0.5}, "corpus": ["c.jsonl"]})";
  write_text(dir.path() / "run.json", text);
  const RunConfig c = load_run_config(dir.path() / "run.json");
  EXPECT_EQ(c.root_seed, 7u);
  EXPECT_EQ(c.mode, MatchingMode::kGlobal);
  EXPECT_EQ(c.train.optimizer, OptimizerKind::kSgd);
  EXPECT_EQ(c.train.weight_decay, 0.5);
  EXPECT_EQ(c.resolve("c.jsonl"), dir.path() / "c.jsonl");
  EXPECT_EQ(c.hash(), run_config_from_json(to_json(c), dir.path()).hash());
  RunConfig d = c;
  d.root_seed = 8;
  EXPECT_NE(d.hash(), c.hash());
  EXPECT_EQ(error_kind_of([&] { run_config_from_json(nlohmann::json{{"bogus", 1}}, {}); }),
            ErrorKind::kConfig);
  EXPECT_EQ(error_kind_of([&] {
              run_config_from_json(nlohmann::json{{"student", {{"embedding_dim", 8}}}}, {});
            }),
            ErrorKind::kConfig);
  EXPECT_EQ(error_kind_of([&] { load_run_config(dir.path() / "none.json"); }), ErrorKind::kConfig);
}

TEST(Synth, DeterministicAndCoversShortClips) {
  SynthConfig sc;
  sc.seed = 5;
  SynthTaskSpec spec = default_synth_tasks().front();
  spec.train = 20;
  spec.dev = 10;
  spec.test = 10;
  const TaskData a = make_synth_task(sc, spec), b = make_synth_task(sc, spec);
  ASSERT_EQ(a.clips.size(), 40u);
  bool short_clip = false, long_clip = false;
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    ASSERT_EQ(a.clips[i].waveform.samples, b.clips[i].waveform.samples);
    ASSERT_EQ(a.clips[i].label, b.clips[i].label);
    const std::size_t n = a.clips[i].waveform.samples.size();
    short_clip |= n < 32000;
    long_clip |= n > 64000;
    EXPECT_GE(frame_patches(a.clips[i].waveform, sc.frontend, 2.0).size(), 1u);
  }
  EXPECT_TRUE(short_clip);
  EXPECT_TRUE(long_clip);
}

TEST(Synth, BenchmarkFilesAreByteIdenticalOnRerun) {
  TempDir a("synth-a"), b("synth-b");
  SynthConfig sc;
  sc.seed = 9;
  sc.corpus_clips = 4;
  for (auto t : default_synth_tasks()) {
    t.train = 6;
    t.dev = 4;
    t.test = 4;
    sc.tasks.push_back(t);
  }
  const auto written_a = write_synth_benchmark(sc, a.path());
  write_synth_benchmark(sc, b.path());
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), a.path());
    ASSERT_EQ(read_text(e.path()), read_text(b.path() / rel)) << rel;
  }
  EXPECT_GT(files, 4u * 14u);
  for (const auto& m : written_a) {
    const DatasetManifest dm = ingest_manifest(m);
    EXPECT_FALSE(dm.rows.empty());
  }
}

}  // namespace
}  // namespace embdistill
