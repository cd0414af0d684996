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

// End-to-end runs of the command line tool on a tiny synthetic benchmark.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "embdistill/io.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using embdistill::read_text;
using embdistill::write_text;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = std::make_unique<testing_helpers::TempDir>("cli");
    const CliRun r = run("synth --out " + quote(bench().string()) +
                      " --seed 5 --corpus-clips 12 --train 24 --dev 12 --test 16 --max-duration 4");
    ASSERT_EQ(r.code, 0) << r.err;

    const json cfg = {{"root_seed", 3},
                      {"teacher", {{"embedding_dim", 8}}},
                      {"student",
                       {{"family", "conv-resnet-like"}, {"depth", 1}, {"width", 4}, {"embedding_dim", 8}}},
                      {"train", {{"steps", 30}, {"batch_size", 2}, {"learning_rate", 1e-3}}},
                      {"corpus", {"bench/corpus-broad.jsonl"}}};
    write_text(config(), cfg.dump(2));
    const CliRun d = run("distill --config " + quote(config().string()) + " --out " +
                      quote((root() / "models" / "small").string()));
    ASSERT_EQ(d.code, 0) << d.err;
  }
  static void TearDownTestSuite() { dir_.reset(); }

  static const fs::path& root() { return dir_->path(); }
  static fs::path bench() { return root() / "bench"; }
  static fs::path config() { return root() / "run.json"; }
  static fs::path model() { return root() / "models" / "small"; }
  static fs::path task(const std::string& name) { return bench() / (name + ".jsonl"); }

  static CliRun run(const std::string& args) {
    const fs::path out = root() / "stdout.txt", err = root() / "stderr.txt";
    const std::string cmd = std::string(EMBDISTILL_CLI_PATH) + " " + args + " >" +
                            quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = fs::exists(out) ? read_text(out) : "";
    r.err = fs::exists(err) ? read_text(err) : "";
    return r;
  }

  static std::string error_kind(const CliRun& r) {
    return json::parse(r.err).at("error").at("kind").get<std::string>();
  }

 private:
  static std::unique_ptr<testing_helpers::TempDir> dir_;
};

std::unique_ptr<testing_helpers::TempDir> CliTest::dir_;

TEST_F(CliTest, HelpSucceeds) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("distill --help").code, 0);
}

TEST_F(CliTest, UsageErrorsAreJson) {
  const CliRun none = run("");
  EXPECT_NE(none.code, 0);
  EXPECT_EQ(error_kind(none), "usage");
  const CliRun bad = run("distill --config x.json --out y --mode sideways");
  EXPECT_NE(bad.code, 0);
  EXPECT_EQ(error_kind(bad), "usage");
}

TEST_F(CliTest, SynthIsByteIdenticalOnRerun) {
  const fs::path again = root() / "bench-again";
  const CliRun r = run("synth --out " + quote(again.string()) +
                    " --seed 5 --corpus-clips 12 --train 24 --dev 12 --test 16 --max-duration 4");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"pitch-band.jsonl", "corpus-low.jsonl", "synth.json"}) {
    EXPECT_EQ(read_text(bench() / name), read_text(again / name)) << name;
  }
  const std::string manifest = read_text(task("tonality"));
  const auto first = json::parse(manifest.substr(manifest.find('\n') + 1,
                                                 manifest.find('\n', manifest.find('\n') + 1) -
                                                     manifest.find('\n') - 1));
  const std::string wav = first.at("clip_path");
  EXPECT_EQ(read_text(bench() / wav), read_text(again / wav));
}

TEST_F(CliTest, DistillWritesCheckpointAndLossCurve) {
  EXPECT_TRUE(fs::exists(model().string() + ".json"));
  EXPECT_TRUE(fs::exists(model().string() + ".bin"));
  const std::string curve = read_text(model().string() + ".loss.csv");
  EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 31);
  const auto ck = embdistill::load_checkpoint(model());
  EXPECT_EQ(ck.model_id, "small");
  EXPECT_EQ(ck.model.config.embedding_dim, 8u);
}

TEST_F(CliTest, DistillFlagsOverrideTheConfig) {
  const fs::path stem = root() / "models" / "override";
  const CliRun r = run("distill --config " + quote(config().string()) + " --out " +
                    quote(stem.string()) +
                    " --student-family conv-scaled-like --depth 2 --width 3 --seed 9 "
                    "--mode global --teacher mlp --steps 5 --group g1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ck = embdistill::load_checkpoint(stem);
  EXPECT_EQ(ck.model.config.family, embdistill::StudentFamily::kConvScaledLike);
  EXPECT_EQ(ck.model.config.depth, 2u);
  EXPECT_EQ(ck.model.config.width, 3u);
  EXPECT_EQ(ck.provenance.at("root_seed").get<int>(), 9);
  EXPECT_EQ(ck.provenance.at("mode").get<std::string>(), "global");
  EXPECT_EQ(ck.provenance.at("group").get<std::string>(), "g1");
  EXPECT_EQ(ck.provenance.at("teacher").at("kind").get<std::string>(), "synthetic-mlp");
}

TEST_F(CliTest, DistillIsDeterministic) {
  const fs::path stem = root() / "models" / "repeat";
  ASSERT_EQ(run("distill --config " + quote(config().string()) + " --out " + quote(stem.string()) +
                " --model-id small")
                .code,
            0);
  EXPECT_EQ(read_text(stem.string() + ".bin"), read_text(model().string() + ".bin"));
}

TEST_F(CliTest, EmbedWritesTensorAndSidecar) {
  const fs::path stem = root() / "emb" / "pitch";
  const CliRun r = run("embed --model " + quote(model().string()) + " --task " +
                    quote(task("pitch-band").string()) + " --advance 1.0 --out " +
                    quote(stem.string()));
  ASSERT_EQ(r.code, 0) << r.err;
  const json meta = json::parse(read_text(stem.string() + ".json"));
  EXPECT_EQ(meta.at("dim").get<int>(), 8);
  EXPECT_EQ(meta.at("clip_ids").size(), 24u + 12u + 16u);
  EXPECT_EQ(fs::file_size(stem.string() + ".f32"), 4u * 8u * 52u);
}

TEST_F(CliTest, ProbePrintsOneRecord) {
  const CliRun r = run("probe --model " + quote(model().string()) + " --task " +
                    quote(task("tonality").string()));
  ASSERT_EQ(r.code, 0) << r.err;
  const json rec = json::parse(r.out);
  EXPECT_EQ(rec.at("model_id"), "small");
  EXPECT_EQ(rec.at("task"), "tonality");
  EXPECT_EQ(rec.at("metric"), "eer");
}

TEST_F(CliTest, TeacherModelsAreAccepted) {
  const CliRun r = run("probe --model " + quote("teacher:" + config().string()) + " --task " +
                    quote(task("pitch-band").string()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("model_id"), "teacher");
}

TEST_F(CliTest, SweepAdvanceWritesCsv) {
  const CliRun r = run("sweep-advance --model " + quote(model().string()) + " --task " +
                    quote(task("loudness").string()) + " --advances 0.5,1.0,2.0");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "advance,dev_metric,probe_type");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, ReportWarmAndColdCacheAgree) {
  const std::string models =
      quote(model().string()) + " " + quote("teacher:" + config().string());
  const std::string tasks =
      quote(task("pitch-band").string()) + " " + quote(task("tonality").string());
  const fs::path cache = root() / "cache";
  auto report = [&](const fs::path& out) {
    return run("report --models " + models + " --tasks " + tasks + " --cache " +
               quote(cache.string()) + " --out " + quote(out.string()));
  };
  const CliRun cold = report(root() / "rep-cold");
  ASSERT_EQ(cold.code, 0) << cold.err;
  const CliRun warm = report(root() / "rep-warm");
  ASSERT_EQ(warm.code, 0) << warm.err;
  for (const char* f : {"report.json", "curve.csv", "table.csv", "results.jsonl"}) {
    EXPECT_EQ(read_text(root() / "rep-cold" / f), read_text(root() / "rep-warm" / f)) << f;
  }
  const json rep = json::parse(read_text(root() / "rep-cold" / "report.json"));
  EXPECT_EQ(rep.at("tasks").size(), 2u);

  const CliRun reused = run("report --models " + models + " --tasks " + tasks + " --results " +
                         quote((root() / "rep-cold" / "results.jsonl").string()) + " --out " +
                         quote((root() / "rep-reused").string()));
  ASSERT_EQ(reused.code, 0) << reused.err;
  EXPECT_EQ(read_text(root() / "rep-cold" / "report.json"),
            read_text(root() / "rep-reused" / "report.json"));
}

TEST_F(CliTest, FailuresMapToErrorKinds) {
  const CliRun missing_cfg = run("distill --config " + quote((root() / "nope.json").string()) +
                              " --out " + quote((root() / "x").string()));
  EXPECT_EQ(missing_cfg.code, 2);
  EXPECT_EQ(error_kind(missing_cfg), "config");

  const CliRun missing_model = run("probe --model " + quote((root() / "absent").string()) +
                                " --task " + quote(task("tonality").string()));
  EXPECT_EQ(missing_model.code, 2);
  EXPECT_EQ(error_kind(missing_model), "missing_model");

  const fs::path bad = root() / "bad.jsonl";
  write_text(bad, "{\"clip_id\": \"a\", \"clip_path\": \"a.wav\", \"split\": \"validation\"}\n");
  const CliRun bad_manifest =
      run("probe --model " + quote(model().string()) + " --task " + quote(bad.string()));
  EXPECT_EQ(bad_manifest.code, 2);
  EXPECT_EQ(error_kind(bad_manifest), "manifest");

  const CliRun corpus_as_task = run("probe --model " + quote(model().string()) + " --task " +
                                 quote((bench() / "corpus-low.jsonl").string()));
  EXPECT_EQ(error_kind(corpus_as_task), "manifest");

  const CliRun bad_ab = run("report --models " + quote(model().string()) + " --tasks " +
                         quote(task("tonality").string()) + " --ab nonsense --out " +
                         quote((root() / "r").string()));
  EXPECT_EQ(error_kind(bad_ab), "config");
}

}  // namespace
