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

// Command line front end: synth, distill, embed, probe, sweep-advance, report.
// Failures print {"error": {"kind": ..., "message": ...}} on stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embdistill/cache.hpp"
#include "embdistill/dataset.hpp"
#include "embdistill/embed.hpp"
#include "embdistill/error.hpp"
#include "embdistill/io.hpp"
#include "embdistill/pipeline.hpp"
#include "embdistill/report.hpp"
#include "embdistill/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace embdistill;

namespace {

constexpr int kExitError = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

void print_error(std::string_view kind, std::string_view message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

// A model reference is a checkpoint path or "teacher:<run-config.json>".
struct LoadedModel {
  std::unique_ptr<ClipEmbedder> embedder;
  SpectrogramConfig frontend;
  ModelInfo info;
  std::string digest;
};

LoadedModel load_model(const std::string& ref) {
  LoadedModel out;
  constexpr std::string_view kTeacher = "teacher:";
  if (ref.starts_with(kTeacher)) {
    const RunConfig cfg = load_run_config(ref.substr(kTeacher.size()));
    out.frontend = cfg.frontend;
    out.embedder = std::make_unique<TeacherEmbedder>("teacher", cfg.teacher, cfg.frontend);
    out.info = {"teacher", 0, true, "", cfg.root_seed};
    out.digest = sha256_hex(to_json(cfg.teacher).dump());
    return out;
  }
  Checkpoint ck = load_checkpoint(ref);
  out.frontend = ck.frontend;
  out.digest = checkpoint_digest(ck.model);
  out.info.model_id = ck.model_id;
  out.info.param_count = ck.model.parameters.size();
  out.info.group = ck.provenance.value("group", std::string());
  out.info.seed = ck.provenance.value("root_seed", std::uint64_t{0});
  out.embedder = std::make_unique<StudentEmbedder>(ck.model_id, std::move(ck.model), ck.frontend);
  return out;
}

TaskData load_task_manifest(const fs::path& path, int sample_rate,
                            std::initializer_list<Split> splits) {
  const DatasetManifest m = ingest_manifest(path);
  if (!m.task) {
    throw Error(ErrorKind::kManifest, "'" + path.string() + "' is a corpus, not a task manifest");
  }
  return load_task(m, splits, sample_rate);
}

std::unique_ptr<EmbeddingCache> open_cache(const std::string& dir) {
  if (dir.empty()) return nullptr;
  return std::make_unique<EmbeddingCache>(dir);
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t corpus_clips = 300;
  double difficulty = 1.0;
  double min_duration = 1.0;
  double max_duration = 8.0;
  bool teacher_sign = false;
  bool high_pitch = false;
  std::optional<std::size_t> train, dev, test;
};

void add_synth(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<SynthArgs>();
  auto* sub = app.add_subcommand("synth", "Build the synthetic benchmark (WAV files + manifests)");
  sub->add_option("--out", args->out, "Output directory")->required();
  sub->add_option("--seed", args->seed, "Root seed");
  sub->add_option("--corpus-clips", args->corpus_clips, "Clips per distillation corpus");
  sub->add_option("--difficulty", args->difficulty, "Masking difficulty");
  sub->add_option("--min-duration", args->min_duration, "Shortest clip in seconds");
  sub->add_option("--max-duration", args->max_duration, "Longest clip in seconds");
  sub->add_flag("--teacher-sign", args->teacher_sign, "Add the teacher-sign task");
  sub->add_flag("--high-pitch", args->high_pitch, "Add the high-pitch task");
  sub->add_option("--train", args->train, "Train clips per task");
  sub->add_option("--dev", args->dev, "Dev clips per task");
  sub->add_option("--test", args->test, "Test clips per task");
  sub->callback([args, &run] {
    run = [args] {
      SynthConfig cfg;
      cfg.seed = args->seed;
      cfg.corpus_clips = args->corpus_clips;
      cfg.difficulty = args->difficulty;
      cfg.min_duration_s = args->min_duration;
      cfg.max_duration_s = args->max_duration;
      cfg.tasks = default_synth_tasks();
      if (args->teacher_sign) {
        cfg.tasks.push_back({"teacher-sign", SynthTaskKind::kTeacherSign});
      }
      if (args->high_pitch) {
        cfg.tasks.push_back({"high-pitch", SynthTaskKind::kHighPitch});
      }
      for (auto& t : cfg.tasks) {
        t.train = args->train.value_or(t.train);
        t.dev = args->dev.value_or(t.dev);
        t.test = args->test.value_or(t.test);
      }
      json paths = json::array();
      for (const auto& p : write_synth_benchmark(cfg, args->out)) paths.push_back(p.string());
      std::cout << json{{"manifests", paths}}.dump(2) << "\n";
      return 0;
    };
  });
}

// -------------------------------------------------------------- distill

struct DistillArgs {
  std::string config;
  std::string out;
  std::string model_id;
  std::string group;
  std::optional<std::string> mode, teacher, family;
  std::optional<std::size_t> depth, width, steps;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> corpus;
};

void add_distill(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<DistillArgs>();
  auto* sub = app.add_subcommand("distill", "Train a student against the configured teacher");
  sub->add_option("--config", args->config, "Run config JSON")->required();
  sub->add_option("--out", args->out, "Checkpoint stem (writes .json, .bin, .loss.csv)")
      ->required();
  sub->add_option("--mode", args->mode, "Target matching")->check(CLI::IsMember({"local", "global"}));
  sub->add_option("--teacher", args->teacher, "Synthetic teacher kind")
      ->check(CLI::IsMember({"synthetic-linear", "synthetic-mlp", "linear", "mlp"}));
  sub->add_option("--student-family", args->family, "conv-resnet-like | conv-scaled-like | attention-like");
  sub->add_option("--depth", args->depth, "Student depth");
  sub->add_option("--width", args->width, "Student width");
  sub->add_option("--steps", args->steps, "Training steps");
  sub->add_option("--seed", args->seed, "Root seed");
  sub->add_option("--corpus", args->corpus, "Corpus manifests (override the config)");
  sub->add_option("--model-id", args->model_id, "Model id (default: checkpoint stem name)");
  sub->add_option("--group", args->group, "A/B group recorded in the checkpoint");
  sub->callback([args, &run] {
    run = [args] {
      RunConfig cfg = load_run_config(args->config);
      if (args->mode) cfg.mode = matching_mode_from_string(*args->mode);
      if (args->teacher) {
        const std::string& t = *args->teacher;
        cfg.teacher.kind = teacher_kind_from_string(t.starts_with("synthetic-") ? t : "synthetic-" + t);
      }
      if (args->family) cfg.student.family = student_family_from_string(*args->family);
      if (args->depth) cfg.student.depth = *args->depth;
      if (args->width) cfg.student.width = *args->width;
      if (args->steps) cfg.train.steps = *args->steps;
      if (args->seed) cfg.root_seed = *args->seed;
      if (!args->corpus.empty()) {
        cfg.corpus.clear();
        for (const auto& c : args->corpus) cfg.corpus.push_back(fs::absolute(c).string());
      }
      cfg.validate();
      if (cfg.corpus.empty()) throw Error(ErrorKind::kConfig, "no distillation corpus given");

      std::vector<CorpusClip> corpus;
      for (const auto& c : cfg.corpus) {
        const DatasetManifest m = ingest_manifest(cfg.resolve(c));
        for (auto& clip : to_corpus(load_clips(m, cfg.frontend.sample_rate))) {
          corpus.push_back(std::move(clip));
        }
      }
      const fs::path stem(args->out);
      const std::string id = args->model_id.empty() ? stem.filename().string() : args->model_id;
      DistillOutcome res = run_distillation(cfg, corpus, id);
      res.checkpoint.provenance["group"] = args->group;
      if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
      save_checkpoint(stem, res.checkpoint);
      write_text(stem.string() + ".loss.csv", loss_curve_to_csv(res.loss_curve));
      std::cout << json{{"model_id", id},
                        {"param_count", res.checkpoint.model.parameters.size()},
                        {"initial_loss", res.initial_loss},
                        {"final_loss", res.final_loss},
                        {"checkpoint", stem.string()}}
                       .dump(2)
                << "\n";
      return 0;
    };
  });
}

// ---------------------------------------------------------------- embed

struct ModelTaskArgs {
  std::string model;
  std::string task;
  double advance = 2.0;
  std::string cache;
  std::string out;
  std::uint64_t seed = 0;
};

void add_model_task(CLI::App* sub, ModelTaskArgs& a) {
  sub->add_option("--model", a.model, "Checkpoint, or teacher:<run-config.json>")->required();
  sub->add_option("--task", a.task, "Task manifest")->required();
  sub->add_option("--cache", a.cache, "Embedding cache directory");
}

void add_embed(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<ModelTaskArgs>();
  auto* sub = app.add_subcommand("embed", "Embed every clip of a task");
  add_model_task(sub, *args);
  sub->add_option("--advance", args->advance, "Patch advance in seconds");
  sub->add_option("--out", args->out, "Output stem (writes .f32 and .json)")->required();
  sub->callback([args, &run] {
    run = [args] {
      const LoadedModel model = load_model(args->model);
      const TaskData task = load_task_manifest(args->task, model.frontend.sample_rate,
                                               {Split::kTrain, Split::kDev, Split::kTest});
      auto cache = open_cache(args->cache);
      std::vector<const LoadedClip*> clips;
      json ids = json::array(), labels = json::array(), splits = json::array();
      for (const auto& c : task.clips) {
        clips.push_back(&c);
        ids.push_back(c.clip_id);
        labels.push_back(c.label);
        splits.push_back(to_string(c.split));
      }
      const LabeledEmbeddings emb = embed_clips(*model.embedder, clips, args->advance, cache.get(),
                                                task.task.name + "/all");
      const std::string stem = args->out;
      if (fs::path(stem).has_parent_path()) fs::create_directories(fs::path(stem).parent_path());
      write_tensor(stem + ".f32", emb.rows);
      const json meta = {{"model_id", model.info.model_id},
                         {"task", task.task.name},
                         {"advance_s", args->advance},
                         {"dim", emb.dim},
                         {"fingerprint", model.embedder->fingerprint(args->advance)},
                         {"clip_ids", ids},
                         {"labels", labels},
                         {"splits", splits}};
      write_text(stem + ".json", meta.dump(2) + "\n");
      std::cout << json{{"rows", emb.size()}, {"dim", emb.dim}, {"out", stem}}.dump() << "\n";
      return 0;
    };
  });
}

// ---------------------------------------------------------------- probe

void add_probe(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<ModelTaskArgs>();
  auto* sub = app.add_subcommand("probe", "Select a probe on dev and score it on test");
  add_model_task(sub, *args);
  sub->add_option("--advance", args->advance, "Patch advance in seconds");
  sub->add_option("--seed", args->seed, "Probe seed");
  sub->add_option("--out", args->out, "Write the record as JSON Lines here");
  sub->callback([args, &run] {
    run = [args] {
      const LoadedModel model = load_model(args->model);
      const TaskData task = load_task_manifest(args->task, model.frontend.sample_rate,
                                               {Split::kTrain, Split::kDev, Split::kTest});
      auto cache = open_cache(args->cache);
      const ProbeRecord r =
          evaluate_embedder(*model.embedder, task, args->advance, cache.get(), args->seed);
      emit(args->out, probe_records_to_jsonl({r}));
      return 0;
    };
  });
}

// -------------------------------------------------------- sweep-advance

void add_sweep(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<ModelTaskArgs>();
  auto advances = std::make_shared<std::vector<double>>();
  auto* sub = app.add_subcommand("sweep-advance", "Dev metric as a function of patch advance");
  add_model_task(sub, *args);
  sub->add_option("--advances", *advances, "Comma-separated advances in seconds")
      ->required()
      ->delimiter(',');
  sub->add_option("--seed", args->seed, "Probe seed");
  sub->add_option("--out", args->out, "CSV output path (default stdout)");
  sub->callback([args, advances, &run] {
    run = [args, advances] {
      const LoadedModel model = load_model(args->model);
      const TaskData task =
          load_task_manifest(args->task, model.frontend.sample_rate, {Split::kTrain, Split::kDev});
      auto cache = open_cache(args->cache);
      const auto rows =
          sweep_frame_advance(*model.embedder, task, *advances, args->seed, cache.get());
      emit(args->out, sweep_to_csv(rows));
      return 0;
    };
  });
}

// --------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> models;
  std::vector<std::string> tasks;
  std::vector<std::string> ab;
  std::string out;
  std::string cache;
  std::string results;
  double advance = 2.0;
  std::uint64_t seed = 0;
};

ABComparison parse_ab(const std::string& spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string::npos ? a : spec.find(':', a + 1);
  if (b == std::string::npos || spec.find(':', b + 1) != std::string::npos) {
    throw Error(ErrorKind::kConfig, "A/B spec '" + spec + "' must be name:group_a:group_b");
  }
  return {spec.substr(0, a), spec.substr(a + 1, b - a - 1), spec.substr(b + 1)};
}

void add_report(CLI::App& app, std::function<int()>& run) {
  auto args = std::make_shared<ReportArgs>();
  auto* sub = app.add_subcommand("report", "Evaluate models on tasks and write the report");
  sub->add_option("--models", args->models, "Checkpoints and/or teacher:<run-config.json>")
      ->required();
  sub->add_option("--tasks", args->tasks, "Task manifests")->required();
  sub->add_option("--out", args->out, "Output directory")->required();
  sub->add_option("--cache", args->cache, "Embedding cache directory");
  sub->add_option("--results", args->results,
                  "Reuse probe records from this JSON Lines file instead of evaluating");
  sub->add_option("--ab", args->ab, "A/B comparison name:group_a:group_b (repeatable)");
  sub->add_option("--advance", args->advance, "Patch advance in seconds");
  sub->add_option("--seed", args->seed, "Probe seed");
  sub->callback([args, &run] {
    run = [args] {
      ReportInput in;
      std::vector<LoadedModel> models;
      json model_prov = json::array();
      for (const auto& ref : args->models) {
        models.push_back(load_model(ref));
        in.models.push_back(models.back().info);
        model_prov.push_back({{"model_id", models.back().info.model_id},
                              {"digest", models.back().digest}});
      }
      for (const auto& spec : args->ab) in.comparisons.push_back(parse_ab(spec));

      std::vector<fs::path> task_paths(args->tasks.begin(), args->tasks.end());
      std::vector<DatasetManifest> manifests;
      for (const auto& p : task_paths) {
        manifests.push_back(ingest_manifest(p));
        if (!manifests.back().task) {
          throw Error(ErrorKind::kManifest, "'" + p.string() + "' is not a task manifest");
        }
        in.tasks.push_back(manifests.back().task->name);
      }

      if (!args->results.empty()) {
        in.results = probe_records_from_jsonl(read_text(args->results));
      } else {
        auto cache = open_cache(args->cache);
        for (const auto& m : manifests) {
          std::optional<TaskData> task;
          int loaded_rate = 0;
          for (const auto& model : models) {
            if (!task || loaded_rate != model.frontend.sample_rate) {
              loaded_rate = model.frontend.sample_rate;
              task = load_task(m, {Split::kTrain, Split::kDev, Split::kTest}, loaded_rate);
            }
            in.results.push_back(
                evaluate_embedder(*model.embedder, *task, args->advance, cache.get(), args->seed));
          }
        }
      }
      in.provenance = {{"seed", args->seed},
                       {"advance_s", args->advance},
                       {"models", model_prov},
                       {"tasks", in.tasks}};
      const MetricReport rep = run_report(in);
      const fs::path out(args->out);
      fs::create_directories(out);
      write_text(out / "report.json", report_to_json(rep));
      write_text(out / "curve.csv", curve_to_csv(rep));
      write_text(out / "table.csv", table_to_csv(rep));
      write_text(out / "results.jsonl", probe_records_to_jsonl(rep.results));
      std::cout << json{{"out", out.string()}, {"gaps", rep.gaps}}.dump() << "\n";
      return 0;
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distill audio embedding students from a teacher and benchmark them"};
  app.require_subcommand(1);
  std::function<int()> run;
  add_synth(app, run);
  add_distill(app, run);
  add_embed(app, run);
  add_probe(app, run);
  add_sweep(app, run);
  add_report(app, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return kExitError;
  }
  try {
    return run ? run() : kExitUsage;
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitInternal;
  }
}
