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

#include "embdistill/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "embdistill/error.hpp"
#include "embdistill/random.hpp"

namespace embdistill {
namespace fs = std::filesystem;

void RunConfig::validate() const {
  frontend.validate();
  student.validate();
  train.validate();
  if (!(global_advance_s > 0.0) || !(advance_s > 0.0)) {
    throw Error(ErrorKind::kConfig, "frame advances must be positive");
  }
  if (teacher.embedding_dim != student.embedding_dim) {
    throw Error(ErrorKind::kConfig, "student embedding_dim " + std::to_string(student.embedding_dim) +
                                        " differs from the teacher's " +
                                        std::to_string(teacher.embedding_dim));
  }
}

fs::path RunConfig::resolve(const std::string& p) const {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::string RunConfig::hash() const { return sha256_hex(to_json(*this).dump()); }

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json student = to_json(c.student);
  // Normalization and seed are derived per run, not configured.
  student.erase("input_mean");
  student.erase("input_std");
  student.erase("seed");
  return {{"root_seed", c.root_seed},
          {"frontend", to_json(c.frontend)},
          {"teacher", to_json(c.teacher)},
          {"student", student},
          {"train",
           {{"learning_rate", c.train.learning_rate},
            {"batch_size", c.train.batch_size},
            {"steps", c.train.steps},
            {"optimizer", to_string(c.train.optimizer)},
            {"loss", to_string(c.train.loss)},
            {"cosine_schedule", c.train.cosine_schedule},
            {"lr_floor", c.train.lr_floor},
            {"weight_decay", c.train.weight_decay}}},
          {"mode", to_string(c.mode)},
          {"global_advance_s", c.global_advance_s},
          {"advance_s", c.advance_s},
          {"corpus", c.corpus},
          {"cache_dir", c.cache_dir}};
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, "run config must be a JSON object");
  static const char* kKnown[] = {"root_seed", "frontend",         "teacher",   "student",
                                 "train",     "mode",             "advance_s", "global_advance_s",
                                 "corpus",    "cache_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw Error(ErrorKind::kConfig, "unknown config field '" + key + "'");
    }
  }
  RunConfig c;
  c.base_dir = base_dir;
  take(j, "root_seed", c.root_seed);
  if (j.contains("frontend")) c.frontend = spectrogram_config_from_json(j["frontend"]);
  if (j.contains("teacher")) c.teacher = teacher_spec_from_json(j["teacher"]);
  if (j.contains("student")) c.student = student_config_from_json(j["student"]);
  if (j.contains("train")) {
    const auto& t = j["train"];
    if (!t.is_object()) throw Error(ErrorKind::kConfig, "'train' must be an object");
    take(t, "learning_rate", c.train.learning_rate);
    take(t, "batch_size", c.train.batch_size);
    take(t, "steps", c.train.steps);
    take(t, "cosine_schedule", c.train.cosine_schedule);
    take(t, "lr_floor", c.train.lr_floor);
    take(t, "weight_decay", c.train.weight_decay);
    std::string opt = to_string(c.train.optimizer), loss = to_string(c.train.loss);
    take(t, "optimizer", opt);
    take(t, "loss", loss);
    c.train.optimizer = optimizer_kind_from_string(opt);
    c.train.loss = loss_kind_from_string(loss);
  }
  std::string mode = to_string(c.mode);
  take(j, "mode", mode);
  c.mode = matching_mode_from_string(mode);
  take(j, "global_advance_s", c.global_advance_s);
  take(j, "advance_s", c.advance_s);
  take(j, "corpus", c.corpus);
  take(j, "cache_dir", c.cache_dir);
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::kConfig, "config '" + path.string() + "' not found");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kConfig, "config '" + path.string() + "': " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

std::vector<CorpusClip> to_corpus(const std::vector<LoadedClip>& clips) {
  std::vector<CorpusClip> out;
  out.reserve(clips.size());
  for (const auto& c : clips) out.push_back({c.clip_id, c.waveform, c.source_tag});
  return out;
}

DistillOutcome run_distillation(const RunConfig& cfg, const std::vector<CorpusClip>& corpus,
                                const std::string& model_id, const TrainObserver& observer) {
  const auto teacher = make_teacher(cfg.teacher, cfg.frontend);
  return run_distillation(cfg, cfg.student, *teacher, corpus, model_id, observer);
}

DistillOutcome run_distillation(const RunConfig& cfg, const StudentConfig& arch,
                                const Teacher& teacher, const std::vector<CorpusClip>& corpus,
                                const std::string& model_id, const TrainObserver& observer) {
  const ClipCorpus source(corpus, teacher, cfg.frontend, cfg.mode, cfg.global_advance_s);
  StudentConfig sc = arch;
  sc.seed = derive_seed(cfg.root_seed, "student-init");
  sc.input_bins = static_cast<std::size_t>(cfg.frontend.num_mel_bins);
  sc.input_frames = cfg.frontend.frames_per_patch();
  sc.input_mean = source.cell_mean();
  sc.input_std = source.cell_std();
  const StudentModel init = init_student(sc, teacher.embedding_dim());

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.root_seed, "train");
  const std::vector<DistillExample> held = source.probe_set(200);

  DistillOutcome out;
  out.initial_loss = evaluate_loss(init, held, tc.loss);
  TrainResult tr = train_student(init, source, tc, observer);
  out.final_loss = evaluate_loss(tr.model, held, tc.loss);
  out.loss_curve = std::move(tr.loss_curve);
  out.checkpoint.model_id = model_id;
  out.checkpoint.model = std::move(tr.model);
  out.checkpoint.frontend = cfg.frontend;
  out.checkpoint.provenance = {{"root_seed", cfg.root_seed},
                               {"config_sha256", cfg.hash()},
                               {"teacher", to_json(cfg.teacher)},
                               {"mode", to_string(cfg.mode)},
                               {"corpus_clips", corpus.size()},
                               {"initial_loss", out.initial_loss},
                               {"final_loss", out.final_loss}};
  return out;
}

ProbeRecord evaluate_embedder(const ClipEmbedder& e, const TaskData& task, double advance_s,
                              EmbeddingCache* cache, std::uint64_t seed,
                              TaskEvaluation* detail) {
  const SplitEmbeddings emb = embed_task(e, task, advance_s, cache, true);
  TaskEvaluation ev = evaluate_task(emb.train, emb.dev, emb.test, task.task, seed);
  ProbeRecord r = make_probe_record(e.model_id(), task.task, ev.best);
  if (detail != nullptr) *detail = std::move(ev);
  return r;
}

std::string loss_curve_to_csv(const std::vector<double>& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) os << i << "," << curve[i] << "\n";
  return os.str();
}

std::string probe_records_to_jsonl(const std::vector<ProbeRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

std::vector<ProbeRecord> probe_records_from_jsonl(const std::string& text) {
  std::vector<ProbeRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(probe_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kInvalidInput, std::string("malformed probe result line: ") + e.what());
    }
  }
  return out;
}

}  // namespace embdistill
