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

#ifndef EMBDISTILL_PIPELINE_HPP_
#define EMBDISTILL_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embdistill/dataset.hpp"
#include "embdistill/distill.hpp"
#include "embdistill/embed.hpp"
#include "embdistill/io.hpp"
#include "embdistill/report.hpp"

namespace embdistill {

// One JSON document describing a run. Every random choice derives from
// root_seed.
struct RunConfig {
  std::uint64_t root_seed = 0;
  SpectrogramConfig frontend;
  TeacherSpec teacher;
  StudentConfig student;
  TrainConfig train;
  MatchingMode mode = MatchingMode::kLocal;
  // Patch advance for clip-level (global) targets.
  double global_advance_s = 1.0;
  // Patch advance for inference embeddings.
  double advance_s = 2.0;
  // Distillation corpus manifests, resolved against base_dir.
  std::vector<std::string> corpus;
  std::string cache_dir = "cache";
  std::filesystem::path base_dir;

  void validate() const;
  std::filesystem::path resolve(const std::string& p) const;
  // SHA-256 of the canonical JSON form.
  std::string hash() const;
};

nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

std::vector<CorpusClip> to_corpus(const std::vector<LoadedClip>& clips);

struct DistillOutcome {
  Checkpoint checkpoint;
  std::vector<double> loss_curve;
  // Mean loss over a fixed probe set before and after training.
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Standardizes inputs with corpus statistics, initializes the student from
// the run seed and trains it against the configured teacher.
DistillOutcome run_distillation(const RunConfig& cfg, const std::vector<CorpusClip>& corpus,
                                const std::string& model_id, const TrainObserver& observer = {});
DistillOutcome run_distillation(const RunConfig& cfg, const StudentConfig& arch,
                                const Teacher& teacher, const std::vector<CorpusClip>& corpus,
                                const std::string& model_id, const TrainObserver& observer = {});

// Embeds every split, selects a probe on dev and scores it on test.
ProbeRecord evaluate_embedder(const ClipEmbedder& e, const TaskData& task, double advance_s,
                              EmbeddingCache* cache = nullptr, std::uint64_t seed = 0,
                              TaskEvaluation* detail = nullptr);

std::string loss_curve_to_csv(const std::vector<double>& curve);
std::string probe_records_to_jsonl(const std::vector<ProbeRecord>& records);
std::vector<ProbeRecord> probe_records_from_jsonl(const std::string& text);

}  // namespace embdistill

#endif  // EMBDISTILL_PIPELINE_HPP_
