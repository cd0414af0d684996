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

#ifndef EMBDISTILL_EMBED_HPP_
#define EMBDISTILL_EMBED_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "embdistill/dataset.hpp"
#include "embdistill/embedding.hpp"
#include "embdistill/frontend.hpp"
#include "embdistill/probes.hpp"
#include "embdistill/students.hpp"
#include "embdistill/teacher.hpp"

namespace embdistill {

class EmbeddingCache;

// Unweighted mean of the student's outputs over every patch of the clip.
EmbeddingVector student_embed_clip(const StudentModel& m, const Waveform& w,
                                   const SpectrogramConfig& cfg, double advance_s);

// Anything that maps a clip to a fixed-length vector: a student checkpoint
// or the teacher itself (the reference row of every report).
class ClipEmbedder {
 public:
  virtual ~ClipEmbedder() = default;
  virtual const std::string& model_id() const = 0;
  virtual std::size_t embedding_dim() const = 0;
  // 0 for teachers, which are not part of the size ladder.
  virtual std::size_t param_count() const = 0;
  // Hash of every input to embed() other than the audio itself.
  virtual std::string fingerprint(double advance_s) const = 0;
  virtual EmbeddingVector embed(const Waveform& w, const std::string& clip_id,
                                double advance_s) const = 0;
};

class StudentEmbedder final : public ClipEmbedder {
 public:
  StudentEmbedder(std::string model_id, StudentModel model, SpectrogramConfig cfg);
  ~StudentEmbedder() override;

  const std::string& model_id() const override { return id_; }
  std::size_t embedding_dim() const override { return model_.config.embedding_dim; }
  std::size_t param_count() const override { return model_.parameters.size(); }
  std::string fingerprint(double advance_s) const override;
  EmbeddingVector embed(const Waveform& w, const std::string& clip_id,
                        double advance_s) const override;

 private:
  std::string id_;
  StudentModel model_;
  SpectrogramConfig cfg_;
  std::string digest_;
  std::unique_ptr<StudentNetwork<float>> net_;
};

class TeacherEmbedder final : public ClipEmbedder {
 public:
  TeacherEmbedder(std::string model_id, const TeacherSpec& spec, SpectrogramConfig cfg);

  const std::string& model_id() const override { return id_; }
  std::size_t embedding_dim() const override { return teacher_->embedding_dim(); }
  std::size_t param_count() const override { return 0; }
  std::string fingerprint(double advance_s) const override;
  EmbeddingVector embed(const Waveform& w, const std::string& clip_id,
                        double advance_s) const override;

 private:
  std::string id_;
  TeacherSpec spec_;
  SpectrogramConfig cfg_;
  std::unique_ptr<Teacher> teacher_;
};

// Embeds clips in parallel; rows follow the input order. With a cache, a
// hit skips the audio entirely and a miss is filled after computing.
LabeledEmbeddings embed_clips(const ClipEmbedder& e, const std::vector<const LoadedClip*>& clips,
                              double advance_s, EmbeddingCache* cache = nullptr,
                              const std::string& cache_key = "");

struct SplitEmbeddings {
  LabeledEmbeddings train, dev, test;
};

// Embeds the three splits of a task (test only when include_test).
SplitEmbeddings embed_task(const ClipEmbedder& e, const TaskData& task, double advance_s,
                           EmbeddingCache* cache = nullptr, bool include_test = true);

struct SweepRow {
  double advance_s = 0.0;
  double dev_metric = 0.0;
  ProbeVariant probe = ProbeVariant::kLogregStrong;
};

// For each advance: embed train and dev, select the best probe on dev, and
// report its dev score. Test clips are never touched.
std::vector<SweepRow> sweep_frame_advance(const ClipEmbedder& e, const TaskData& task,
                                          const std::vector<double>& advances,
                                          std::uint64_t seed = 0,
                                          EmbeddingCache* cache = nullptr);

// advance,dev_metric,probe_type
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace embdistill

#endif  // EMBDISTILL_EMBED_HPP_
