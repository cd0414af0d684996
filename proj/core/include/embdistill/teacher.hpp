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

// Teacher embedding models. The synthetic teachers are seeded, fixed
// functions of a log-mel patch that stand in for a large pretrained encoder;
// the precomputed teacher serves vectors produced elsewhere.

#ifndef EMBDISTILL_TEACHER_HPP_
#define EMBDISTILL_TEACHER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "embdistill/embedding.hpp"
#include "embdistill/frontend.hpp"

namespace embdistill {

enum class TeacherKind { kSyntheticLinear, kSyntheticMlp, kExternalPrecomputed };

std::string to_string(TeacherKind kind);
TeacherKind teacher_kind_from_string(const std::string& name);

struct TeacherSpec {
  std::size_t embedding_dim = 64;
  std::uint64_t seed = 0;
  TeacherKind kind = TeacherKind::kSyntheticLinear;
  std::size_t hidden_dim = 128;  // synthetic-mlp only
  // Log-mel cells are mapped to gain * (x - offset) before projection.
  double input_offset = -1.0;
  double input_gain = 0.35;
};

class Teacher {
 public:
  virtual ~Teacher() = default;

  virtual std::size_t embedding_dim() const = 0;
  virtual EmbeddingVector embed_patch(const LogMelPatch& patch) const = 0;

  // Frames the clip, embeds every patch and returns their unweighted mean.
  virtual EmbeddingVector embed_clip(const Waveform& w, const std::string& clip_id,
                                     const SpectrogramConfig& cfg, double advance_s) const;
};

// Seeded projection of the flattened patch followed by tanh. The projection
// ties weights across frames: W[d][t*F + f] = gain * A[d][f] / T, so the
// output depends on the time-averaged spectrum. The mlp kind inserts one
// tanh hidden layer of hidden_dim units.
class SyntheticTeacher final : public Teacher {
 public:
  SyntheticTeacher(const TeacherSpec& spec, const SpectrogramConfig& cfg);

  std::size_t embedding_dim() const override { return spec_.embedding_dim; }
  EmbeddingVector embed_patch(const LogMelPatch& patch) const override;

  // Euclidean norm of row d of the effective flattened projection.
  // For the linear kind, changing one cell by delta moves output d by at
  // most this norm times |delta| (tanh has slope <= 1).
  double projection_row_norm(std::size_t d) const;
  // Effective weight of cell (frame, bin) in row d of the flattened projection.
  double projection_weight(std::size_t d, std::size_t frame, std::size_t bin) const;

  std::size_t weight_count() const;

 private:
  TeacherSpec spec_;
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<double> first_;   // out1 x bins
  std::vector<double> bias1_;
  std::vector<double> second_;  // dim x hidden (mlp)
  std::vector<double> bias2_;
};

// Serves vectors keyed by clip id (clip level) or by patch_key(clip, offset).
class PrecomputedTeacher final : public Teacher {
 public:
  PrecomputedTeacher(std::size_t dim, std::map<std::string, EmbeddingVector> table);

  std::size_t embedding_dim() const override { return dim_; }
  EmbeddingVector embed_patch(const LogMelPatch& patch) const override;
  EmbeddingVector embed_clip(const Waveform& w, const std::string& clip_id,
                             const SpectrogramConfig& cfg, double advance_s) const override;

  static std::string patch_key(const std::string& clip_id, double offset_s);

 private:
  std::size_t dim_;
  std::map<std::string, EmbeddingVector> table_;
};

// Builds a synthetic teacher; external-precomputed needs a table and must be
// constructed directly.
std::unique_ptr<Teacher> make_teacher(const TeacherSpec& spec, const SpectrogramConfig& cfg);

EmbeddingVector teacher_embed_patch(const LogMelPatch& patch, const TeacherSpec& spec,
                                    const SpectrogramConfig& cfg);
EmbeddingVector teacher_embed_clip(const Waveform& w, const TeacherSpec& spec,
                                   const SpectrogramConfig& cfg, double advance_s);

}  // namespace embdistill

#endif  // EMBDISTILL_TEACHER_HPP_
