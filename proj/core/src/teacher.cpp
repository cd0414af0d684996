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

#include "embdistill/teacher.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "embdistill/error.hpp"
#include "embdistill/random.hpp"

namespace embdistill {

std::string to_string(TeacherKind kind) {
  switch (kind) {
    case TeacherKind::kSyntheticLinear: return "synthetic-linear";
    case TeacherKind::kSyntheticMlp: return "synthetic-mlp";
    case TeacherKind::kExternalPrecomputed: return "external-precomputed";
  }
  return "unknown";
}

TeacherKind teacher_kind_from_string(const std::string& name) {
  if (name == "synthetic-linear") return TeacherKind::kSyntheticLinear;
  if (name == "synthetic-mlp") return TeacherKind::kSyntheticMlp;
  if (name == "external-precomputed") return TeacherKind::kExternalPrecomputed;
  throw Error(ErrorKind::kConfig, "unknown teacher kind '" + name + "'");
}

EmbeddingVector Teacher::embed_clip(const Waveform& w, const std::string& clip_id,
                                    const SpectrogramConfig& cfg, double advance_s) const {
  auto patches = frame_patches(w, cfg, advance_s);
  std::vector<EmbeddingVector> parts;
  parts.reserve(patches.size());
  for (auto& p : patches) {
    p.clip_id = clip_id;
    parts.push_back(embed_patch(p));
  }
  return mean_embedding(parts);
}

SyntheticTeacher::SyntheticTeacher(const TeacherSpec& spec, const SpectrogramConfig& cfg)
    : spec_(spec) {
  cfg.validate();
  if (spec.embedding_dim < 1) throw Error(ErrorKind::kConfig, "embedding_dim must be >= 1");
  if (spec.kind == TeacherKind::kExternalPrecomputed) {
    throw Error(ErrorKind::kConfig, "external-precomputed is not a synthetic teacher");
  }
  frames_ = cfg.frames_per_patch();
  bins_ = static_cast<std::size_t>(cfg.num_mel_bins);
  const bool mlp = spec.kind == TeacherKind::kSyntheticMlp;
  if (mlp && spec.hidden_dim < 1) throw Error(ErrorKind::kConfig, "hidden_dim must be >= 1");
  const std::size_t out1 = mlp ? spec.hidden_dim : spec.embedding_dim;

  std::mt19937_64 rng(derive_seed(spec.seed, "synthetic-teacher"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale1 = 1.0 / std::sqrt(static_cast<double>(bins_));
  first_.resize(out1 * bins_);
  for (auto& v : first_) v = normal(rng) * scale1;
  bias1_.resize(out1);
  for (auto& v : bias1_) v = 0.1 * normal(rng);
  if (mlp) {
    const double scale2 = 1.5 / std::sqrt(static_cast<double>(spec.hidden_dim));
    second_.resize(spec.embedding_dim * spec.hidden_dim);
    for (auto& v : second_) v = normal(rng) * scale2;
    bias2_.resize(spec.embedding_dim);
    for (auto& v : bias2_) v = 0.1 * normal(rng);
  }
}

EmbeddingVector SyntheticTeacher::embed_patch(const LogMelPatch& patch) const {
  if (patch.num_frames != frames_ || patch.num_bins != bins_ ||
      patch.values.size() != frames_ * bins_) {
    std::ostringstream os;
    os << "teacher expects " << frames_ << "x" << bins_ << " patches, got "
       << patch.num_frames << "x" << patch.num_bins;
    throw Error(ErrorKind::kShapeMismatch, os.str());
  }
  std::vector<double> pooled(bins_, 0.0);
  for (std::size_t t = 0; t < frames_; ++t) {
    for (std::size_t f = 0; f < bins_; ++f) pooled[f] += patch.values[t * bins_ + f];
  }
  for (auto& v : pooled) {
    v = spec_.input_gain * (v / static_cast<double>(frames_) - spec_.input_offset);
  }
  const std::size_t out1 = bias1_.size();
  std::vector<double> hidden(out1);
  for (std::size_t o = 0; o < out1; ++o) {
    double acc = bias1_[o];
    const double* row = first_.data() + o * bins_;
    for (std::size_t f = 0; f < bins_; ++f) acc += row[f] * pooled[f];
    hidden[o] = std::tanh(acc);
  }
  EmbeddingVector out;
  out.values.resize(spec_.embedding_dim);
  if (spec_.kind == TeacherKind::kSyntheticLinear) {
    for (std::size_t d = 0; d < spec_.embedding_dim; ++d) {
      out.values[d] = static_cast<float>(hidden[d]);
    }
    return out;
  }
  for (std::size_t d = 0; d < spec_.embedding_dim; ++d) {
    double acc = bias2_[d];
    const double* row = second_.data() + d * out1;
    for (std::size_t h = 0; h < out1; ++h) acc += row[h] * hidden[h];
    out.values[d] = static_cast<float>(std::tanh(acc));
  }
  return out;
}

double SyntheticTeacher::projection_weight(std::size_t d, std::size_t frame,
                                           std::size_t bin) const {
  (void)frame;  // weights are tied across frames
  return spec_.input_gain * first_[d * bins_ + bin] / static_cast<double>(frames_);
}

double SyntheticTeacher::projection_row_norm(std::size_t d) const {
  double sq = 0.0;
  for (std::size_t f = 0; f < bins_; ++f) {
    const double w = projection_weight(d, 0, f);
    sq += w * w;
  }
  return std::sqrt(sq * static_cast<double>(frames_));
}

std::size_t SyntheticTeacher::weight_count() const {
  return first_.size() + bias1_.size() + second_.size() + bias2_.size();
}

PrecomputedTeacher::PrecomputedTeacher(std::size_t dim,
                                       std::map<std::string, EmbeddingVector> table)
    : dim_(dim), table_(std::move(table)) {
  for (const auto& [key, vec] : table_) {
    if (vec.size() != dim_) {
      throw Error(ErrorKind::kShapeMismatch, "precomputed vector '" + key + "' has wrong length");
    }
  }
}

std::string PrecomputedTeacher::patch_key(const std::string& clip_id, double offset_s) {
  std::ostringstream os;
  os << clip_id << "@" << std::llround(offset_s * 1000.0);
  return os.str();
}

EmbeddingVector PrecomputedTeacher::embed_patch(const LogMelPatch& patch) const {
  const std::string key = patch_key(patch.clip_id, patch.start_offset_s);
  auto it = table_.find(key);
  if (it == table_.end()) {
    throw Error(ErrorKind::kCacheMiss, "no precomputed teacher vector for '" + key + "'");
  }
  return it->second;
}

EmbeddingVector PrecomputedTeacher::embed_clip(const Waveform& w, const std::string& clip_id,
                                               const SpectrogramConfig& cfg,
                                               double advance_s) const {
  auto it = table_.find(clip_id);
  if (it != table_.end()) return it->second;
  return Teacher::embed_clip(w, clip_id, cfg, advance_s);
}

std::unique_ptr<Teacher> make_teacher(const TeacherSpec& spec, const SpectrogramConfig& cfg) {
  if (spec.kind == TeacherKind::kExternalPrecomputed) {
    throw Error(ErrorKind::kConfig,
                "external-precomputed teachers are loaded from an embedding cache");
  }
  return std::make_unique<SyntheticTeacher>(spec, cfg);
}

EmbeddingVector teacher_embed_patch(const LogMelPatch& patch, const TeacherSpec& spec,
                                    const SpectrogramConfig& cfg) {
  return SyntheticTeacher(spec, cfg).embed_patch(patch);
}

EmbeddingVector teacher_embed_clip(const Waveform& w, const TeacherSpec& spec,
                                   const SpectrogramConfig& cfg, double advance_s) {
  return SyntheticTeacher(spec, cfg).embed_clip(w, "", cfg, advance_s);
}

}  // namespace embdistill
