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

// Small fixed-context student models: one log-mel patch in, one embedding
// out. Three families with depth and width knobs:
//   conv-resnet-like   strided conv stem, residual two-conv blocks
//   conv-scaled-like   pointwise stem, inverted-bottleneck depthwise blocks
//   attention-like     tile embedding, pre-norm self-attention blocks
// Every family ends with global average pooling over time and a linear map
// to the embedding dimension.

#ifndef EMBDISTILL_STUDENTS_HPP_
#define EMBDISTILL_STUDENTS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "embdistill/embedding.hpp"
#include "embdistill/frontend.hpp"

namespace embdistill {

enum class StudentFamily { kConvResnetLike, kConvScaledLike, kAttentionLike };

std::string to_string(StudentFamily family);
StudentFamily student_family_from_string(const std::string& name);

struct StudentConfig {
  StudentFamily family = StudentFamily::kConvResnetLike;
  std::size_t depth = 1;
  std::size_t width = 8;
  std::size_t embedding_dim = 64;
  std::uint64_t seed = 0;
  // Input patch geometry. input_frames == 0 accepts any number of frames.
  std::size_t input_bins = 80;
  std::size_t input_frames = 198;
  // Tile size for attention-like students.
  std::size_t patch_frames = 11;
  std::size_t patch_bins = 16;
  // Fixed input standardization (x - mean) / std, estimated from the
  // distillation corpus before training.
  double input_mean = 0.0;
  double input_std = 1.0;

  void validate() const;
};

bool operator==(const StudentConfig& a, const StudentConfig& b);

// Pure shape arithmetic.
std::size_t param_count(const StudentConfig& cfg);
// 32-bit parameters, reported in MiB.
double size_mb(std::size_t params);

struct StudentModel {
  StudentConfig config;
  std::vector<float> parameters;
};

// Seeded fan-in-scaled initialization. When run_embedding_dim is given it
// must equal cfg.embedding_dim.
StudentModel init_student(const StudentConfig& cfg,
                          std::optional<std::size_t> run_embedding_dim = std::nullopt);

EmbeddingVector student_forward(const StudentModel& m, const LogMelPatch& p);

// Gradient of <grad_out, student_forward(m, p)> with respect to the flat
// parameter vector.
std::vector<float> student_backward(const StudentModel& m, const LogMelPatch& p,
                                    const EmbeddingVector& grad_out);

// Scalar-generic network; float for training and inference, double for
// gradient checking.
template <typename Real>
class StudentNetwork {
 public:
  struct Trace;

  explicit StudentNetwork(const StudentConfig& cfg);
  ~StudentNetwork();
  StudentNetwork(StudentNetwork&&) noexcept;
  StudentNetwork& operator=(StudentNetwork&&) noexcept;

  const StudentConfig& config() const { return cfg_; }
  std::size_t param_count() const;
  void init(std::span<Real> params) const;

  // trace may be null when no backward pass follows.
  std::vector<Real> forward(std::span<const Real> params, const LogMelPatch& patch,
                            Trace* trace) const;
  // Adds d<grad_out, y>/d(params) into grad.
  void backward(std::span<const Real> params, const Trace& trace,
                std::span<const Real> grad_out, std::span<Real> grad) const;

  std::shared_ptr<Trace> make_trace() const;

 private:
  struct Impl;
  StudentConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

extern template class StudentNetwork<float>;
extern template class StudentNetwork<double>;

// The five-rung size ladder used for size/performance curves, smallest first.
std::vector<StudentConfig> desk_ladder(std::size_t embedding_dim = 64, std::uint64_t seed = 0);

}  // namespace embdistill

#endif  // EMBDISTILL_STUDENTS_HPP_
