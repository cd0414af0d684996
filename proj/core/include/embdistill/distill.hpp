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

#ifndef EMBDISTILL_DISTILL_HPP_
#define EMBDISTILL_DISTILL_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "embdistill/embedding.hpp"
#include "embdistill/frontend.hpp"
#include "embdistill/students.hpp"
#include "embdistill/teacher.hpp"

namespace embdistill {

enum class MatchingMode { kLocal, kGlobal };
enum class LossKind { kMse, kCosine };
enum class OptimizerKind { kSgd, kSgdMomentum, kAdam };

std::string to_string(MatchingMode m);
std::string to_string(LossKind k);
std::string to_string(OptimizerKind k);
MatchingMode matching_mode_from_string(const std::string& name);
LossKind loss_kind_from_string(const std::string& name);
OptimizerKind optimizer_kind_from_string(const std::string& name);

struct DistillExample {
  LogMelPatch patch;
  EmbeddingVector target;
  std::string clip_id;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 8;
  std::size_t steps = 1000;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kMse;
  // Cosine decay of the learning rate to lr_floor * learning_rate.
  bool cosine_schedule = false;
  double lr_floor = 0.0;
  // Decoupled weight decay: after each update, p -= lr * weight_decay * p.
  double weight_decay = 0.0;

  void validate() const;
};

// One example per patch of the framed clip. Local targets are the teacher's
// output on that patch; global targets all equal the teacher's clip-level
// embedding at the same advance.
std::vector<DistillExample> make_targets(const Waveform& w, const std::string& clip_id,
                                         MatchingMode mode, const Teacher& teacher,
                                         const SpectrogramConfig& cfg, double advance_s);
std::vector<DistillExample> make_targets(const Waveform& w, MatchingMode mode,
                                         const TeacherSpec& spec, const SpectrogramConfig& cfg,
                                         double advance_s);

// mse: mean squared error; cosine: 1 - cos(pred, target).
double distill_loss(std::span<const float> pred, std::span<const float> target, LossKind kind);
double distill_loss(const EmbeddingVector& pred, const EmbeddingVector& target, LossKind kind);

// Loss and its gradient with respect to pred.
template <typename Real>
double distill_loss_grad(std::span<const Real> pred, std::span<const Real> target,
                         LossKind kind, std::span<Real> grad);

// Source of training pairs; draw() must be a pure function of the rng state.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t embedding_dim() const = 0;
  virtual void draw(std::mt19937_64& rng, DistillExample& out) const = 0;
};

// Draws uniformly from a fixed example list.
class FixedExampleSource final : public ExampleSource {
 public:
  explicit FixedExampleSource(std::vector<DistillExample> examples);
  std::size_t embedding_dim() const override;
  void draw(std::mt19937_64& rng, DistillExample& out) const override;
  const std::vector<DistillExample>& examples() const { return examples_; }

 private:
  std::vector<DistillExample> examples_;
};

struct CorpusClip {
  std::string clip_id;
  Waveform waveform;
  std::string source_tag;
};

// Training corpus with the log-mel frames of every padded clip computed
// once. Each draw picks a clip uniformly and a hop-aligned patch offset
// uniformly, so patches start anywhere in the clip rather than on the
// inference grid.
class ClipCorpus final : public ExampleSource {
 public:
  // global_advance_s is the patch advance used to form clip-level targets.
  ClipCorpus(const std::vector<CorpusClip>& clips, const Teacher& teacher,
             const SpectrogramConfig& cfg, MatchingMode mode, double global_advance_s = 1.0);

  std::size_t embedding_dim() const override { return dim_; }
  void draw(std::mt19937_64& rng, DistillExample& out) const override;

  std::size_t size() const { return clips_.size(); }
  // Patches the clip at a hop-aligned start frame.
  LogMelPatch patch_at(std::size_t clip, std::size_t start_frame) const;
  std::size_t offsets(std::size_t clip) const;
  // Mean and standard deviation of every log-mel cell in the corpus.
  double cell_mean() const { return mean_; }
  double cell_std() const { return std_; }
  // Fixed examples (the first inference-grid patch of every clip) for
  // measuring loss before and after training.
  std::vector<DistillExample> probe_set(std::size_t max_clips) const;

 private:
  struct Entry {
    std::string clip_id;
    std::size_t num_frames = 0;
    std::vector<float> frames;
    EmbeddingVector global_target;
  };
  EmbeddingVector target_for(const Entry& e, const LogMelPatch& p) const;

  const Teacher& teacher_;
  SpectrogramConfig cfg_;
  MatchingMode mode_;
  std::size_t dim_ = 0;
  std::size_t patch_frames_ = 0;
  std::size_t hop_ = 0;
  std::vector<Entry> clips_;
  double mean_ = 0.0;
  double std_ = 1.0;
};

struct TrainResult {
  StudentModel model;
  // Mean batch loss at every step.
  std::vector<double> loss_curve;
};

// Progress callback invoked after every step with (step, batch loss).
using TrainObserver = std::function<void(std::size_t, double)>;

// Throws Error(kDivergence) when a loss or parameter becomes non-finite.
TrainResult train_student(const StudentModel& init, const ExampleSource& source,
                          const TrainConfig& tc, const TrainObserver& observer = {});

// Mean loss of the model over a fixed example set.
double evaluate_loss(const StudentModel& m, const std::vector<DistillExample>& examples,
                     LossKind kind = LossKind::kMse);

// Trailing-window mean below leading-window mean.
bool descends(const std::vector<double>& curve, std::size_t window = 100);

}  // namespace embdistill

#endif  // EMBDISTILL_DISTILL_HPP_
