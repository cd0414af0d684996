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

#include "embdistill/distill.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "embdistill/error.hpp"
#include "embdistill/random.hpp"

namespace embdistill {

std::string to_string(MatchingMode m) { return m == MatchingMode::kLocal ? "local" : "global"; }

std::string to_string(LossKind k) { return k == LossKind::kMse ? "mse" : "cosine"; }

std::string to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kSgdMomentum: return "sgd-momentum";
    case OptimizerKind::kAdam: return "adam-like";
  }
  return "unknown";
}

MatchingMode matching_mode_from_string(const std::string& name) {
  if (name == "local") return MatchingMode::kLocal;
  if (name == "global") return MatchingMode::kGlobal;
  throw Error(ErrorKind::kConfig, "unknown matching mode '" + name + "' (local|global)");
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "cosine") return LossKind::kCosine;
  throw Error(ErrorKind::kConfig, "unknown loss '" + name + "' (mse|cosine)");
}

OptimizerKind optimizer_kind_from_string(const std::string& name) {
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kSgdMomentum, OptimizerKind::kAdam}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::kConfig,
              "unknown optimizer '" + name + "' (sgd|sgd-momentum|adam-like)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::kConfig, "learning_rate must be finite and non-negative");
  }
  if (batch_size < 1) throw Error(ErrorKind::kConfig, "batch_size must be >= 1");
  if (steps < 1) throw Error(ErrorKind::kConfig, "steps must be >= 1");
  if (!(lr_floor >= 0.0 && lr_floor <= 1.0)) {
    throw Error(ErrorKind::kConfig, "lr_floor must lie in [0, 1]");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw Error(ErrorKind::kConfig, "weight_decay must be finite and non-negative");
  }
}

std::vector<DistillExample> make_targets(const Waveform& w, const std::string& clip_id,
                                         MatchingMode mode, const Teacher& teacher,
                                         const SpectrogramConfig& cfg, double advance_s) {
  std::vector<LogMelPatch> patches = frame_patches(w, cfg, advance_s);
  std::vector<DistillExample> out;
  out.reserve(patches.size());
  if (mode == MatchingMode::kGlobal) {
    const EmbeddingVector target = teacher.embed_clip(w, clip_id, cfg, advance_s);
    for (auto& p : patches) {
      p.clip_id = clip_id;
      out.push_back({std::move(p), target, clip_id});
    }
    return out;
  }
  for (auto& p : patches) {
    p.clip_id = clip_id;
    EmbeddingVector target = teacher.embed_patch(p);
    out.push_back({std::move(p), std::move(target), clip_id});
  }
  return out;
}

std::vector<DistillExample> make_targets(const Waveform& w, MatchingMode mode,
                                         const TeacherSpec& spec, const SpectrogramConfig& cfg,
                                         double advance_s) {
  const auto teacher = make_teacher(spec, cfg);
  return make_targets(w, "", mode, *teacher, cfg, advance_s);
}

template <typename Real>
double distill_loss_grad(std::span<const Real> pred, std::span<const Real> target,
                         LossKind kind, std::span<Real> grad) {
  const std::size_t n = pred.size();
  if (target.size() != n || (!grad.empty() && grad.size() != n)) {
    throw Error(ErrorKind::kShapeMismatch, "prediction and target lengths differ");
  }
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "empty embedding");
  const bool want = !grad.empty();
  if (kind == LossKind::kMse) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
      sum += d * d;
      if (want) grad[i] = static_cast<Real>(2.0 * d / static_cast<double>(n));
    }
    return sum / static_cast<double>(n);
  }
  double pp = 0.0, tt = 0.0, pt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = pred[i], t = target[i];
    pp += p * p;
    tt += t * t;
    pt += p * t;
  }
  if (pp == 0.0 || tt == 0.0) {
    throw Error(ErrorKind::kDegenerateInput, "cosine loss of a zero vector is undefined");
  }
  const double np = std::sqrt(pp), nt = std::sqrt(tt);
  const double cos = pt / (np * nt);
  if (want) {
    // d(1 - cos)/dp = -(t / (|p||t|) - cos * p / |p|^2)
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = static_cast<Real>(-(target[i] / (np * nt) - cos * pred[i] / pp));
    }
  }
  return std::max(0.0, 1.0 - cos);
}

template double distill_loss_grad<float>(std::span<const float>, std::span<const float>,
                                         LossKind, std::span<float>);
template double distill_loss_grad<double>(std::span<const double>, std::span<const double>,
                                          LossKind, std::span<double>);

double distill_loss(std::span<const float> pred, std::span<const float> target, LossKind kind) {
  return distill_loss_grad<float>(pred, target, kind, {});
}

double distill_loss(const EmbeddingVector& pred, const EmbeddingVector& target, LossKind kind) {
  return distill_loss(std::span<const float>(pred.values), std::span<const float>(target.values),
                      kind);
}

FixedExampleSource::FixedExampleSource(std::vector<DistillExample> examples)
    : examples_(std::move(examples)) {
  if (examples_.empty()) throw Error(ErrorKind::kInvalidInput, "no training examples");
  const std::size_t dim = examples_.front().target.size();
  for (const auto& e : examples_) {
    if (e.target.size() != dim) {
      throw Error(ErrorKind::kShapeMismatch, "training targets differ in length");
    }
  }
}

std::size_t FixedExampleSource::embedding_dim() const { return examples_.front().target.size(); }

void FixedExampleSource::draw(std::mt19937_64& rng, DistillExample& out) const {
  out = examples_[uniform_index(rng(), examples_.size())];
}

ClipCorpus::ClipCorpus(const std::vector<CorpusClip>& clips, const Teacher& teacher,
                       const SpectrogramConfig& cfg, MatchingMode mode, double global_advance_s)
    : teacher_(teacher), cfg_(cfg), mode_(mode), dim_(teacher.embedding_dim()) {
  cfg_.validate();
  if (clips.empty()) throw Error(ErrorKind::kInvalidInput, "distillation corpus is empty");
  patch_frames_ = cfg_.frames_per_patch();
  hop_ = cfg_.hop_samples();
  const LogMelFrontend frontend(cfg_);
  double sum = 0.0, sq = 0.0;
  std::size_t cells = 0;
  clips_.reserve(clips.size());
  for (const auto& c : clips) {
    if (c.waveform.sample_rate != cfg_.sample_rate) {
      throw Error(ErrorKind::kConfig, "clip '" + c.clip_id + "' has the wrong sample rate");
    }
    if (c.waveform.samples.empty()) {
      throw Error(ErrorKind::kInvalidInput, "clip '" + c.clip_id + "' is empty");
    }
    Entry e;
    e.clip_id = c.clip_id;
    const Waveform padded = pad_symmetric(c.waveform, cfg_.context_s);
    e.frames = frontend.frames(padded.samples, &e.num_frames);
    if (e.num_frames < patch_frames_) {
      throw Error(ErrorKind::kFraming, "clip '" + c.clip_id + "' shorter than one patch");
    }
    for (float v : e.frames) {
      sum += v;
      sq += static_cast<double>(v) * v;
    }
    cells += e.frames.size();
    if (mode_ == MatchingMode::kGlobal) {
      e.global_target = teacher_.embed_clip(c.waveform, c.clip_id, cfg_, global_advance_s);
    }
    clips_.push_back(std::move(e));
  }
  mean_ = sum / static_cast<double>(cells);
  const double var = sq / static_cast<double>(cells) - mean_ * mean_;
  std_ = var > 1e-12 ? std::sqrt(var) : 1.0;
}

std::size_t ClipCorpus::offsets(std::size_t clip) const {
  return clips_.at(clip).num_frames - patch_frames_ + 1;
}

LogMelPatch ClipCorpus::patch_at(std::size_t clip, std::size_t start_frame) const {
  const Entry& e = clips_.at(clip);
  if (start_frame + patch_frames_ > e.num_frames) {
    throw Error(ErrorKind::kFraming, "patch extends past the padded clip");
  }
  LogMelPatch p;
  p.num_frames = patch_frames_;
  p.num_bins = static_cast<std::size_t>(cfg_.num_mel_bins);
  const auto begin = e.frames.begin() + static_cast<std::ptrdiff_t>(start_frame * p.num_bins);
  p.values.assign(begin, begin + static_cast<std::ptrdiff_t>(patch_frames_ * p.num_bins));
  p.start_offset_s =
      static_cast<double>(start_frame * hop_) / static_cast<double>(cfg_.sample_rate);
  p.clip_id = e.clip_id;
  return p;
}

EmbeddingVector ClipCorpus::target_for(const Entry& e, const LogMelPatch& p) const {
  return mode_ == MatchingMode::kGlobal ? e.global_target : teacher_.embed_patch(p);
}

void ClipCorpus::draw(std::mt19937_64& rng, DistillExample& out) const {
  const std::size_t c = uniform_index(rng(), clips_.size());
  const std::size_t start = uniform_index(rng(), offsets(c));
  out.patch = patch_at(c, start);
  out.target = target_for(clips_[c], out.patch);
  out.clip_id = clips_[c].clip_id;
}

std::vector<DistillExample> ClipCorpus::probe_set(std::size_t max_clips) const {
  std::vector<DistillExample> out;
  const std::size_t n = std::min(max_clips, clips_.size());
  out.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    DistillExample ex;
    ex.patch = patch_at(c, 0);
    ex.target = target_for(clips_[c], ex.patch);
    ex.clip_id = clips_[c].clip_id;
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, std::size_t n) : kind_(kind) {
    if (kind_ != OptimizerKind::kSgd) m_.assign(n, 0.0f);
    if (kind_ == OptimizerKind::kAdam) v_.assign(n, 0.0f);
  }

  void step(std::vector<float>& p, const std::vector<float>& g, double lr) {
    ++t_;
    const std::size_t n = p.size();
    switch (kind_) {
      case OptimizerKind::kSgd: {
        const float a = static_cast<float>(lr);
        for (std::size_t i = 0; i < n; ++i) p[i] -= a * g[i];
        break;
      }
      case OptimizerKind::kSgdMomentum: {
        const float a = static_cast<float>(lr);
        for (std::size_t i = 0; i < n; ++i) {
          m_[i] = 0.9f * m_[i] + g[i];
          p[i] -= a * m_[i];
        }
        break;
      }
      case OptimizerKind::kAdam: {
        constexpr double b1 = 0.9, b2 = 0.999;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
        const float a = static_cast<float>(lr * std::sqrt(c2) / c1);
        const float eps = static_cast<float>(1e-8 * std::sqrt(c2));
        for (std::size_t i = 0; i < n; ++i) {
          m_[i] = 0.9f * m_[i] + 0.1f * g[i];
          v_[i] = 0.999f * v_[i] + 0.001f * g[i] * g[i];
          p[i] -= a * m_[i] / (std::sqrt(v_[i]) + eps);
        }
        break;
      }
    }
  }

 private:
  OptimizerKind kind_;
  std::vector<float> m_, v_;
  std::size_t t_ = 0;
};

double scheduled_lr(const TrainConfig& tc, std::size_t step) {
  if (!tc.cosine_schedule || tc.steps < 2) return tc.learning_rate;
  const double progress = static_cast<double>(step) / static_cast<double>(tc.steps - 1);
  const double shape = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return tc.learning_rate * (tc.lr_floor + (1.0 - tc.lr_floor) * shape);
}

}  // namespace

TrainResult train_student(const StudentModel& init, const ExampleSource& source,
                          const TrainConfig& tc, const TrainObserver& observer) {
  tc.validate();
  const StudentNetwork<float> net(init.config);
  if (init.parameters.size() != net.param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint does not match its student config");
  }
  if (source.embedding_dim() != init.config.embedding_dim) {
    std::ostringstream os;
    os << "teacher targets have dimension " << source.embedding_dim() << " but the student emits "
       << init.config.embedding_dim;
    throw Error(ErrorKind::kConfig, os.str());
  }
  TrainResult result{init, {}};
  result.loss_curve.reserve(tc.steps);
  std::vector<float>& params = result.model.parameters;
  std::vector<float> grad(params.size());
  std::vector<float> dy(init.config.embedding_dim);
  Optimizer opt(tc.optimizer, params.size());
  auto trace = net.make_trace();
  std::mt19937_64 rng(derive_seed(tc.seed, "distill-batches"));
  DistillExample ex;
  const float inv_batch = 1.0f / static_cast<float>(tc.batch_size);

  for (std::size_t step = 0; step < tc.steps; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    double loss = 0.0;
    for (std::size_t b = 0; b < tc.batch_size; ++b) {
      source.draw(rng, ex);
      const std::vector<float> y = net.forward(params, ex.patch, trace.get());
      loss += distill_loss_grad<float>(y, ex.target.values, tc.loss, dy);
      for (auto& v : dy) v *= inv_batch;
      net.backward(params, *trace, dy, grad);
    }
    loss /= static_cast<double>(tc.batch_size);
    if (!std::isfinite(loss)) {
      std::ostringstream os;
      os << "training loss became non-finite at step " << step;
      throw Error(ErrorKind::kDivergence, os.str());
    }
    result.loss_curve.push_back(loss);
    const double lr = scheduled_lr(tc, step);
    opt.step(params, grad, lr);
    if (tc.weight_decay > 0.0) {
      const auto keep = static_cast<float>(1.0 - lr * tc.weight_decay);
      for (float& p : params) p *= keep;
    }
    for (float p : params) {
      if (!std::isfinite(p)) {
        std::ostringstream os;
        os << "parameters became non-finite at step " << step;
        throw Error(ErrorKind::kDivergence, os.str());
      }
    }
    if (observer) observer(step, loss);
  }
  return result;
}

double evaluate_loss(const StudentModel& m, const std::vector<DistillExample>& examples,
                     LossKind kind) {
  if (examples.empty()) throw Error(ErrorKind::kInvalidInput, "no examples to evaluate");
  const StudentNetwork<float> net(m.config);
  double total = 0.0;
  for (const auto& ex : examples) {
    const std::vector<float> y = net.forward(m.parameters, ex.patch, nullptr);
    total += distill_loss_grad<float>(y, ex.target.values, kind, {});
  }
  return total / static_cast<double>(examples.size());
}

bool descends(const std::vector<double>& curve, std::size_t window) {
  if (window == 0 || curve.size() < 2 * window) return false;
  double lead = 0.0, trail = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    lead += curve[i];
    trail += curve[curve.size() - window + i];
  }
  return trail < lead;
}

}  // namespace embdistill
