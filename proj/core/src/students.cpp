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

#include "embdistill/students.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "embdistill/error.hpp"
#include "embdistill/random.hpp"
#include "nn.hpp"

namespace embdistill {

std::string to_string(StudentFamily family) {
  switch (family) {
    case StudentFamily::kConvResnetLike: return "conv-resnet-like";
    case StudentFamily::kConvScaledLike: return "conv-scaled-like";
    case StudentFamily::kAttentionLike: return "attention-like";
  }
  return "unknown";
}

StudentFamily student_family_from_string(const std::string& name) {
  if (name == "conv-resnet-like") return StudentFamily::kConvResnetLike;
  if (name == "conv-scaled-like") return StudentFamily::kConvScaledLike;
  if (name == "attention-like") return StudentFamily::kAttentionLike;
  throw Error(ErrorKind::kConfig, "unknown student family '" + name + "'");
}

void StudentConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfig, what); };
  if (depth < 1) fail("student depth must be >= 1");
  if (width < 1) fail("student width must be >= 1");
  if (embedding_dim < 1) fail("student embedding_dim must be >= 1");
  if (input_bins < 1) fail("student input_bins must be >= 1");
  if (!(input_std > 0.0)) fail("student input_std must be positive");
  if (family == StudentFamily::kAttentionLike) {
    if (patch_frames < 1 || patch_bins < 1) fail("attention tile must be non-empty");
    if (patch_bins > input_bins) fail("attention tile wider than the input");
    if (input_frames != 0 && patch_frames > input_frames) fail("attention tile longer than the input");
  }
}

bool operator==(const StudentConfig& a, const StudentConfig& b) {
  return a.family == b.family && a.depth == b.depth && a.width == b.width &&
         a.embedding_dim == b.embedding_dim && a.seed == b.seed &&
         a.input_bins == b.input_bins && a.input_frames == b.input_frames &&
         a.patch_frames == b.patch_frames && a.patch_bins == b.patch_bins &&
         a.input_mean == b.input_mean && a.input_std == b.input_std;
}

namespace {

std::size_t freq_tiles(const StudentConfig& cfg) { return cfg.input_bins / cfg.patch_bins; }

}  // namespace

std::size_t param_count(const StudentConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.width;
  const std::size_t f = cfg.input_bins;
  const std::size_t d = cfg.embedding_dim;
  const std::size_t head = w * d + d;
  switch (cfg.family) {
    case StudentFamily::kConvResnetLike: {
      const std::size_t stem = 3 * f * w + w;
      const std::size_t block = 2 * (3 * w * w + w);
      return stem + cfg.depth * block + head;
    }
    case StudentFamily::kConvScaledLike: {
      const std::size_t stem = 2 * f * w + w;
      const std::size_t block = (2 * w * w + 2 * w) + (5 * 2 * w + 2 * w) + (2 * w * w + w);
      return stem + cfg.depth * block + head;
    }
    case StudentFamily::kAttentionLike: {
      const std::size_t tile = cfg.patch_frames * cfg.patch_bins;
      const std::size_t embed = tile * w + w;
      const std::size_t attn = 2 * w + 4 * (w * w + w);
      const std::size_t mlp = 2 * w + (2 * w * w + 2 * w) + (2 * w * w + w);
      const std::size_t tiled_head = freq_tiles(cfg) * w * d + d;
      return embed + cfg.depth * (attn + mlp) + 2 * w + tiled_head;
    }
  }
  return 0;
}

double size_mb(std::size_t params) {
  return 4.0 * static_cast<double>(params) / (1024.0 * 1024.0);
}

template <typename Real>
struct StudentNetwork<Real>::Trace {
  nn::Tape<Real> tape;
};

template <typename Real>
struct StudentNetwork<Real>::Impl {
  nn::Sequential<Real> net;
};

namespace {

template <typename Real>
std::unique_ptr<nn::Sequential<Real>> seq() {
  return std::make_unique<nn::Sequential<Real>>();
}

template <typename Real>
void build(const StudentConfig& cfg, nn::Sequential<Real>& net) {
  using namespace nn;
  const std::size_t w = cfg.width;
  switch (cfg.family) {
    case StudentFamily::kConvResnetLike: {
      net.add(std::make_unique<Conv1d<Real>>(cfg.input_bins, w, 3, 2, false));
      net.add(std::make_unique<Silu<Real>>());
      for (std::size_t b = 0; b < cfg.depth; ++b) {
        auto body = seq<Real>();
        body->add(std::make_unique<Conv1d<Real>>(w, w, 3, 1, false));
        body->add(std::make_unique<Silu<Real>>());
        body->add(std::make_unique<Conv1d<Real>>(w, w, 3, 1, false));
        net.add(std::make_unique<Residual<Real>>(std::move(body)));
        net.add(std::make_unique<Silu<Real>>());
      }
      net.add(std::make_unique<MeanPool<Real>>());
      break;
    }
    case StudentFamily::kConvScaledLike: {
      net.add(std::make_unique<Conv1d<Real>>(cfg.input_bins, w, 2, 2, false));
      net.add(std::make_unique<Silu<Real>>());
      for (std::size_t b = 0; b < cfg.depth; ++b) {
        auto body = seq<Real>();
        body->add(std::make_unique<Dense<Real>>(w, 2 * w));
        body->add(std::make_unique<Silu<Real>>());
        body->add(std::make_unique<Conv1d<Real>>(2 * w, 2 * w, 5, 1, true));
        body->add(std::make_unique<Silu<Real>>());
        body->add(std::make_unique<Dense<Real>>(2 * w, w));
        net.add(std::make_unique<Residual<Real>>(std::move(body)));
      }
      net.add(std::make_unique<MeanPool<Real>>());
      break;
    }
    case StudentFamily::kAttentionLike: {
      net.add(std::make_unique<PatchEmbed<Real>>(cfg.patch_frames, cfg.patch_bins, w));
      for (std::size_t b = 0; b < cfg.depth; ++b) {
        auto attn = seq<Real>();
        attn->add(std::make_unique<LayerNorm<Real>>(w));
        attn->add(std::make_unique<SelfAttention<Real>>(w));
        net.add(std::make_unique<Residual<Real>>(std::move(attn)));
        auto mlp = seq<Real>();
        mlp->add(std::make_unique<LayerNorm<Real>>(w));
        mlp->add(std::make_unique<Dense<Real>>(w, 2 * w));
        mlp->add(std::make_unique<Silu<Real>>());
        mlp->add(std::make_unique<Dense<Real>>(2 * w, w));
        net.add(std::make_unique<Residual<Real>>(std::move(mlp)));
      }
      net.add(std::make_unique<LayerNorm<Real>>(w));
      // Pool over time only; frequency tiles stay separate.
      net.add(std::make_unique<MeanPool<Real>>(freq_tiles(cfg)));
      net.add(std::make_unique<Dense<Real>>(freq_tiles(cfg) * w, cfg.embedding_dim));
      return;
    }
  }
  net.add(std::make_unique<Dense<Real>>(w, cfg.embedding_dim));
}

}  // namespace

template <typename Real>
StudentNetwork<Real>::StudentNetwork(const StudentConfig& cfg)
    : cfg_(cfg), impl_(std::make_unique<Impl>()) {
  cfg_.validate();
  build(cfg_, impl_->net);
}

template <typename Real>
StudentNetwork<Real>::~StudentNetwork() = default;
template <typename Real>
StudentNetwork<Real>::StudentNetwork(StudentNetwork&&) noexcept = default;
template <typename Real>
StudentNetwork<Real>& StudentNetwork<Real>::operator=(StudentNetwork&&) noexcept = default;

template <typename Real>
std::size_t StudentNetwork<Real>::param_count() const {
  return impl_->net.param_count();
}

template <typename Real>
void StudentNetwork<Real>::init(std::span<Real> params) const {
  if (params.size() != param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "parameter vector has the wrong length");
  }
  std::mt19937_64 rng(derive_seed(cfg_.seed, "student-init"));
  impl_->net.init(params.data(), rng);
}

template <typename Real>
std::shared_ptr<typename StudentNetwork<Real>::Trace> StudentNetwork<Real>::make_trace() const {
  return std::make_shared<Trace>();
}

template <typename Real>
std::vector<Real> StudentNetwork<Real>::forward(std::span<const Real> params,
                                                const LogMelPatch& patch, Trace* trace) const {
  if (params.size() != param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "parameter vector has the wrong length");
  }
  if (patch.num_bins != cfg_.input_bins ||
      (cfg_.input_frames != 0 && patch.num_frames != cfg_.input_frames) ||
      patch.values.size() != patch.num_frames * patch.num_bins) {
    std::ostringstream os;
    os << "student expects " << cfg_.input_frames << "x" << cfg_.input_bins
       << " patches, got " << patch.num_frames << "x" << patch.num_bins;
    throw Error(ErrorKind::kShapeMismatch, os.str());
  }
  if (cfg_.family == StudentFamily::kAttentionLike && patch.num_frames < cfg_.patch_frames) {
    throw Error(ErrorKind::kShapeMismatch, "patch shorter than one attention tile");
  }
  nn::Seq<Real> x(patch.num_frames, patch.num_bins);
  const Real mean = static_cast<Real>(cfg_.input_mean);
  const Real inv_std = static_cast<Real>(1.0 / cfg_.input_std);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    x.v[i] = (static_cast<Real>(patch.values[i]) - mean) * inv_std;
  }
  nn::Tape<Real> local;
  nn::Tape<Real>& tape = trace != nullptr ? trace->tape : local;
  tape = {};
  nn::Seq<Real> y = impl_->net.forward(params.data(), std::move(x), tape);
  return std::move(y.v);
}

template <typename Real>
void StudentNetwork<Real>::backward(std::span<const Real> params, const Trace& trace,
                                    std::span<const Real> grad_out,
                                    std::span<Real> grad) const {
  if (grad_out.size() != cfg_.embedding_dim) {
    throw Error(ErrorKind::kShapeMismatch, "output cotangent has the wrong length");
  }
  if (grad.size() != param_count() || params.size() != param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "gradient vector has the wrong length");
  }
  nn::Seq<Real> dy(1, cfg_.embedding_dim);
  std::copy(grad_out.begin(), grad_out.end(), dy.v.begin());
  impl_->net.backward(params.data(), trace.tape, std::move(dy), grad.data(), false);
}

template class StudentNetwork<float>;
template class StudentNetwork<double>;

StudentModel init_student(const StudentConfig& cfg,
                          std::optional<std::size_t> run_embedding_dim) {
  if (run_embedding_dim && *run_embedding_dim != cfg.embedding_dim) {
    std::ostringstream os;
    os << "student embedding_dim " << cfg.embedding_dim << " does not match run dimension "
       << *run_embedding_dim;
    throw Error(ErrorKind::kConfig, os.str());
  }
  StudentNetwork<float> net(cfg);
  StudentModel m{cfg, std::vector<float>(net.param_count())};
  net.init(m.parameters);
  return m;
}

EmbeddingVector student_forward(const StudentModel& m, const LogMelPatch& p) {
  StudentNetwork<float> net(m.config);
  return EmbeddingVector{net.forward(m.parameters, p, nullptr)};
}

std::vector<float> student_backward(const StudentModel& m, const LogMelPatch& p,
                                    const EmbeddingVector& grad_out) {
  StudentNetwork<float> net(m.config);
  auto trace = net.make_trace();
  net.forward(m.parameters, p, trace.get());
  std::vector<float> grad(net.param_count(), 0.0f);
  net.backward(m.parameters, *trace, grad_out.values, grad);
  return grad;
}

std::vector<StudentConfig> desk_ladder(std::size_t embedding_dim, std::uint64_t seed) {
  auto rung = [&](StudentFamily family, std::size_t depth, std::size_t width) {
    StudentConfig c;
    c.family = family;
    c.depth = depth;
    c.width = width;
    c.embedding_dim = embedding_dim;
    c.seed = seed;
    return c;
  };
  return {
      rung(StudentFamily::kConvResnetLike, 1, 16),
      rung(StudentFamily::kConvScaledLike, 2, 24),
      rung(StudentFamily::kConvScaledLike, 3, 24),
      rung(StudentFamily::kAttentionLike, 1, 32),
      rung(StudentFamily::kAttentionLike, 2, 48),
  };
}

}  // namespace embdistill
