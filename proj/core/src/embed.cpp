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

#include "embdistill/embed.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "embdistill/cache.hpp"
#include "embdistill/error.hpp"
#include "embdistill/io.hpp"
#include "embdistill/parallel.hpp"

namespace embdistill {

namespace {

EmbeddingVector mean_of(const std::vector<std::vector<float>>& outs, std::size_t dim) {
  std::vector<double> acc(dim, 0.0);
  for (const auto& y : outs) {
    for (std::size_t d = 0; d < dim; ++d) acc[d] += y[d];
  }
  EmbeddingVector e;
  e.values.resize(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    e.values[d] = static_cast<float>(acc[d] / static_cast<double>(outs.size()));
  }
  return e;
}

std::string fingerprint_of(const nlohmann::json& j) { return sha256_hex(j.dump()); }

}  // namespace

EmbeddingVector student_embed_clip(const StudentModel& m, const Waveform& w,
                                   const SpectrogramConfig& cfg, double advance_s) {
  return StudentEmbedder("", m, cfg).embed(w, "", advance_s);
}

StudentEmbedder::StudentEmbedder(std::string model_id, StudentModel model, SpectrogramConfig cfg)
    : id_(std::move(model_id)),
      model_(std::move(model)),
      cfg_(cfg),
      digest_(checkpoint_digest(model_)),
      net_(std::make_unique<StudentNetwork<float>>(model_.config)) {
  cfg_.validate();
  if (model_.parameters.size() != net_->param_count()) {
    throw Error(ErrorKind::kShapeMismatch, "parameters do not match the student config");
  }
}

StudentEmbedder::~StudentEmbedder() = default;

std::string StudentEmbedder::fingerprint(double advance_s) const {
  return fingerprint_of({{"kind", "student"},
                         {"parameters_sha256", digest_},
                         {"student", to_json(model_.config)},
                         {"frontend", to_json(cfg_)},
                         {"advance_s", advance_s}});
}

EmbeddingVector StudentEmbedder::embed(const Waveform& w, const std::string& clip_id,
                                       double advance_s) const {
  (void)clip_id;
  const std::vector<LogMelPatch> patches = frame_patches(w, cfg_, advance_s);
  std::vector<std::vector<float>> outs;
  outs.reserve(patches.size());
  for (const auto& p : patches) outs.push_back(net_->forward(model_.parameters, p, nullptr));
  return mean_of(outs, model_.config.embedding_dim);
}

TeacherEmbedder::TeacherEmbedder(std::string model_id, const TeacherSpec& spec,
                                 SpectrogramConfig cfg)
    : id_(std::move(model_id)), spec_(spec), cfg_(cfg), teacher_(make_teacher(spec, cfg)) {}

std::string TeacherEmbedder::fingerprint(double advance_s) const {
  return fingerprint_of({{"kind", "teacher"},
                         {"teacher", to_json(spec_)},
                         {"frontend", to_json(cfg_)},
                         {"advance_s", advance_s}});
}

EmbeddingVector TeacherEmbedder::embed(const Waveform& w, const std::string& clip_id,
                                       double advance_s) const {
  return teacher_->embed_clip(w, clip_id, cfg_, advance_s);
}

LabeledEmbeddings embed_clips(const ClipEmbedder& e, const std::vector<const LoadedClip*>& clips,
                              double advance_s, EmbeddingCache* cache,
                              const std::string& cache_key) {
  if (!(advance_s > 0.0)) throw Error(ErrorKind::kConfig, "frame advance must be positive");
  if (clips.empty()) throw Error(ErrorKind::kInvalidInput, "no clips to embed");
  const std::size_t dim = e.embedding_dim();
  LabeledEmbeddings out;
  out.dim = dim;
  out.labels.reserve(clips.size());
  std::vector<std::string> ids;
  ids.reserve(clips.size());
  for (const auto* c : clips) {
    out.labels.push_back(c->label);
    ids.push_back(c->clip_id);
  }
  std::string fp;
  if (cache != nullptr) {
    fp = e.fingerprint(advance_s);
    if (auto hit = cache->lookup(e.model_id(), cache_key, fp, ids); hit && hit->dim == dim) {
      out.rows = std::move(hit->rows);
      return out;
    }
  }
  out.rows.assign(clips.size() * dim, 0.0f);
  parallel_for(clips.size(), [&](std::size_t i) {
    const EmbeddingVector v = e.embed(clips[i]->waveform, clips[i]->clip_id, advance_s);
    if (v.size() != dim) throw Error(ErrorKind::kShapeMismatch, "embedding has the wrong length");
    std::copy(v.values.begin(), v.values.end(), out.rows.begin() + static_cast<std::ptrdiff_t>(i * dim));
  });
  if (cache != nullptr) cache->store(e.model_id(), cache_key, fp, {dim, std::move(ids), out.rows});
  return out;
}

SplitEmbeddings embed_task(const ClipEmbedder& e, const TaskData& task, double advance_s,
                           EmbeddingCache* cache, bool include_test) {
  auto one = [&](Split s) {
    const auto clips = task.split(s);
    if (clips.empty()) {
      throw Error(ErrorKind::kManifest,
                  "task '" + task.task.name + "' has an empty '" + to_string(s) + "' split");
    }
    return embed_clips(e, clips, advance_s, cache, task.task.name + "." + to_string(s));
  };
  SplitEmbeddings out;
  out.train = one(Split::kTrain);
  out.dev = one(Split::kDev);
  if (include_test) out.test = one(Split::kTest);
  return out;
}

std::vector<SweepRow> sweep_frame_advance(const ClipEmbedder& e, const TaskData& task,
                                          const std::vector<double>& advances,
                                          std::uint64_t seed, EmbeddingCache* cache) {
  if (advances.empty()) throw Error(ErrorKind::kConfig, "no frame advances to sweep");
  for (double a : advances) {
    if (!(a > 0.0)) throw Error(ErrorKind::kConfig, "frame advances must be positive");
  }
  std::vector<SweepRow> rows;
  rows.reserve(advances.size());
  for (double a : advances) {
    const SplitEmbeddings emb = embed_task(e, task, a, cache, /*include_test=*/false);
    const DevSelection sel = select_on_dev(emb.train, emb.dev, task.task, seed);
    std::size_t best = 0;
    while (sel.variants[best] != sel.best) ++best;
    rows.push_back({a, sel.dev[best].metric, sel.best});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "advance,dev_metric,probe_type\n";
  for (const auto& r : rows) os << r.advance_s << "," << r.dev_metric << "," << to_string(r.probe) << "\n";
  return os.str();
}

}  // namespace embdistill
