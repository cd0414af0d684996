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

#include "embdistill/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embdistill/error.hpp"
#include "embdistill/io.hpp"
#include "embdistill/random.hpp"

namespace embdistill {
namespace fs = std::filesystem;

namespace {

// Library-independent variates so corpora are identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double unit() { return uniform_unit(gen_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::size_t index(std::size_t n) { return uniform_index(gen_(), n); }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    do {
      u = unit();
    } while (u <= 0.0);
    const double v = unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * v);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

constexpr double kPitchSplitHz = 1000.0;
constexpr double kHighSplitHz = 4000.0;
// Log-spaced band edges for the region task.
constexpr double kRegionEdges[] = {150.0, 375.0, 950.0, 2400.0, 6000.0};

void nuisance(Rng& rng, const SynthConfig& cfg, ClipRecipe& r, double main_amp) {
  r.duration_s = rng.uniform(cfg.min_duration_s, cfg.max_duration_s);
  r.noise_amplitude = main_amp * rng.uniform(0.02, 0.3) * cfg.difficulty;
  r.noise_color = rng.uniform(0.0, 0.9);
  if (rng.unit() < 0.5) {
    r.am_rate_hz = rng.uniform(0.5, 6.0);
    r.am_depth = rng.uniform(0.0, 0.8);
  }
}

void add_distractor(Rng& rng, const SynthConfig& cfg, ClipRecipe& r, double main_amp) {
  r.tones.push_back({rng.log_uniform(100.0, 7000.0),
                     main_amp * rng.uniform(0.0, 0.7) * cfg.difficulty});
}

// Returns the recipe and its label for one task clip.
std::pair<ClipRecipe, int> task_recipe(SynthTaskKind kind, const SynthConfig& cfg, Rng& rng) {
  ClipRecipe r;
  const double amp = rng.log_uniform(0.02, 0.3);
  int label = 0;
  switch (kind) {
    case SynthTaskKind::kPitchBand:
    case SynthTaskKind::kTeacherSign: {
      const double f = rng.log_uniform(250.0, 4000.0);
      r.tones.push_back({f, amp});
      add_distractor(rng, cfg, r, amp);
      nuisance(rng, cfg, r, amp);
      label = f > kPitchSplitHz ? 1 : 0;
      break;
    }
    case SynthTaskKind::kHighPitch: {
      const double f = rng.log_uniform(2000.0, 7000.0);
      r.tones.push_back({f, amp});
      r.tones.push_back({rng.log_uniform(2000.0, 7000.0), amp * rng.uniform(0.0, 0.5)});
      nuisance(rng, cfg, r, amp);
      label = f > kHighSplitHz ? 1 : 0;
      break;
    }
    case SynthTaskKind::kRegion: {
      const double f = rng.log_uniform(kRegionEdges[0], kRegionEdges[4]);
      r.tones.push_back({f, amp});
      add_distractor(rng, cfg, r, amp);
      nuisance(rng, cfg, r, amp);
      label = 0;
      while (label < 3 && f >= kRegionEdges[label + 1]) ++label;
      break;
    }
    case SynthTaskKind::kTonality: {
      const double tnr_db = rng.uniform(-12.0, 12.0);
      const std::size_t n = 1 + rng.index(3);
      for (std::size_t i = 0; i < n; ++i) {
        r.tones.push_back({rng.log_uniform(150.0, 6000.0), amp / std::sqrt(static_cast<double>(n))});
      }
      nuisance(rng, cfg, r, amp);
      r.noise_amplitude = amp * std::pow(10.0, -tnr_db / 20.0);
      label = tnr_db > 0.0 ? 1 : 0;
      break;
    }
    case SynthTaskKind::kLoudness: {
      const double level_db = rng.uniform(-42.0, -12.0);
      const double a = std::pow(10.0, level_db / 20.0);
      const double tonal = rng.unit();
      r.tones.push_back({rng.log_uniform(150.0, 6000.0), a * tonal});
      nuisance(rng, cfg, r, a);
      r.noise_amplitude = a * (1.0 - tonal) + a * 0.05;
      label = level_db > -27.0 ? 1 : 0;
      break;
    }
  }
  return {r, label};
}

std::size_t num_classes(SynthTaskKind kind) { return kind == SynthTaskKind::kRegion ? 4 : 2; }

std::vector<std::string> class_names(SynthTaskKind kind) {
  switch (kind) {
    case SynthTaskKind::kPitchBand: return {"low", "high"};
    case SynthTaskKind::kHighPitch: return {"below-4k", "above-4k"};
    case SynthTaskKind::kTonality: return {"noisy", "tonal"};
    case SynthTaskKind::kRegion: return {"band0", "band1", "band2", "band3"};
    case SynthTaskKind::kLoudness: return {"quiet", "loud"};
    case SynthTaskKind::kTeacherSign: return {"negative", "positive"};
  }
  return {};
}

}  // namespace

Waveform render_clip(const ClipRecipe& r, int sample_rate) {
  if (!(r.duration_s > 0.0)) throw Error(ErrorKind::kInvalidInput, "clip duration must be positive");
  Rng rng(derive_seed(r.seed, "render"));
  const auto n = static_cast<std::size_t>(std::llround(r.duration_s * sample_rate));
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(std::max<std::size_t>(n, 1), 0.0f);
  std::vector<double> phase(r.tones.size());
  for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double am_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double c = std::clamp(r.noise_color, 0.0, 0.999);
  // Restores unit variance after one-pole smoothing.
  const double color_gain = std::sqrt((1.0 + c) / (1.0 - c));
  double smooth = 0.0;
  const double dt = 1.0 / sample_rate;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    double x = 0.0;
    for (std::size_t k = 0; k < r.tones.size(); ++k) {
      x += r.tones[k].amplitude * std::sin(2.0 * std::numbers::pi * r.tones[k].freq_hz * t + phase[k]);
    }
    if (r.am_depth > 0.0) {
      x *= 1.0 - r.am_depth * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * r.am_rate_hz * t + am_phase));
    }
    smooth = c * smooth + (1.0 - c) * rng.normal();
    x += r.noise_amplitude * color_gain * smooth;
    x += r.floor_amplitude * rng.normal();
    w.samples[i] = static_cast<float>(x);
  }
  quantize_pcm16(w);
  return w;
}

std::string to_string(SynthTaskKind k) {
  switch (k) {
    case SynthTaskKind::kPitchBand: return "pitch-band";
    case SynthTaskKind::kTonality: return "tonality";
    case SynthTaskKind::kRegion: return "region";
    case SynthTaskKind::kLoudness: return "loudness";
    case SynthTaskKind::kTeacherSign: return "teacher-sign";
    case SynthTaskKind::kHighPitch: return "high-pitch";
  }
  return "unknown";
}

SynthTaskKind synth_task_kind_from_string(const std::string& name) {
  for (auto k : {SynthTaskKind::kPitchBand, SynthTaskKind::kTonality, SynthTaskKind::kRegion,
                 SynthTaskKind::kLoudness, SynthTaskKind::kTeacherSign, SynthTaskKind::kHighPitch}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::kConfig, "unknown synthetic task '" + name + "'");
}

std::vector<SynthTaskSpec> default_synth_tasks() {
  return {
      {"pitch-band", SynthTaskKind::kPitchBand, SelectionMetric::kAccuracy},
      {"tonality", SynthTaskKind::kTonality, SelectionMetric::kEer},
      {"region", SynthTaskKind::kRegion, SelectionMetric::kAccuracy},
      {"loudness", SynthTaskKind::kLoudness, SelectionMetric::kAccuracy},
  };
}

TaskData make_synth_task(const SynthConfig& cfg, const SynthTaskSpec& spec) {
  if (!(cfg.min_duration_s > 0.0 && cfg.max_duration_s >= cfg.min_duration_s)) {
    throw Error(ErrorKind::kConfig, "synthetic durations must satisfy 0 < min <= max");
  }
  if (spec.train == 0 || spec.dev == 0 || spec.test == 0) {
    throw Error(ErrorKind::kConfig, "every synthetic split needs at least one clip");
  }
  if (spec.metric == SelectionMetric::kEer && num_classes(spec.kind) != 2) {
    throw Error(ErrorKind::kConfig, "EER tasks must be binary");
  }
  TaskData d;
  d.task = {spec.name, spec.metric, num_classes(spec.kind)};
  d.classes = class_names(spec.kind);
  std::unique_ptr<Teacher> teacher;
  if (spec.kind == SynthTaskKind::kTeacherSign) {
    SpectrogramConfig fe = cfg.frontend;
    fe.sample_rate = cfg.sample_rate;
    teacher = make_teacher(cfg.teacher, fe);
  }
  const std::uint64_t task_seed = derive_seed(cfg.seed, spec.name);
  const std::size_t total = spec.train + spec.dev + spec.test;
  d.clips.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Split split = i < spec.train ? Split::kTrain
                        : i < spec.train + spec.dev ? Split::kDev
                                                    : Split::kTest;
    const std::uint64_t clip_seed = derive_seed(task_seed, static_cast<std::uint64_t>(i));
    Rng rng(clip_seed);
    auto [recipe, label] = task_recipe(spec.kind, cfg, rng);
    recipe.seed = clip_seed;
    LoadedClip clip;
    std::ostringstream id;
    id << spec.name << "-" << to_string(split) << "-" << i;
    clip.clip_id = id.str();
    clip.waveform = render_clip(recipe, cfg.sample_rate);
    if (teacher) {
      SpectrogramConfig fe = cfg.frontend;
      fe.sample_rate = cfg.sample_rate;
      const EmbeddingVector e = teacher->embed_clip(clip.waveform, clip.clip_id, fe, 2.0);
      label = e.values.at(0) > 0.0f ? 1 : 0;
    }
    clip.label = label;
    clip.split = split;
    clip.source_tag = "synth";
    d.clips.push_back(std::move(clip));
  }
  return d;
}

std::vector<LoadedClip> make_synth_corpus(const SynthConfig& cfg, const std::string& source_tag,
                                          std::size_t count) {
  static const SynthTaskKind kBroad[] = {SynthTaskKind::kPitchBand, SynthTaskKind::kTonality,
                                         SynthTaskKind::kRegion, SynthTaskKind::kLoudness};
  if (source_tag != "broad" && source_tag != "low" && source_tag != "high") {
    throw Error(ErrorKind::kConfig, "unknown corpus '" + source_tag + "' (broad|low|high)");
  }
  const std::uint64_t corpus_seed = derive_seed(cfg.seed, "corpus-" + source_tag);
  std::vector<LoadedClip> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t clip_seed = derive_seed(corpus_seed, static_cast<std::uint64_t>(i));
    Rng rng(clip_seed);
    ClipRecipe r;
    if (source_tag == "broad") {
      r = task_recipe(kBroad[rng.index(4)], cfg, rng).first;
    } else {
      const bool low = source_tag == "low";
      const double lo = low ? 100.0 : 2000.0;
      const double hi = low ? 1500.0 : 7000.0;
      const double amp = rng.log_uniform(0.02, 0.3);
      const std::size_t n = 1 + rng.index(3);
      for (std::size_t k = 0; k < n; ++k) {
        r.tones.push_back({rng.log_uniform(lo, hi), amp * rng.uniform(0.3, 1.0)});
      }
      nuisance(rng, cfg, r, amp);
      // Dark noise keeps the low corpus free of high-band energy.
      if (low) r.noise_color = rng.uniform(0.85, 0.95);
    }
    r.seed = clip_seed;
    LoadedClip clip;
    clip.clip_id = "corpus-" + source_tag + "-" + std::to_string(i);
    clip.waveform = render_clip(r, cfg.sample_rate);
    clip.source_tag = source_tag;
    out.push_back(std::move(clip));
  }
  return out;
}

std::vector<fs::path> write_synth_benchmark(const SynthConfig& cfg, const fs::path& out_dir) {
  std::vector<fs::path> manifests;
  auto write_set = [&](const std::string& name, const std::vector<LoadedClip>& clips,
                       DatasetManifest m) {
    for (const auto& c : clips) {
      const std::string rel = "audio/" + name + "/" + c.clip_id + ".wav";
      write_wav(out_dir / rel, c.waveform);
      m.rows.push_back({c.clip_id, rel, c.label, c.split, c.source_tag});
    }
    const fs::path path = out_dir / (name + ".jsonl");
    write_text(path, manifest_to_jsonl(m));
    manifests.push_back(path);
  };
  for (const auto& spec : cfg.tasks) {
    TaskData d = make_synth_task(cfg, spec);
    DatasetManifest m;
    m.task = d.task;
    m.classes = d.classes;
    write_set(spec.name, d.clips, std::move(m));
  }
  for (const std::string tag : {"broad", "low", "high"}) {
    DatasetManifest m;
    m.corpus = tag;
    write_set("corpus-" + tag, make_synth_corpus(cfg, tag, cfg.corpus_clips), std::move(m));
  }
  nlohmann::json meta = {{"seed", cfg.seed},
                         {"sample_rate", cfg.sample_rate},
                         {"min_duration_s", cfg.min_duration_s},
                         {"max_duration_s", cfg.max_duration_s},
                         {"difficulty", cfg.difficulty},
                         {"corpus_clips", cfg.corpus_clips},
                         {"tasks", nlohmann::json::array()}};
  for (const auto& t : cfg.tasks) {
    meta["tasks"].push_back({{"name", t.name}, {"kind", to_string(t.kind)},
                             {"metric", to_string(t.metric)}, {"train", t.train},
                             {"dev", t.dev}, {"test", t.test}});
  }
  write_text(out_dir / "synth.json", meta.dump(2) + "\n");
  return manifests;
}

}  // namespace embdistill
