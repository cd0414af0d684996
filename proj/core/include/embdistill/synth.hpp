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

#ifndef EMBDISTILL_SYNTH_HPP_
#define EMBDISTILL_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "embdistill/dataset.hpp"
#include "embdistill/frontend.hpp"
#include "embdistill/teacher.hpp"

namespace embdistill {

struct Tone {
  double freq_hz = 440.0;
  double amplitude = 0.1;
};

// Everything needed to render one synthetic clip.
struct ClipRecipe {
  double duration_s = 2.0;
  std::vector<Tone> tones;
  double noise_amplitude = 0.01;
  // One-pole smoothing of the noise in [0, 1): 0 is white, larger is darker.
  double noise_color = 0.0;
  double am_rate_hz = 0.0;
  double am_depth = 0.0;
  // Always-present floor so no log-mel cell sits at the log floor.
  double floor_amplitude = 1e-3;
  std::uint64_t seed = 0;
};

// Renders and quantizes to 16-bit levels, so the in-memory clip equals its
// WAV round trip.
Waveform render_clip(const ClipRecipe& r, int sample_rate);

enum class SynthTaskKind {
  kPitchBand,    // binary: main tone above 1 kHz
  kTonality,     // binary: tone-to-noise ratio above 0 dB
  kRegion,       // 4 classes: log-frequency band of the main tone
  kLoudness,     // binary: level above the midpoint
  kTeacherSign,  // binary: sign of a synthetic-teacher coordinate
  kHighPitch,    // binary: main tone above 4 kHz, tones confined to 2-7 kHz
};

std::string to_string(SynthTaskKind k);
SynthTaskKind synth_task_kind_from_string(const std::string& name);

struct SynthTaskSpec {
  std::string name;
  SynthTaskKind kind = SynthTaskKind::kPitchBand;
  SelectionMetric metric = SelectionMetric::kAccuracy;
  std::size_t train = 160;
  std::size_t dev = 80;
  std::size_t test = 160;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  double min_duration_s = 1.0;
  double max_duration_s = 8.0;
  // Masking difficulty; larger values make class evidence noisier.
  double difficulty = 1.0;
  std::vector<SynthTaskSpec> tasks;
  std::size_t corpus_clips = 300;
  // Used only to label kTeacherSign tasks.
  TeacherSpec teacher;
  SpectrogramConfig frontend;
};

// The four benchmark tasks keyed to teacher-visible features.
std::vector<SynthTaskSpec> default_synth_tasks();

// Generates one labelled task. Clip seeds derive from (cfg.seed, task name),
// so a task is identical whichever other tasks are generated with it.
TaskData make_synth_task(const SynthConfig& cfg, const SynthTaskSpec& spec);

// Distillation corpora. "broad" spans 100 Hz - 7 kHz; "low" stays below
// 1.5 kHz and "high" above 2 kHz.
std::vector<LoadedClip> make_synth_corpus(const SynthConfig& cfg, const std::string& source_tag,
                                          std::size_t count);

// Writes clips as WAV files plus one JSON Lines manifest per task and corpus
// under out_dir. Returns the manifest paths.
std::vector<std::filesystem::path> write_synth_benchmark(const SynthConfig& cfg,
                                                         const std::filesystem::path& out_dir);

}  // namespace embdistill

#endif  // EMBDISTILL_SYNTH_HPP_
