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

// Log-mel frontend: symmetric padding, STFT magnitudes, HTK mel filterbank,
// and framing of a clip into fixed-length context windows.

#ifndef EMBDISTILL_FRONTEND_HPP_
#define EMBDISTILL_FRONTEND_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace embdistill {

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

struct SpectrogramConfig {
  int sample_rate = 16000;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int num_mel_bins = 80;
  double fmin_hz = 125.0;
  double fmax_hz = 7500.0;
  double context_s = 2.0;
  double log_floor = 1e-6;

  // Throws Error(kConfig) when an invariant is violated.
  void validate() const;

  std::size_t window_samples() const;
  std::size_t hop_samples() const;
  std::size_t context_samples() const;
  // Smallest power of two holding one window.
  std::size_t fft_size() const;
  // floor((context_samples - window_samples) / hop_samples) + 1
  std::size_t frames_per_patch() const;
};

bool operator==(const SpectrogramConfig& a, const SpectrogramConfig& b);

// Row-major num_frames x num_bins matrix of log mel energies.
struct LogMelPatch {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  std::vector<float> values;
  double start_offset_s = 0.0;
  // Identifies the source clip; used by precomputed teachers as a lookup key.
  std::string clip_id;

  float at(std::size_t frame, std::size_t bin) const {
    return values[frame * num_bins + bin];
  }
  float& at(std::size_t frame, std::size_t bin) {
    return values[frame * num_bins + bin];
  }
};

struct FramingPlan {
  double frame_advance_s = 0.0;
  std::size_t advance_samples = 0;
  // Start sample of each patch within the padded clip.
  std::vector<std::size_t> patch_offsets;
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);
// Center frequency (Hz) of every mel filter, low to high.
std::vector<double> mel_bin_centers_hz(const SpectrogramConfig& cfg);

// Reflect-pads w to ceil(target_s * rate) samples, splitting the deficit
// between the start (floor half) and the end (ceil half). Clips already long
// enough are returned unchanged.
Waveform pad_symmetric(const Waveform& w, double target_s);

// Log-mel patch of a waveform spanning exactly cfg.context_s.
LogMelPatch compute_log_mel(const Waveform& w, const SpectrogramConfig& cfg);

// Patch start offsets over a padded clip of padded_samples samples.
// advance_s is rounded to the nearest whole sample.
FramingPlan plan_frames(std::size_t padded_samples, const SpectrogramConfig& cfg,
                        double advance_s);

// Pads w to at least the context length and cuts one patch per offset
// 0, advance, 2*advance, ... that fits inside the padded clip.
std::vector<LogMelPatch> frame_patches(const Waveform& w, const SpectrogramConfig& cfg,
                                       double advance_s);

// Reusable STFT + filterbank state for one config. Immutable after
// construction, so one instance may be shared across threads.
class LogMelFrontend {
 public:
  explicit LogMelFrontend(const SpectrogramConfig& cfg);

  const SpectrogramConfig& config() const { return cfg_; }

  // Log-mel rows for every full window in samples, at hop spacing starting
  // at sample 0. Row r depends only on samples [r*hop, r*hop + window).
  std::vector<float> frames(std::span<const float> samples, std::size_t* num_frames) const;

  // One patch from samples [offset, offset + context).
  LogMelPatch patch(std::span<const float> samples, std::size_t offset) const;

 private:
  void frame_into(const float* frame, float* out, std::vector<float>& fft_in,
                  std::vector<float>& fft_out) const;

  SpectrogramConfig cfg_;
  std::size_t window_ = 0;
  std::size_t hop_ = 0;
  std::size_t fft_size_ = 0;
  std::vector<float> hann_;
  // Sparse filterbank: for mel bin m, weights over FFT bins
  // [filter_begin_[m], filter_begin_[m] + filter_weights_[m].size()).
  std::vector<std::size_t> filter_begin_;
  std::vector<std::vector<float>> filter_weights_;
  void* plan_ = nullptr;
};

}  // namespace embdistill

#endif  // EMBDISTILL_FRONTEND_HPP_
