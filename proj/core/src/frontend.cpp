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

#include "embdistill/frontend.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "embdistill/error.hpp"

namespace embdistill {
namespace {

std::size_t samples_for(double seconds, int rate) {
  // Guard against representation error in e.g. 2.0 * 16000.
  return static_cast<std::size_t>(std::ceil(seconds * rate - 1e-9));
}

// FFTW planning is not thread-safe; plans are created once per size under a
// lock and executed through the new-array interface afterwards.
fftwf_plan plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftwf_plan> plans;
  std::lock_guard lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::vector<float> in(n);
  std::vector<fftwf_complex> out(n / 2 + 1);
  fftwf_plan p = fftwf_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(n, p);
  return p;
}

// Index of a sample reflected back into [0, n), period 2(n-1).
std::size_t reflect_index(long long i, long long n) {
  if (n == 1) return 0;
  const long long period = 2 * (n - 1);
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= n) m = period - m;
  return static_cast<std::size_t>(m);
}

}  // namespace

void SpectrogramConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kConfig, what); };
  if (sample_rate <= 0) fail("sample_rate must be positive");
  if (!(hop_ms > 0.0)) fail("hop_ms must be positive");
  if (window_ms < hop_ms) fail("window_ms must be >= hop_ms");
  if (num_mel_bins < 1) fail("num_mel_bins must be >= 1");
  if (!(context_s > 0.0)) fail("context_s must be positive");
  if (!(log_floor > 0.0)) fail("log_floor must be positive");
  if (!(fmin_hz > 0.0) || !(fmin_hz < fmax_hz)) fail("require 0 < fmin_hz < fmax_hz");
  if (fmax_hz > sample_rate / 2.0) {
    std::ostringstream os;
    os << "fmax_hz " << fmax_hz << " exceeds Nyquist " << sample_rate / 2.0;
    fail(os.str());
  }
  if (context_samples() < window_samples()) fail("context shorter than one window");
}

std::size_t SpectrogramConfig::window_samples() const {
  return static_cast<std::size_t>(std::llround(window_ms * sample_rate / 1000.0));
}

std::size_t SpectrogramConfig::hop_samples() const {
  return static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

std::size_t SpectrogramConfig::context_samples() const {
  return samples_for(context_s, sample_rate);
}

std::size_t SpectrogramConfig::fft_size() const {
  std::size_t n = 1;
  while (n < window_samples()) n <<= 1;
  return n;
}

std::size_t SpectrogramConfig::frames_per_patch() const {
  return (context_samples() - window_samples()) / hop_samples() + 1;
}

bool operator==(const SpectrogramConfig& a, const SpectrogramConfig& b) {
  return a.sample_rate == b.sample_rate && a.window_ms == b.window_ms &&
         a.hop_ms == b.hop_ms && a.num_mel_bins == b.num_mel_bins &&
         a.fmin_hz == b.fmin_hz && a.fmax_hz == b.fmax_hz &&
         a.context_s == b.context_s && a.log_floor == b.log_floor;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> mel_bin_centers_hz(const SpectrogramConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin_hz);
  const double hi = hz_to_mel(cfg.fmax_hz);
  const double step = (hi - lo) / (cfg.num_mel_bins + 1);
  std::vector<double> centers(cfg.num_mel_bins);
  for (int m = 0; m < cfg.num_mel_bins; ++m) centers[m] = mel_to_hz(lo + step * (m + 1));
  return centers;
}

Waveform pad_symmetric(const Waveform& w, double target_s) {
  if (w.samples.empty()) throw Error(ErrorKind::kInvalidInput, "cannot pad an empty waveform");
  if (!(target_s > 0.0)) throw Error(ErrorKind::kInvalidInput, "pad target must be positive");
  const std::size_t target = samples_for(target_s, w.sample_rate);
  const std::size_t n = w.samples.size();
  if (n >= target) return w;
  const std::size_t deficit = target - n;
  const std::size_t front = deficit / 2;
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(target);
  const auto len = static_cast<long long>(n);
  for (std::size_t i = 0; i < target; ++i) {
    const long long src = static_cast<long long>(i) - static_cast<long long>(front);
    out.samples[i] = w.samples[reflect_index(src, len)];
  }
  return out;
}

LogMelFrontend::LogMelFrontend(const SpectrogramConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  window_ = cfg_.window_samples();
  hop_ = cfg_.hop_samples();
  fft_size_ = cfg_.fft_size();

  // Periodic Hann.
  hann_.resize(window_);
  for (std::size_t n = 0; n < window_; ++n) {
    hann_[n] = static_cast<float>(
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / window_));
  }

  // Triangular filters with edges equally spaced on the HTK mel axis;
  // weights are evaluated on the mel value of each FFT bin frequency.
  const std::size_t num_fft_bins = fft_size_ / 2 + 1;
  const double lo = hz_to_mel(cfg_.fmin_hz);
  const double hi = hz_to_mel(cfg_.fmax_hz);
  const double step = (hi - lo) / (cfg_.num_mel_bins + 1);
  filter_begin_.assign(cfg_.num_mel_bins, 0);
  filter_weights_.assign(cfg_.num_mel_bins, {});
  for (int m = 0; m < cfg_.num_mel_bins; ++m) {
    const double left = lo + step * m;
    const double center = left + step;
    const double right = center + step;
    std::vector<float> dense(num_fft_bins, 0.0f);
    std::size_t first = num_fft_bins, last = 0;
    for (std::size_t k = 1; k < num_fft_bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * cfg_.sample_rate / fft_size_);
      const double w = std::max(0.0, std::min((mel - left) / step, (right - mel) / step));
      if (w > 0.0) {
        dense[k] = static_cast<float>(w);
        first = std::min(first, k);
        last = std::max(last, k);
      }
    }
    if (first <= last) {
      filter_begin_[m] = first;
      filter_weights_[m].assign(dense.begin() + first, dense.begin() + last + 1);
    }
  }
  plan_ = plan_for(fft_size_);
}

void LogMelFrontend::frame_into(const float* frame, float* out, std::vector<float>& fft_in,
                                std::vector<float>& fft_out) const {
  std::fill(fft_in.begin(), fft_in.end(), 0.0f);
  for (std::size_t n = 0; n < window_; ++n) fft_in[n] = frame[n] * hann_[n];
  fftwf_execute_dft_r2c(static_cast<fftwf_plan>(plan_), fft_in.data(),
                        reinterpret_cast<fftwf_complex*>(fft_out.data()));
  const std::size_t num_fft_bins = fft_size_ / 2 + 1;
  // Reuse the front of fft_out for magnitudes; magnitude k only reads
  // entries 2k and 2k+1, which are never revisited.
  for (std::size_t k = 0; k < num_fft_bins; ++k) {
    const float re = fft_out[2 * k];
    const float im = fft_out[2 * k + 1];
    fft_out[k] = std::sqrt(re * re + im * im);
  }
  const auto floor = static_cast<float>(cfg_.log_floor);
  for (std::size_t m = 0; m < filter_weights_.size(); ++m) {
    const auto& weights = filter_weights_[m];
    const float* mag = fft_out.data() + filter_begin_[m];
    float energy = 0.0f;
    for (std::size_t j = 0; j < weights.size(); ++j) energy += weights[j] * mag[j];
    out[m] = std::log(energy + floor);
  }
}

std::vector<float> LogMelFrontend::frames(std::span<const float> samples,
                                          std::size_t* num_frames) const {
  const std::size_t bins = static_cast<std::size_t>(cfg_.num_mel_bins);
  std::size_t count = 0;
  if (samples.size() >= window_) count = (samples.size() - window_) / hop_ + 1;
  std::vector<float> out(count * bins);
  std::vector<float> fft_in(fft_size_);
  std::vector<float> fft_out(2 * (fft_size_ / 2 + 1));
  for (std::size_t r = 0; r < count; ++r) {
    frame_into(samples.data() + r * hop_, out.data() + r * bins, fft_in, fft_out);
  }
  if (num_frames != nullptr) *num_frames = count;
  return out;
}

LogMelPatch LogMelFrontend::patch(std::span<const float> samples, std::size_t offset) const {
  const std::size_t context = cfg_.context_samples();
  if (offset + context > samples.size()) {
    throw Error(ErrorKind::kFraming, "patch extends past the end of the clip");
  }
  LogMelPatch p;
  p.num_bins = static_cast<std::size_t>(cfg_.num_mel_bins);
  p.values = frames(samples.subspan(offset, context), &p.num_frames);
  p.start_offset_s = static_cast<double>(offset) / cfg_.sample_rate;
  return p;
}

LogMelPatch compute_log_mel(const Waveform& w, const SpectrogramConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw Error(ErrorKind::kConfig, "waveform sample rate differs from the run sample rate");
  }
  if (w.samples.size() != cfg.context_samples()) {
    std::ostringstream os;
    os << "expected exactly " << cfg.context_samples() << " samples, got "
       << w.samples.size() << " (pad or frame the clip first)";
    throw Error(ErrorKind::kFraming, os.str());
  }
  return LogMelFrontend(cfg).patch(w.samples, 0);
}

FramingPlan plan_frames(std::size_t padded_samples, const SpectrogramConfig& cfg,
                        double advance_s) {
  if (!(advance_s > 0.0)) throw Error(ErrorKind::kInvalidInput, "frame advance must be positive");
  FramingPlan plan;
  plan.frame_advance_s = advance_s;
  plan.advance_samples =
      static_cast<std::size_t>(std::llround(advance_s * cfg.sample_rate));
  if (plan.advance_samples == 0) {
    throw Error(ErrorKind::kInvalidInput, "frame advance rounds to zero samples");
  }
  const std::size_t context = cfg.context_samples();
  if (padded_samples < context) {
    throw Error(ErrorKind::kFraming, "padded clip shorter than the context window");
  }
  for (std::size_t off = 0; off + context <= padded_samples; off += plan.advance_samples) {
    plan.patch_offsets.push_back(off);
  }
  return plan;
}

std::vector<LogMelPatch> frame_patches(const Waveform& w, const SpectrogramConfig& cfg,
                                       double advance_s) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate) {
    throw Error(ErrorKind::kConfig, "waveform sample rate differs from the run sample rate");
  }
  const Waveform padded = pad_symmetric(w, cfg.context_s);
  const FramingPlan plan = plan_frames(padded.samples.size(), cfg, advance_s);
  const LogMelFrontend frontend(cfg);
  const std::size_t hop = cfg.hop_samples();
  const std::size_t bins = static_cast<std::size_t>(cfg.num_mel_bins);
  const std::size_t per_patch = cfg.frames_per_patch();

  std::vector<LogMelPatch> patches;
  patches.reserve(plan.patch_offsets.size());
  if (plan.advance_samples % hop == 0) {
    // Offsets land on the hop grid: compute every frame once and slice.
    std::size_t total = 0;
    const std::vector<float> all = frontend.frames(padded.samples, &total);
    for (std::size_t off : plan.patch_offsets) {
      const std::size_t first = off / hop;
      LogMelPatch p;
      p.num_frames = per_patch;
      p.num_bins = bins;
      p.values.assign(all.begin() + static_cast<std::ptrdiff_t>(first * bins),
                      all.begin() + static_cast<std::ptrdiff_t>((first + per_patch) * bins));
      p.start_offset_s = static_cast<double>(off) / cfg.sample_rate;
      patches.push_back(std::move(p));
    }
  } else {
    for (std::size_t off : plan.patch_offsets) {
      patches.push_back(frontend.patch(padded.samples, off));
    }
  }
  return patches;
}

}  // namespace embdistill
