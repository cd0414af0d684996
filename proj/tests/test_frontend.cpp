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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "embdistill/error.hpp"
#include "embdistill/frontend.hpp"
#include "oracles.hpp"

namespace embdistill {
namespace {

Waveform noise(std::size_t n, std::uint64_t seed, int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.1f);
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (auto& s : w.samples) s = g(rng);
  return w;
}

// Log-mel of one frame by a direct DFT and a filterbank built from the
// textbook definition.
std::vector<double> naive_log_mel_frame(const std::vector<float>& x, std::size_t start,
                                        const SpectrogramConfig& cfg) {
  const std::size_t win = 400, nfft = 512;
  std::vector<double> mag(nfft / 2 + 1);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const double h = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win);
      const double v = x[start + n] * h;
      re += v * std::cos(2.0 * std::numbers::pi * k * n / nfft);
      im -= v * std::sin(2.0 * std::numbers::pi * k * n / nfft);
    }
    mag[k] = std::hypot(re, im);
  }
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const double lo = mel(cfg.fmin_hz), hi = mel(cfg.fmax_hz);
  const double step = (hi - lo) / (cfg.num_mel_bins + 1);
  std::vector<double> out(cfg.num_mel_bins);
  for (int m = 0; m < cfg.num_mel_bins; ++m) {
    double e = 0.0;
    for (std::size_t k = 1; k <= nfft / 2; ++k) {
      const double z = mel(k * 16000.0 / nfft);
      const double up = (z - (lo + m * step)) / step;
      const double down = ((lo + (m + 2) * step) - z) / step;
      e += std::max(0.0, std::min(up, down)) * mag[k];
    }
    out[m] = std::log(e + cfg.log_floor);
  }
  return out;
}

TEST(SpectrogramConfig, DerivedSizes) {
  SpectrogramConfig c;
  EXPECT_EQ(c.window_samples(), 400u);
  EXPECT_EQ(c.hop_samples(), 160u);
  EXPECT_EQ(c.context_samples(), 32000u);
  EXPECT_EQ(c.fft_size(), 512u);
  EXPECT_EQ(c.frames_per_patch(), 198u);
}

TEST(SpectrogramConfig, ValidationRejectsBadValues) {
  SpectrogramConfig c;
  c.fmax_hz = 9000.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.window_ms = 5.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.num_mel_bins = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(MelScale, RoundTripAndCenters) {
  for (double hz : {125.0, 440.0, 1000.0, 7500.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  SpectrogramConfig c;
  const auto centers = mel_bin_centers_hz(c);
  ASSERT_EQ(centers.size(), 80u);
  EXPECT_GT(centers.front(), 125.0);
  EXPECT_LT(centers.back(), 7500.0);
  for (std::size_t i = 1; i < centers.size(); ++i) EXPECT_GT(centers[i], centers[i - 1]);
}

TEST(ComputeLogMel, TwoSecondsGives198By80) {
  SpectrogramConfig c;
  const LogMelPatch p = compute_log_mel(noise(32000, 1), c);
  EXPECT_EQ(p.num_frames, 198u);
  EXPECT_EQ(p.num_bins, 80u);
  EXPECT_EQ(p.values.size(), 198u * 80u);
}

TEST(ComputeLogMel, MatchesNaiveDft) {
  SpectrogramConfig c;
  const Waveform w = noise(32000, 2);
  const LogMelPatch p = compute_log_mel(w, c);
  for (std::size_t frame : {0u, 97u, 197u}) {
    const auto ref = naive_log_mel_frame(w.samples, frame * 160, c);
    for (std::size_t m = 0; m < 80; ++m) {
      ASSERT_NEAR(p.at(frame, m), ref[m], 2e-3) << "frame " << frame << " bin " << m;
    }
  }
}

TEST(ComputeLogMel, SilenceSitsAtTheFloor) {
  SpectrogramConfig c;
  Waveform w;
  w.samples.assign(32000, 0.0f);
  const LogMelPatch p = compute_log_mel(w, c);
  for (float v : p.values) ASSERT_FLOAT_EQ(v, static_cast<float>(std::log(1e-6)));
}

TEST(ComputeLogMel, ToneLightsItsBin) {
  SpectrogramConfig c;
  Waveform w;
  w.samples.resize(32000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.3f * static_cast<float>(std::sin(2.0 * std::numbers::pi * 1000.0 * i / 16000.0));
  }
  const LogMelPatch p = compute_log_mel(w, c);
  const auto centers = mel_bin_centers_hz(c);
  std::size_t best = 0;
  for (std::size_t m = 1; m < 80; ++m) {
    if (p.at(100, m) > p.at(100, best)) best = m;
  }
  EXPECT_LT(std::fabs(centers[best] - 1000.0), 60.0);
}

TEST(ComputeLogMel, Errors) {
  SpectrogramConfig c;
  try {
    compute_log_mel(noise(16000, 3), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFraming);
  }
  try {
    compute_log_mel(noise(32000, 3, 8000), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(PadSymmetric, MatchesReflectOracle) {
  for (std::size_t n : {1u, 2u, 5u, 3200u, 31999u}) {
    const Waveform w = noise(n, n);
    const Waveform p = pad_symmetric(w, 2.0);
    ASSERT_EQ(p.samples.size(), 32000u);
    const std::size_t front = (32000 - n) / 2;
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
      const long long src = static_cast<long long>(i) - static_cast<long long>(front);
      ASSERT_EQ(p.samples[i], w.samples[oracle::reflect_index(src, static_cast<long long>(n))]);
    }
  }
}

TEST(PadSymmetric, LongClipsUnchanged) {
  const Waveform w = noise(40000, 4);
  EXPECT_EQ(pad_symmetric(w, 2.0).samples, w.samples);
}

TEST(PadSymmetric, PropertyIdempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dur(0.2, 10.0);
  for (int i = 0; i < 200; ++i) {
    const Waveform w = noise(static_cast<std::size_t>(std::llround(dur(rng) * 16000)), i);
    const Waveform once = pad_symmetric(w, 2.0);
    ASSERT_EQ(pad_symmetric(once, 2.0).samples, once.samples);
    ASSERT_GE(once.samples.size(), 32000u);
  }
}

TEST(FramePatches, ExamplesFromTheContract) {
  SpectrogramConfig c;
  EXPECT_EQ(frame_patches(noise(16000, 6), c, 1.0).size(), 1u);   // 1 s -> padded to 2 s
  EXPECT_EQ(frame_patches(noise(64000, 7), c, 1.0).size(), 3u);   // 4 s, advance 1 s
  EXPECT_EQ(frame_patches(noise(64000, 7), c, 2.0).size(), 2u);
  EXPECT_EQ(frame_patches(noise(72000, 8), c, 2.0).size(), 2u);   // 4.5 s drops the tail
}

TEST(FramePatches, PatchesEqualDirectComputation) {
  SpectrogramConfig c;
  const Waveform w = noise(56000, 9);
  for (double adv : {0.5, 1.0, 0.333}) {
    const auto patches = frame_patches(w, c, adv);
    const FramingPlan plan = plan_frames(w.samples.size(), c, adv);
    ASSERT_EQ(patches.size(), plan.patch_offsets.size());
    for (std::size_t k = 0; k < patches.size(); ++k) {
      Waveform slice;
      slice.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(plan.patch_offsets[k]),
                           w.samples.begin() + static_cast<std::ptrdiff_t>(plan.patch_offsets[k] + 32000));
      const LogMelPatch direct = compute_log_mel(slice, c);
      ASSERT_EQ(patches[k].values, direct.values) << "advance " << adv << " patch " << k;
      EXPECT_DOUBLE_EQ(patches[k].start_offset_s, plan.patch_offsets[k] / 16000.0);
    }
  }
}

TEST(FramePatches, PropertyPatchCountLaw) {
  SpectrogramConfig c;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> dur(0.2, 10.0), adv(0.1, 3.0);
  for (int i = 0; i < 300; ++i) {
    const auto n = static_cast<std::size_t>(std::llround(dur(rng) * 16000));
    const double a = adv(rng);
    const FramingPlan plan = plan_frames(std::max<std::size_t>(n, 32000), c, a);
    const auto step = static_cast<std::size_t>(std::llround(a * 16000));
    const std::size_t padded = std::max<std::size_t>(n, 32000);
    ASSERT_EQ(plan.patch_offsets.size(), (padded - 32000) / step + 1);
    for (std::size_t k = 0; k < plan.patch_offsets.size(); ++k) {
      ASSERT_EQ(plan.patch_offsets[k], k * step);
      ASSERT_LE(plan.patch_offsets[k] + 32000, padded);
    }
  }
}

TEST(FramePatches, RejectsNonPositiveAdvance) {
  SpectrogramConfig c;
  EXPECT_THROW(frame_patches(noise(32000, 11), c, 0.0), Error);
  EXPECT_THROW(frame_patches(noise(32000, 11), c, -1.0), Error);
}

TEST(LogMelFrontend, FramesAreLocal) {
  // Row r depends only on samples [160 r, 160 r + 400).
  SpectrogramConfig c;
  const LogMelFrontend fe(c);
  Waveform w = noise(4000, 12);
  std::size_t n = 0;
  const auto before = fe.frames(w.samples, &n);
  w.samples[3999] += 0.5f;
  std::size_t n2 = 0;
  const auto after = fe.frames(w.samples, &n2);
  ASSERT_EQ(n, n2);
  const std::size_t first_touched = (3999 - 400) / 160 + 1;
  for (std::size_t r = 0; r < first_touched; ++r) {
    for (std::size_t m = 0; m < 80; ++m) ASSERT_EQ(before[r * 80 + m], after[r * 80 + m]);
  }
}

}  // namespace
}  // namespace embdistill
