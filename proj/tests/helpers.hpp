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

#ifndef EMBDISTILL_TESTS_HELPERS_HPP_
#define EMBDISTILL_TESTS_HELPERS_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "embdistill/error.hpp"
#include "embdistill/frontend.hpp"

namespace testing_helpers {

inline embdistill::Waveform noise_clip(std::size_t n, std::uint64_t seed, float sd = 0.1f,
                                       int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, sd);
  embdistill::Waveform w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (auto& s : w.samples) s = g(rng);
  return w;
}

inline embdistill::LogMelPatch random_patch(std::size_t frames, std::size_t bins,
                                            std::uint64_t seed, float sd = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, sd);
  embdistill::LogMelPatch p;
  p.num_frames = frames;
  p.num_bins = bins;
  p.values.resize(frames * bins);
  for (auto& v : p.values) v = g(rng);
  return p;
}

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("embdistill-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

template <typename F>
embdistill::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const embdistill::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected an embdistill::Error");
}

}  // namespace testing_helpers

#endif  // EMBDISTILL_TESTS_HELPERS_HPP_
