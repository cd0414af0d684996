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

#ifndef EMBDISTILL_IO_HPP_
#define EMBDISTILL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "embdistill/frontend.hpp"
#include "embdistill/students.hpp"
#include "embdistill/teacher.hpp"

namespace embdistill {

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t num_samples = 0;
};

// Parses the RIFF header only. Throws Error(kIo) on unreadable files.
WavInfo read_wav_info(const std::filesystem::path& path);

// Mono 16-bit PCM only; other layouts are rejected with kInvalidInput and a
// rate different from expected_rate (when nonzero) with kConfig.
Waveform read_wav(const std::filesystem::path& path, int expected_rate = 0);

// Writes 16-bit PCM mono, clipping to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& w);

// Rounds every sample to the nearest 16-bit level, as a WAV round trip would.
void quantize_pcm16(Waveform& w);

std::string sha256_hex(std::string_view bytes);
std::string sha256_hex(std::span<const float> values);

std::string read_text(const std::filesystem::path& path);
// Writes via a temporary file and rename, so readers never see partial data.
void write_text(const std::filesystem::path& path, std::string_view text);

// Raw little-endian float32, row-major.
void write_tensor(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_tensor(const std::filesystem::path& path);

nlohmann::json to_json(const SpectrogramConfig& cfg);
SpectrogramConfig spectrogram_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StudentConfig& cfg);
StudentConfig student_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TeacherSpec& spec);
TeacherSpec teacher_spec_from_json(const nlohmann::json& j);

struct Checkpoint {
  std::string model_id;
  StudentModel model;
  SpectrogramConfig frontend;
  // Free-form provenance: teacher, training config, root seed, corpus.
  nlohmann::json provenance = nlohmann::json::object();
};

// Writes <stem>.json (header) and <stem>.bin (parameters).
void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt);
// Accepts the stem, the .json header or the .bin path.
Checkpoint load_checkpoint(const std::filesystem::path& path);
// SHA-256 of the parameter bytes.
std::string checkpoint_digest(const StudentModel& m);

}  // namespace embdistill

#endif  // EMBDISTILL_IO_HPP_
