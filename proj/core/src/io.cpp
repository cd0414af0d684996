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

#include "embdistill/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "embdistill/error.hpp"

namespace embdistill {
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "failed reading '" + path.string() + "'");
  return os.str();
}

struct ParsedWav {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
  std::uint16_t format = 0;
};

ParsedWav parse_header(const std::string& bytes, const fs::path& path) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::kIo, "'" + path.string() + "' is not a readable WAV file: " + why);
  };
  if (bytes.size() < 12 || std::memcmp(b, "RIFF", 4) != 0 || std::memcmp(b + 8, "WAVE", 4) != 0) {
    throw bad("missing RIFF/WAVE signature");
  }
  ParsedWav out;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::size_t size = le32(b + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(b + pos, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) throw bad("truncated fmt chunk");
      out.format = le16(b + body);
      out.info.channels = le16(b + body + 2);
      out.info.sample_rate = static_cast<int>(le32(b + body + 4));
      out.info.bits_per_sample = le16(b + body + 14);
      have_fmt = true;
    } else if (std::memcmp(b + pos, "data", 4) == 0) {
      if (!have_fmt) throw bad("data chunk before fmt chunk");
      out.data_offset = body;
      out.data_bytes = std::min(size, bytes.size() - body);
      const std::size_t frame = static_cast<std::size_t>(out.info.channels) *
                                static_cast<std::size_t>(std::max(out.info.bits_per_sample / 8, 1));
      out.info.num_samples = frame > 0 ? out.data_bytes / frame : 0;
      return out;
    }
    pos = body + size + (size & 1U);
  }
  throw bad("no data chunk");
}

}  // namespace

WavInfo read_wav_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  // Headers of files written here fit in 44 bytes; allow extra chunks.
  std::string head(4096, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  ParsedWav p = parse_header(head, path);
  in.clear();
  in.seekg(0, std::ios::end);
  const auto total = static_cast<std::size_t>(in.tellg());
  const std::size_t frame = static_cast<std::size_t>(p.info.channels) *
                            static_cast<std::size_t>(std::max(p.info.bits_per_sample / 8, 1));
  const std::size_t declared = frame > 0 ? le32(reinterpret_cast<const unsigned char*>(
                                               head.data() + p.data_offset - 4)) / frame
                                         : 0;
  const std::size_t present = total > p.data_offset && frame > 0 ? (total - p.data_offset) / frame : 0;
  p.info.num_samples = std::min(declared, present);
  return p.info;
}

Waveform read_wav(const fs::path& path, int expected_rate) {
  const std::string bytes = slurp(path);
  const ParsedWav p = parse_header(bytes, path);
  if (p.format != 1 || p.info.bits_per_sample != 16) {
    throw Error(ErrorKind::kInvalidInput,
                "'" + path.string() + "' is not 16-bit PCM (format " + std::to_string(p.format) +
                    ", " + std::to_string(p.info.bits_per_sample) + " bits)");
  }
  if (p.info.channels != 1) {
    throw Error(ErrorKind::kInvalidInput, "'" + path.string() + "' has " +
                                              std::to_string(p.info.channels) +
                                              " channels; only mono is accepted");
  }
  if (expected_rate != 0 && p.info.sample_rate != expected_rate) {
    throw Error(ErrorKind::kConfig, "'" + path.string() + "' is sampled at " +
                                        std::to_string(p.info.sample_rate) + " Hz, expected " +
                                        std::to_string(expected_rate) + " Hz");
  }
  Waveform w;
  w.sample_rate = p.info.sample_rate;
  w.samples.resize(p.info.num_samples);
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + p.data_offset);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const auto v = static_cast<std::int16_t>(le16(b + 2 * i));
    w.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return w;
}

namespace {

std::int16_t to_pcm16(float x) {
  const double scaled = std::nearbyint(static_cast<double>(x) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFFU));
  s.push_back(static_cast<char>(v >> 8));
}

}  // namespace

void quantize_pcm16(Waveform& w) {
  for (auto& x : w.samples) x = static_cast<float>(to_pcm16(x)) / 32768.0f;
}

void write_wav(const fs::path& path, const Waveform& w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string s;
  s.reserve(44 + data_bytes);
  s += "RIFF";
  put32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, 1);  // PCM
  put16(s, 1);  // mono
  put32(s, static_cast<std::uint32_t>(w.sample_rate));
  put32(s, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put16(s, 2);
  put16(s, 16);
  s += "data";
  put32(s, data_bytes);
  for (float x : w.samples) put16(s, static_cast<std::uint16_t>(to_pcm16(x)));
  write_text(path, s);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::string sha256_hex(std::span<const float> values) {
  return sha256_hex(std::string_view(reinterpret_cast<const char*>(values.data()),
                                     values.size() * sizeof(float)));
}

std::string read_text(const fs::path& path) { return slurp(path); }

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create '" + path.parent_path().string() + "'");
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorKind::kIo, "failed writing '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot move into '" + path.string() + "'");
}

void write_tensor(const fs::path& path, std::span<const float> values) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(values.data()),
                                    values.size() * sizeof(float)));
}

std::vector<float> read_tensor(const fs::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() % sizeof(float) != 0) {
    throw Error(ErrorKind::kIo, "'" + path.string() + "' is not a float32 tensor");
  }
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

nlohmann::json to_json(const SpectrogramConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"window_ms", c.window_ms}, {"hop_ms", c.hop_ms},
          {"num_mel_bins", c.num_mel_bins}, {"fmin_hz", c.fmin_hz}, {"fmax_hz", c.fmax_hz},
          {"context_s", c.context_s}, {"log_floor", c.log_floor}};
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

void require_object(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw Error(ErrorKind::kConfig, std::string(what) + " must be a JSON object");
}

}  // namespace

SpectrogramConfig spectrogram_config_from_json(const nlohmann::json& j) {
  require_object(j, "frontend config");
  SpectrogramConfig c;
  read_opt(j, "sample_rate", c.sample_rate);
  read_opt(j, "window_ms", c.window_ms);
  read_opt(j, "hop_ms", c.hop_ms);
  read_opt(j, "num_mel_bins", c.num_mel_bins);
  read_opt(j, "fmin_hz", c.fmin_hz);
  read_opt(j, "fmax_hz", c.fmax_hz);
  read_opt(j, "context_s", c.context_s);
  read_opt(j, "log_floor", c.log_floor);
  c.validate();
  return c;
}

nlohmann::json to_json(const StudentConfig& c) {
  return {{"family", to_string(c.family)}, {"depth", c.depth}, {"width", c.width},
          {"embedding_dim", c.embedding_dim}, {"seed", c.seed}, {"input_bins", c.input_bins},
          {"input_frames", c.input_frames}, {"patch_frames", c.patch_frames},
          {"patch_bins", c.patch_bins}, {"input_mean", c.input_mean}, {"input_std", c.input_std}};
}

StudentConfig student_config_from_json(const nlohmann::json& j) {
  require_object(j, "student config");
  StudentConfig c;
  std::string family = to_string(c.family);
  read_opt(j, "family", family);
  c.family = student_family_from_string(family);
  read_opt(j, "depth", c.depth);
  read_opt(j, "width", c.width);
  read_opt(j, "embedding_dim", c.embedding_dim);
  read_opt(j, "seed", c.seed);
  read_opt(j, "input_bins", c.input_bins);
  read_opt(j, "input_frames", c.input_frames);
  read_opt(j, "patch_frames", c.patch_frames);
  read_opt(j, "patch_bins", c.patch_bins);
  read_opt(j, "input_mean", c.input_mean);
  read_opt(j, "input_std", c.input_std);
  c.validate();
  return c;
}

nlohmann::json to_json(const TeacherSpec& s) {
  return {{"kind", to_string(s.kind)}, {"embedding_dim", s.embedding_dim}, {"seed", s.seed},
          {"hidden_dim", s.hidden_dim}, {"input_offset", s.input_offset},
          {"input_gain", s.input_gain}};
}

TeacherSpec teacher_spec_from_json(const nlohmann::json& j) {
  require_object(j, "teacher spec");
  TeacherSpec s;
  std::string kind = to_string(s.kind);
  read_opt(j, "kind", kind);
  s.kind = teacher_kind_from_string(kind);
  read_opt(j, "embedding_dim", s.embedding_dim);
  read_opt(j, "seed", s.seed);
  read_opt(j, "hidden_dim", s.hidden_dim);
  read_opt(j, "input_offset", s.input_offset);
  read_opt(j, "input_gain", s.input_gain);
  if (s.embedding_dim < 1) throw Error(ErrorKind::kConfig, "teacher embedding_dim must be >= 1");
  return s;
}

std::string checkpoint_digest(const StudentModel& m) { return sha256_hex(m.parameters); }

namespace {

fs::path checkpoint_stem(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".json" || stem.extension() == ".bin") stem.replace_extension();
  return stem;
}

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  fs::path p = stem;
  p += suffix;
  return p;
}

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  const fs::path stem = checkpoint_stem(path);
  const fs::path bin = with_suffix(stem, ".bin");
  write_tensor(bin, ckpt.model.parameters);
  nlohmann::json header = {
      {"format", "embdistill-checkpoint-v1"},
      {"model_id", ckpt.model_id},
      {"student", to_json(ckpt.model.config)},
      {"frontend", to_json(ckpt.frontend)},
      {"param_count", ckpt.model.parameters.size()},
      {"parameters_file", bin.filename().string()},
      {"parameters_sha256", checkpoint_digest(ckpt.model)},
      {"provenance", ckpt.provenance},
  };
  write_text(with_suffix(stem, ".json"), header.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& path) {
  const fs::path stem = checkpoint_stem(path);
  const fs::path header_path = with_suffix(stem, ".json");
  if (!fs::exists(header_path)) {
    throw Error(ErrorKind::kMissingModel, "no checkpoint at '" + header_path.string() + "'");
  }
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(read_text(header_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kIo, "checkpoint header '" + header_path.string() + "': " + e.what());
  }
  if (h.value("format", "") != "embdistill-checkpoint-v1") {
    throw Error(ErrorKind::kIo, "'" + header_path.string() + "' is not an embdistill checkpoint");
  }
  Checkpoint c;
  c.model_id = h.value("model_id", stem.filename().string());
  c.model.config = student_config_from_json(h.at("student"));
  c.frontend = spectrogram_config_from_json(h.at("frontend"));
  c.provenance = h.value("provenance", nlohmann::json::object());
  const fs::path bin = stem.parent_path() / h.value("parameters_file", stem.filename().string() + ".bin");
  c.model.parameters = read_tensor(bin);
  if (c.model.parameters.size() != param_count(c.model.config)) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint '" + stem.string() + "' holds " +
                                               std::to_string(c.model.parameters.size()) +
                                               " parameters; its config needs " +
                                               std::to_string(param_count(c.model.config)));
  }
  if (h.contains("parameters_sha256") && h["parameters_sha256"] != checkpoint_digest(c.model)) {
    throw Error(ErrorKind::kIo, "checkpoint '" + stem.string() + "' failed its integrity check");
  }
  return c;
}

}  // namespace embdistill
