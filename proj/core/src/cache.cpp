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

#include "embdistill/cache.hpp"

#include <nlohmann/json.hpp>

#include "embdistill/error.hpp"
#include "embdistill/io.hpp"

namespace embdistill {
namespace fs = std::filesystem;

namespace {

// Keeps ids usable as file names.
std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

EmbeddingCache::EmbeddingCache(fs::path root) : root_(std::move(root)) {}

fs::path EmbeddingCache::entry_path(const std::string& model_id, const std::string& key,
                                    const std::string& fingerprint, const char* ext) const {
  return root_ / sanitize(model_id) / (sanitize(key) + "." + fingerprint.substr(0, 16) + ext);
}

std::optional<CachedBlock> EmbeddingCache::lookup(const std::string& model_id,
                                                  const std::string& key,
                                                  const std::string& fingerprint,
                                                  const std::vector<std::string>& clip_ids) const {
  const fs::path sidecar = entry_path(model_id, key, fingerprint, ".json");
  const fs::path data = entry_path(model_id, key, fingerprint, ".f32");
  if (!fs::exists(sidecar) || !fs::exists(data)) {
    ++misses_;
    return std::nullopt;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(sidecar));
  } catch (const nlohmann::json::parse_error&) {
    ++misses_;
    return std::nullopt;
  }
  if (j.value("fingerprint", "") != fingerprint ||
      j.value("clip_ids", std::vector<std::string>{}) != clip_ids) {
    ++misses_;
    return std::nullopt;
  }
  CachedBlock b;
  b.dim = j.at("dim").get<std::size_t>();
  b.clip_ids = clip_ids;
  b.rows = read_tensor(data);
  if (b.rows.size() != b.dim * clip_ids.size()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return b;
}

void EmbeddingCache::store(const std::string& model_id, const std::string& key,
                           const std::string& fingerprint, const CachedBlock& block) {
  if (block.rows.size() != block.dim * block.clip_ids.size()) {
    throw Error(ErrorKind::kShapeMismatch, "cache block rows disagree with its clip list");
  }
  const fs::path data = entry_path(model_id, key, fingerprint, ".f32");
  write_tensor(data, block.rows);
  nlohmann::json j = {{"model_id", model_id}, {"key", key},        {"fingerprint", fingerprint},
                      {"dim", block.dim},     {"dtype", "float32"}, {"clip_ids", block.clip_ids},
                      {"data_file", data.filename().string()}};
  // Sidecar last: an entry is visible only once its data is complete.
  write_text(entry_path(model_id, key, fingerprint, ".json"), j.dump(1) + "\n");
}

}  // namespace embdistill
