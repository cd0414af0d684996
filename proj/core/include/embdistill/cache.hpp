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

#ifndef EMBDISTILL_CACHE_HPP_
#define EMBDISTILL_CACHE_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace embdistill {

struct CachedBlock {
  std::size_t dim = 0;
  std::vector<std::string> clip_ids;
  std::vector<float> rows;  // clip_ids.size() x dim
};

// One float32 file plus a JSON sidecar per (model, key, fingerprint) under
// root/<model_id>/. Entries are written once and never modified; a changed
// fingerprint addresses a different entry.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Returns the block when an entry exists for the fingerprint and holds
  // exactly the requested clips in the same order.
  std::optional<CachedBlock> lookup(const std::string& model_id, const std::string& key,
                                    const std::string& fingerprint,
                                    const std::vector<std::string>& clip_ids) const;
  void store(const std::string& model_id, const std::string& key,
             const std::string& fingerprint, const CachedBlock& block);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  std::filesystem::path entry_path(const std::string& model_id, const std::string& key,
                                   const std::string& fingerprint, const char* ext) const;

  std::filesystem::path root_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

}  // namespace embdistill

#endif  // EMBDISTILL_CACHE_HPP_
