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

#ifndef EMBDISTILL_EMBEDDING_HPP_
#define EMBDISTILL_EMBEDDING_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace embdistill {

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  float operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Unweighted coordinate-wise mean, accumulated in double in input order.
// Throws on an empty input or mismatched lengths.
EmbeddingVector mean_embedding(std::span<const EmbeddingVector> parts);

}  // namespace embdistill

#endif  // EMBDISTILL_EMBEDDING_HPP_
