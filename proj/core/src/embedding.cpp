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

#include "embdistill/embedding.hpp"

#include "embdistill/error.hpp"

namespace embdistill {

EmbeddingVector mean_embedding(std::span<const EmbeddingVector> parts) {
  if (parts.empty()) throw Error(ErrorKind::kInvalidInput, "mean of zero embeddings");
  const std::size_t dim = parts.front().size();
  std::vector<double> acc(dim, 0.0);
  for (const auto& e : parts) {
    if (e.size() != dim) throw Error(ErrorKind::kShapeMismatch, "embedding lengths differ");
    for (std::size_t i = 0; i < dim; ++i) acc[i] += e.values[i];
  }
  EmbeddingVector out;
  out.values.resize(dim);
  const auto n = static_cast<double>(parts.size());
  for (std::size_t i = 0; i < dim; ++i) out.values[i] = static_cast<float>(acc[i] / n);
  return out;
}

}  // namespace embdistill
