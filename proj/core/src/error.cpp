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

#include "embdistill/error.hpp"

namespace embdistill {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kFraming: return "framing";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
    case ErrorKind::kCacheMiss: return "cache_miss";
    case ErrorKind::kDegenerateInput: return "degenerate_input";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kManifest: return "manifest";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kMissingModel: return "missing_model";
  }
  return "unknown";
}

}  // namespace embdistill
