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

#ifndef EMBDISTILL_ERROR_HPP_
#define EMBDISTILL_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace embdistill {

// Failure classes surfaced by the library. The CLI maps each one to a
// machine-readable error object on stderr.
enum class ErrorKind {
  kInvalidInput,
  kFraming,
  kConfig,
  kShapeMismatch,
  kCacheMiss,
  kDegenerateInput,
  kDivergence,
  kManifest,
  kIo,
  kMissingModel,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace embdistill

#endif  // EMBDISTILL_ERROR_HPP_
