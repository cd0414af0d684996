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

#ifndef EMBDISTILL_RANDOM_HPP_
#define EMBDISTILL_RANDOM_HPP_

#include <cstdint>
#include <string_view>

namespace embdistill {

// Derives an independent child seed from a root seed and a stream label, so
// every random choice in a run can be traced back to one recorded root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

// Uniform integer in [0, n) from one 64-bit draw (multiply-shift), identical
// on every standard library, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_index(std::uint64_t draw, std::uint64_t n) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(draw) * n) >> 64);
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(std::uint64_t draw) {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

}  // namespace embdistill

#endif  // EMBDISTILL_RANDOM_HPP_
