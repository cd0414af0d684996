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

// Finite-difference check of student gradients, shared by the unit and
// acceptance suites.

#ifndef EMBDISTILL_TESTS_GRADCHECK_HPP_
#define EMBDISTILL_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "embdistill/students.hpp"
#include "oracles.hpp"

namespace gradcheck {

using embdistill::StudentConfig;
using embdistill::StudentFamily;

// Smallest useful configuration of each family on a toy input.
inline StudentConfig minimal_config(StudentFamily family, std::uint64_t seed) {
  StudentConfig c;
  c.family = family;
  c.depth = 1;
  // Layer norm over fewer channels is close to a sign function, which no
  // finite-difference step resolves; attention starts at width 8.
  c.width = family == StudentFamily::kAttentionLike ? 8 : 2;
  c.embedding_dim = 3;
  c.seed = seed;
  c.input_bins = 4;
  c.input_frames = 0;
  c.patch_frames = 2;
  c.patch_bins = 2;
  return c;
}

struct Outcome {
  std::size_t params = 0;
  // max_i |a_i - f_i| / max_i max(|a_i|, |f_i|)
  double rel_error = 0.0;
  // Components with |a_i - f_i| > rtol * max(|a_i|, |f_i|) + 1e-8.
  std::size_t loose_components = 0;
};

// Compares the analytic gradient of <c, y(theta)> with central differences.
inline Outcome check(const StudentConfig& cfg, std::size_t frames, std::uint64_t seed,
                     double step = 1e-3, double rtol = 1e-4) {
  embdistill::StudentNetwork<double> net(cfg);
  std::vector<double> theta(net.param_count());
  net.init(theta);
  std::mt19937_64 rng(seed * 7919 + 17);
  std::normal_distribution<double> g(0.0, 1.0);
  // Shift every parameter so biases and norms sit away from their init values.
  for (double& t : theta) t += 0.1 * g(rng);

  embdistill::LogMelPatch patch;
  patch.num_frames = frames;
  patch.num_bins = cfg.input_bins;
  patch.values.resize(frames * cfg.input_bins);
  for (float& v : patch.values) v = static_cast<float>(g(rng));
  std::vector<double> cot(cfg.embedding_dim);
  for (double& v : cot) v = g(rng);

  auto f = [&](const std::vector<double>& p) {
    const std::vector<double> y = net.forward(p, patch, nullptr);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += cot[i] * y[i];
    return s;
  };
  auto trace = net.make_trace();
  net.forward(theta, patch, trace.get());
  std::vector<double> analytic(theta.size(), 0.0);
  net.backward(theta, *trace, cot, analytic);
  const std::vector<double> numeric = oracle::central_gradient(f, theta, step);

  Outcome out;
  out.params = theta.size();
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double mag = std::max(std::fabs(a), std::fabs(n));
    const double diff = std::fabs(a - n);
    worst = std::max(worst, diff);
    scale = std::max(scale, mag);
    if (diff > rtol * mag + 1e-8) ++out.loose_components;
  }
  out.rel_error = scale > 0.0 ? worst / scale : worst;
  return out;
}

inline std::size_t toy_frames(StudentFamily family) {
  return family == StudentFamily::kAttentionLike ? 6 : 10;
}

}  // namespace gradcheck

#endif  // EMBDISTILL_TESTS_GRADCHECK_HPP_
