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

// Scalar metrics used to score and order embedding models.

#ifndef EMBDISTILL_METRICS_HPP_
#define EMBDISTILL_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace embdistill {

// Binary scored examples; label 1 is the positive class.
struct ScoredExamples {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Per-class score matrix (row-major, num_examples x num_classes).
struct MulticlassScores {
  std::size_t num_classes = 0;
  std::vector<double> scores;
  std::vector<int> labels;
};

// P(score_pos > score_neg) + 0.5 P(tie), computed exactly from pair counts.
double roc_auc(const ScoredExamples& s);

// Mean of one-vs-rest AUCs over classes that have both positives and
// negatives in the data.
double macro_ovr_auc(const MulticlassScores& s);

double normal_cdf(double x);
// Inverse standard normal CDF: rational approximation plus one Newton step.
double normal_quantile(double p);

// sqrt(2) * Z(auc). Returns -inf / +inf for auc == 0 / 1; callers treat
// infinities as degenerate.
double d_prime(double auc);

// Crossing point of the false-positive and false-negative rate curves,
// interpolated linearly between adjacent operating points.
double equal_error_rate(const ScoredExamples& s);

struct AverageDPrime {
  double value = 0.0;
  // Indices of tasks whose AUC was 0 or 1.
  std::vector<std::size_t> degenerate;

  bool ok() const { return degenerate.empty(); }
};

// Unweighted mean of d_prime over per-task AUCs.
AverageDPrime average_d_prime(std::span<const double> aucs);

// Tau-b between two score lists over the same items. Throws
// Error(kDegenerateInput) when either list is entirely tied.
double kendall_tau(std::span<const double> a, std::span<const double> b);

struct StatTestResult {
  enum class Status {
    kOk,
    kInfiniteT,  // zero-variance, nonzero-mean differences
    kNoEffect,   // all differences zero
  };
  double t_statistic = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
  double mean_difference = 0.0;
  Status status = Status::kOk;
};

// Dependent t-test on the pairwise differences a[i] - b[i].
StatTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double accuracy(std::span<const int> predicted, std::span<const int> labels);

}  // namespace embdistill

#endif  // EMBDISTILL_METRICS_HPP_
