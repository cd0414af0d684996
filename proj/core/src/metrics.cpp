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

#include "embdistill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "embdistill/error.hpp"

namespace embdistill {
namespace {

void check_binary(const ScoredExamples& s, std::int64_t* pos, std::int64_t* neg) {
  if (s.scores.size() != s.labels.size()) {
    throw Error(ErrorKind::kInvalidInput, "scores and labels differ in length");
  }
  *pos = 0;
  *neg = 0;
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels[i] != 0 && s.labels[i] != 1) {
      throw Error(ErrorKind::kInvalidInput, "binary labels must be 0 or 1");
    }
    if (std::isnan(s.scores[i])) throw Error(ErrorKind::kInvalidInput, "NaN score");
    (s.labels[i] == 1 ? *pos : *neg) += 1;
  }
  if (*pos == 0 || *neg == 0) {
    throw Error(ErrorKind::kDegenerateInput, "need at least one positive and one negative");
  }
}

// Indices sorted by descending score.
std::vector<std::size_t> order_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

// Merge sort counting strict inversions.
std::int64_t count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_swaps(v, buf, lo, mid) + count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

template <typename It>
std::int64_t tied_pairs(It begin, It end) {
  std::int64_t total = 0;
  for (It run = begin; run != end;) {
    It next = run;
    std::int64_t len = 0;
    while (next != end && *next == *run) {
      ++next;
      ++len;
    }
    total += len * (len - 1) / 2;
    run = next;
  }
  return total;
}

}  // namespace

double roc_auc(const ScoredExamples& s) {
  std::int64_t pos = 0, neg = 0;
  check_binary(s, &pos, &neg);
  // Walk score groups from low to high; each positive beats every negative
  // strictly below it and ties with negatives in its own group.
  std::vector<std::size_t> idx = order_desc(s.scores);
  std::reverse(idx.begin(), idx.end());
  std::int64_t twice_wins = 0;
  std::int64_t neg_below = 0;
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t e = g;
    std::int64_t gp = 0, gn = 0;
    while (e < idx.size() && s.scores[idx[e]] == s.scores[idx[g]]) {
      (s.labels[idx[e]] == 1 ? gp : gn) += 1;
      ++e;
    }
    twice_wins += 2 * gp * neg_below + gp * gn;
    neg_below += gn;
    g = e;
  }
  return static_cast<double>(twice_wins) / static_cast<double>(2 * pos * neg);
}

double macro_ovr_auc(const MulticlassScores& s) {
  const std::size_t n = s.labels.size();
  if (s.num_classes < 2) throw Error(ErrorKind::kInvalidInput, "need at least two classes");
  if (s.scores.size() != n * s.num_classes) {
    throw Error(ErrorKind::kInvalidInput, "score matrix shape mismatch");
  }
  if (s.num_classes == 2) {
    ScoredExamples b;
    b.scores.resize(n);
    b.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      b.scores[i] = s.scores[i * 2 + 1];
      b.labels[i] = s.labels[i] == 1 ? 1 : 0;
    }
    return roc_auc(b);
  }
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    ScoredExamples b;
    b.scores.resize(n);
    b.labels.resize(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      b.scores[i] = s.scores[i * s.num_classes + c];
      b.labels[i] = s.labels[i] == static_cast<int>(c) ? 1 : 0;
      (b.labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    total += roc_auc(b);
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::kDegenerateInput, "no class has both positives and negatives");
  return total / static_cast<double>(used);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (std::isnan(p) || p < 0.0 || p > 1.0) {
    throw Error(ErrorKind::kInvalidInput, "quantile probability outside [0, 1]");
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();

  // Acklam's rational approximation, relative error below 1.15e-9.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Newton refinement of F(x) - p against the erfc-based CDF. Above the
  // median the residual is formed on the upper tail to avoid cancellation.
  for (int it = 0; it < 2; ++it) {
    const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (!(density > 0.0)) break;
    const double residual =
        p > 0.5 ? (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2) : normal_cdf(x) - p;
    x -= residual / density;
  }
  return x;
}

double d_prime(double auc) {
  if (std::isnan(auc) || auc < 0.0 || auc > 1.0) {
    throw Error(ErrorKind::kInvalidInput, "AUC outside [0, 1]");
  }
  if (auc == 0.5) return 0.0;
  return std::numbers::sqrt2 * normal_quantile(auc);
}

double equal_error_rate(const ScoredExamples& s) {
  std::int64_t pos = 0, neg = 0;
  check_binary(s, &pos, &neg);
  const std::vector<std::size_t> idx = order_desc(s.scores);
  // Operating points as the threshold sweeps down through each distinct
  // score; everything at or above the threshold is called positive. Rates
  // stay as integer counts so the interpolated crossing is one rounding.
  std::int64_t fp = 0, fn = pos;
  std::int64_t prev_fp = 0, prev_fn = pos;
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t e = g;
    while (e < idx.size() && s.scores[idx[e]] == s.scores[idx[g]]) {
      if (s.labels[idx[e]] == 1) {
        --fn;
      } else {
        ++fp;
      }
      ++e;
    }
    // (fnr - fpr) * pos * neg
    const __int128 gap = static_cast<__int128>(fn) * neg - static_cast<__int128>(fp) * pos;
    if (gap <= 0) {
      const __int128 gap_prev =
          static_cast<__int128>(prev_fn) * neg - static_cast<__int128>(prev_fp) * pos;
      // fpr_prev + gap_prev / (gap_prev - gap) * (fpr - fpr_prev)
      const __int128 den = gap_prev - gap;
      const __int128 num = static_cast<__int128>(prev_fp) * den + gap_prev * (fp - prev_fp);
      return static_cast<double>(num) / (static_cast<double>(den) * static_cast<double>(neg));
    }
    prev_fp = fp;
    prev_fn = fn;
    g = e;
  }
  return 1.0;  // unreachable: the last point has fnr == 0
}

AverageDPrime average_d_prime(std::span<const double> aucs) {
  if (aucs.empty()) throw Error(ErrorKind::kInvalidInput, "no tasks to average");
  AverageDPrime out;
  double total = 0.0;
  for (std::size_t i = 0; i < aucs.size(); ++i) {
    const double d = d_prime(aucs[i]);
    if (std::isinf(d)) out.degenerate.push_back(i);
    total += d;
  }
  out.value = total / static_cast<double>(aucs.size());
  return out;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kInvalidInput, "orderings differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorKind::kDegenerateInput, "need at least two items");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) throw Error(ErrorKind::kInvalidInput, "NaN score");
  }
  // Knight's O(n log n) algorithm.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
  });
  std::int64_t ties_a = 0, ties_joint = 0;
  for (std::size_t g = 0; g < n;) {
    std::size_t e = g;
    while (e < n && a[idx[e]] == a[idx[g]]) ++e;
    const auto len = static_cast<std::int64_t>(e - g);
    ties_a += len * (len - 1) / 2;
    for (std::size_t h = g; h < e;) {
      std::size_t f = h;
      while (f < e && b[idx[f]] == b[idx[h]]) ++f;
      const auto jl = static_cast<std::int64_t>(f - h);
      ties_joint += jl * (jl - 1) / 2;
      h = f;
    }
    g = e;
  }
  std::vector<double> seq(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) seq[i] = b[idx[i]];
  const std::int64_t swaps = count_swaps(seq, buf, 0, n);
  const std::int64_t ties_b = tied_pairs(seq.begin(), seq.end());
  const auto total = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  if (total == ties_a || total == ties_b) {
    throw Error(ErrorKind::kDegenerateInput, "an ordering is entirely tied; tau-b undefined");
  }
  const std::int64_t concordant_minus_discordant = total - ties_a - ties_b + ties_joint - 2 * swaps;
  return static_cast<double>(concordant_minus_discordant) /
         std::sqrt(static_cast<double>(total - ties_a) * static_cast<double>(total - ties_b));
}

StatTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kInvalidInput, "paired samples differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorKind::kInvalidInput, "paired t-test needs n >= 2");
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
  double mean = 0.0;
  for (double d : diff) mean += d;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  StatTestResult r;
  r.n = n;
  r.mean_difference = mean;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.status = StatTestResult::Status::kNoEffect;
      r.t_statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.status = StatTestResult::Status::kInfiniteT;
      r.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t_statistic)));
  r.p_value = std::min(1.0, r.p_value);
  return r;
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size() || labels.empty()) {
    throw Error(ErrorKind::kInvalidInput, "accuracy needs equal, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace embdistill
