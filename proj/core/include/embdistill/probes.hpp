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

// Linear-probe evaluation: fit three linear classifiers on train-split
// embeddings, select the best on dev, report the selected probe on test.

#ifndef EMBDISTILL_PROBES_HPP_
#define EMBDISTILL_PROBES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "embdistill/metrics.hpp"

namespace embdistill {

enum class ProbeVariant { kLogregStrong, kLogregWeak, kLda };

std::string to_string(ProbeVariant v);
ProbeVariant probe_variant_from_string(const std::string& name);

// Tie-break order for dev selection.
inline constexpr ProbeVariant kProbeVariants[] = {ProbeVariant::kLogregStrong,
                                                  ProbeVariant::kLogregWeak, ProbeVariant::kLda};

struct ProbeConfig {
  ProbeVariant variant = ProbeVariant::kLogregStrong;
  // L2 strength on the mean-loss scale for logistic regression; covariance
  // shrinkage in [0, 1] for LDA.
  double regularization = 1.0;
  std::uint64_t seed = 0;

  static ProbeConfig defaults(ProbeVariant v, std::uint64_t seed = 0);
  void validate() const;
};

// Row-major embeddings with integer class labels in [0, num_classes).
struct LabeledEmbeddings {
  std::size_t dim = 0;
  std::vector<float> rows;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  const float* row(std::size_t i) const { return rows.data() + i * dim; }
};

class LinearProbe {
 public:
  LinearProbe() = default;
  LinearProbe(std::size_t dim, std::size_t num_classes, std::vector<double> mean,
              std::vector<double> inv_scale, std::vector<double> weights,
              std::vector<double> bias);

  std::size_t dim() const { return dim_; }
  std::size_t num_classes() const { return num_classes_; }

  // Class logits (or discriminants) for one embedding.
  std::vector<double> decision(const float* x) const;
  // Softmax of decision(), row-major over all examples.
  MulticlassScores score(const LabeledEmbeddings& data) const;
  std::vector<int> predict(const LabeledEmbeddings& data) const;

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }

 private:
  std::size_t dim_ = 0;
  std::size_t num_classes_ = 0;
  std::vector<double> mean_;
  std::vector<double> inv_scale_;
  std::vector<double> weights_;  // num_classes x dim
  std::vector<double> bias_;
};

// Inputs are standardized with train-split statistics. Logistic variants
// run full-batch Newton iterations to gradient norm 1e-6; LDA uses a
// shrinkage-regularized shared covariance.
LinearProbe train_probe(const LabeledEmbeddings& train, std::size_t num_classes,
                        const ProbeConfig& pc);

enum class SelectionMetric { kAccuracy, kEer };

std::string to_string(SelectionMetric m);
SelectionMetric selection_metric_from_string(const std::string& name);

struct TaskSpec {
  std::string name;
  SelectionMetric metric = SelectionMetric::kAccuracy;
  std::size_t num_classes = 2;
};

struct SplitScores {
  double accuracy = 0.0;
  double auc = 0.0;  // macro one-vs-rest for multiclass
  double eer = 0.0;  // binary tasks only
  // The task's metric: accuracy, or EER (lower is better).
  double metric = 0.0;
  MulticlassScores scores;
};

SplitScores score_split(const LinearProbe& probe, const LabeledEmbeddings& data,
                        const TaskSpec& task);

struct ProbeResult {
  ProbeVariant variant = ProbeVariant::kLogregStrong;
  double dev_score = 0.0;
  double test_score = 0.0;
  SplitScores dev;
  SplitScores test;
};

struct DevSelection {
  ProbeVariant best = ProbeVariant::kLogregStrong;
  std::vector<ProbeVariant> variants;
  std::vector<SplitScores> dev;
  std::vector<LinearProbe> probes;
};

// Fits every variant on train and picks the dev-best. Never sees test data.
DevSelection select_on_dev(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                           const TaskSpec& task, std::uint64_t seed = 0);

struct TaskEvaluation {
  ProbeResult best;
  // One entry per variant in kProbeVariants order.
  std::vector<ProbeResult> all;
};

TaskEvaluation evaluate_task(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                             const LabeledEmbeddings& test, const TaskSpec& task,
                             std::uint64_t seed = 0);

}  // namespace embdistill

#endif  // EMBDISTILL_PROBES_HPP_
