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

#ifndef EMBDISTILL_REPORT_HPP_
#define EMBDISTILL_REPORT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embdistill/metrics.hpp"
#include "embdistill/probes.hpp"

namespace embdistill {

struct ModelInfo {
  std::string model_id;
  std::size_t param_count = 0;
  // Reference models (the teacher) appear in tables but not on the curve
  // or in orderings.
  bool reference = false;
  // A/B comparisons pair models of two groups by seed.
  std::string group;
  std::uint64_t seed = 0;
};

// One (model, task) evaluation: the dev-selected probe variant and its scores.
struct ProbeRecord {
  std::string model_id;
  std::string task;
  SelectionMetric metric = SelectionMetric::kAccuracy;
  ProbeVariant variant = ProbeVariant::kLogregStrong;
  double dev_score = 0.0;
  double test_score = 0.0;
  double dev_auc = 0.0;
  double test_auc = 0.0;
  double dev_accuracy = 0.0;
  double test_accuracy = 0.0;
};

ProbeRecord make_probe_record(const std::string& model_id, const TaskSpec& task,
                              const ProbeResult& best);
nlohmann::json to_json(const ProbeRecord& r);
ProbeRecord probe_record_from_json(const nlohmann::json& j);

struct ABComparison {
  std::string name;
  std::string group_a;
  std::string group_b;
};

struct ReportInput {
  std::vector<ModelInfo> models;
  std::vector<std::string> tasks;
  std::vector<ProbeRecord> results;
  std::vector<ABComparison> comparisons;
  // Copied into the report verbatim (config hash, root seed, ...).
  nlohmann::json provenance = nlohmann::json::object();
};

struct ModelSummary {
  ModelInfo info;
  double size_mb = 0.0;
  bool complete = false;
  std::vector<std::string> missing_tasks;
  // Per task in ReportInput::tasks order; NaN where missing.
  std::vector<double> dev_auc, test_auc;
  // Averages over tasks; empty when incomplete or any AUC is 0 or 1.
  std::optional<double> avg_dprime_dev, avg_dprime_test;
  std::optional<double> avg_accuracy_dev, avg_accuracy_test;
  bool best_at_size = false;
  bool on_curve = false;
};

inline constexpr std::array<const char*, 4> kOrderingNames = {
    "dprime_dev", "dprime_test", "accuracy_dev", "accuracy_test"};

struct KendallTable {
  // Empty entries are undefined (fewer than two ranked models or an
  // all-tied ordering). The diagonal is 1 by convention.
  std::array<std::array<std::optional<double>, 4>, 4> tau;
  std::size_t num_models = 0;
  bool degenerate = false;
};

struct LeaveOneOut {
  std::string left_out;
  std::vector<std::string> on_curve;
  std::string best;
};

struct ABResult {
  ABComparison comparison;
  // A task name, or "average_dprime".
  std::string measure;
  StatTestResult test;
  // "b>a", "a>b" or "none".
  std::string direction;
};

struct MetricReport {
  std::vector<std::string> tasks;
  std::vector<ModelSummary> models;
  std::vector<ProbeRecord> results;
  KendallTable kendall;
  std::vector<LeaveOneOut> leave_one_out;
  std::vector<ABResult> ab_tests;
  // "model/task" pairs without results.
  std::vector<std::string> gaps;
  nlohmann::json provenance;
};

// Throws Error(kMissingModel) when a result names a model absent from the
// registry; missing results are recorded as gaps instead.
MetricReport run_report(const ReportInput& in);

KendallTable kendall_table(const std::array<std::vector<double>, 4>& orderings);

std::string report_to_json(const MetricReport& r);
// model_id,param_count,size_mb,avg_dprime_dev,avg_dprime_test,best_at_size,on_curve
std::string curve_to_csv(const MetricReport& r);
// One row per model, one column per task (test metric), then average d'.
std::string table_to_csv(const MetricReport& r);

}  // namespace embdistill

#endif  // EMBDISTILL_REPORT_HPP_
