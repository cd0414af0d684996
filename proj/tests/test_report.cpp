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

#include <gtest/gtest.h>

#include <cmath>

#include "embdistill/pipeline.hpp"
#include "embdistill/report.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

namespace embdistill {
namespace {

using testing_helpers::error_kind_of;

ProbeRecord rec(const std::string& model, const std::string& task, double auc, double acc) {
  ProbeRecord r;
  r.model_id = model;
  r.task = task;
  r.dev_auc = auc;
  r.test_auc = auc - 0.01;
  r.dev_accuracy = acc;
  r.test_accuracy = acc - 0.01;
  r.dev_score = acc;
  r.test_score = acc - 0.01;
  return r;
}

TEST(Report, SingleModelSingleTask) {
  ReportInput in;
  in.models = {{"m", 1000}};
  in.tasks = {"t"};
  in.results = {rec("m", "t", 0.8, 0.7)};
  const MetricReport r = run_report(in);
  const std::string csv = curve_to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_TRUE(r.kendall.degenerate);
  EXPECT_TRUE(r.models[0].on_curve);
  EXPECT_TRUE(r.models[0].best_at_size);
  EXPECT_NEAR(*r.models[0].avg_dprime_dev, std::sqrt(2.0) * oracle::normal_quantile(0.8), 1e-9);
}

TEST(Report, DominanceGivesUnitKendallAndMarksTheWinner) {
  ReportInput in;
  in.models = {{"small", 100}, {"big", 100}, {"teacher", 0, true}};
  in.tasks = {"a", "b"};
  for (const char* t : {"a", "b"}) {
    in.results.push_back(rec("small", t, 0.7, 0.6));
    in.results.push_back(rec("big", t, 0.9, 0.8));
    in.results.push_back(rec("teacher", t, 0.95, 0.9));
  }
  const MetricReport r = run_report(in);
  EXPECT_TRUE(r.models[1].best_at_size);
  EXPECT_FALSE(r.models[0].best_at_size);
  EXPECT_FALSE(r.models[2].on_curve);  // references are not ranked
  EXPECT_EQ(r.kendall.num_models, 2u);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.kendall.tau[i][j], 1.0);
  }
}

TEST(Report, CurveMarksDependOnlyOnDevQuantities) {
  ReportInput in;
  in.models = {{"x", 10}, {"y", 20}, {"z", 30}};
  in.tasks = {"a"};
  in.results = {rec("x", "a", 0.70, 0.6), rec("y", "a", 0.65, 0.6), rec("z", "a", 0.90, 0.8)};
  const MetricReport base = run_report(in);
  EXPECT_TRUE(base.models[0].on_curve);
  EXPECT_FALSE(base.models[1].on_curve);  // bigger and worse than x
  EXPECT_TRUE(base.models[2].on_curve);
  for (auto& res : in.results) {
    res.test_auc = 1.0 - res.test_auc;
    res.test_accuracy = 0.0;
  }
  const MetricReport shuffled = run_report(in);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(shuffled.models[i].on_curve, base.models[i].on_curve);
    EXPECT_EQ(shuffled.models[i].best_at_size, base.models[i].best_at_size);
  }
}

TEST(Report, KendallTableIsSymmetricWithUnitDiagonal) {
  std::array<std::vector<double>, 4> o = {std::vector<double>{1, 2, 3, 4, 5},
                                          {2, 1, 3, 5, 4},
                                          {5, 4, 3, 2, 1},
                                          {1, 3, 2, 4, 4}};
  const KendallTable t = kendall_table(o);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.tau[i][i], 1.0);
    for (std::size_t j = 0; j < 4; ++j) {
      ASSERT_TRUE(t.tau[i][j]);
      EXPECT_EQ(*t.tau[i][j], *t.tau[j][i]);
      if (i != j) EXPECT_NEAR(*t.tau[i][j], oracle::kendall_tau_b(o[i], o[j]), 1e-12);
    }
  }
  EXPECT_FALSE(t.degenerate);
}

TEST(Report, GapsAreMarkedAndUnknownModelsRejected) {
  ReportInput in;
  in.models = {{"m", 10}, {"n", 20}};
  in.tasks = {"a", "b"};
  in.results = {rec("m", "a", 0.8, 0.7), rec("m", "b", 0.8, 0.7), rec("n", "a", 0.8, 0.7)};
  const MetricReport r = run_report(in);
  ASSERT_EQ(r.gaps.size(), 1u);
  EXPECT_EQ(r.gaps[0], "n/b");
  EXPECT_FALSE(r.models[1].complete);
  EXPECT_FALSE(r.models[1].avg_dprime_dev);
  in.results.push_back(rec("ghost", "a", 0.8, 0.7));
  EXPECT_EQ(error_kind_of([&] { run_report(in); }), ErrorKind::kMissingModel);
}

TEST(Report, LeaveOneTaskOutRecomputesTheCurve) {
  ReportInput in;
  in.models = {{"p", 10}, {"q", 20}};
  in.tasks = {"a", "b", "c"};
  // q wins only because of task a.
  in.results = {rec("p", "a", 0.60, 0.5), rec("p", "b", 0.80, 0.7), rec("p", "c", 0.80, 0.7),
                rec("q", "a", 0.99, 0.9), rec("q", "b", 0.75, 0.7), rec("q", "c", 0.75, 0.7)};
  const MetricReport r = run_report(in);
  ASSERT_EQ(r.leave_one_out.size(), 3u);
  EXPECT_EQ(r.leave_one_out[0].left_out, "a");
  EXPECT_EQ(r.leave_one_out[0].best, "p");
  EXPECT_EQ(r.leave_one_out[0].on_curve, std::vector<std::string>{"p"});
  EXPECT_EQ(r.leave_one_out[1].best, "q");
}

TEST(Report, PairedComparisonsBySeed) {
  ReportInput in;
  in.tasks = {"a"};
  in.comparisons = {{"mix", "single", "combined"}};
  const double gain[] = {0.02, 0.03, 0.025, 0.015, 0.03};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const std::string a = "single" + std::to_string(s), b = "combined" + std::to_string(s);
    in.models.push_back({a, 10, false, "single", s});
    in.models.push_back({b, 10, false, "combined", s});
    in.results.push_back(rec(a, "a", 0.70 + 0.01 * s, 0.6));
    in.results.push_back(rec(b, "a", 0.70 + 0.01 * s + gain[s], 0.6));
  }
  const MetricReport r = run_report(in);
  ASSERT_EQ(r.ab_tests.size(), 2u);
  EXPECT_EQ(r.ab_tests[0].measure, "a");
  EXPECT_EQ(r.ab_tests[1].measure, "average_dprime");
  EXPECT_EQ(r.ab_tests[1].direction, "b>a");
  EXPECT_EQ(r.ab_tests[1].test.n, 5u);
  EXPECT_LT(r.ab_tests[1].test.p_value, 0.05);
}

TEST(Report, OutputsAreDeterministicAndAverageIsRecomputable) {
  ReportInput in;
  in.models = {{"m", 1 << 20}, {"n", 2 << 20}};
  in.tasks = {"a", "b"};
  in.results = {rec("m", "a", 0.8, 0.7), rec("m", "b", 0.85, 0.7), rec("n", "a", 0.9, 0.8),
                rec("n", "b", 0.91, 0.8)};
  in.provenance = {{"root_seed", 3}};
  const MetricReport r1 = run_report(in), r2 = run_report(in);
  EXPECT_EQ(report_to_json(r1), report_to_json(r2));
  EXPECT_EQ(curve_to_csv(r1), curve_to_csv(r2));
  EXPECT_EQ(table_to_csv(r1), table_to_csv(r2));
  EXPECT_DOUBLE_EQ(r1.models[0].size_mb, 4.0);
  const nlohmann::json j = nlohmann::json::parse(report_to_json(r1));
  EXPECT_EQ(j["provenance"]["root_seed"], 3);
  for (const auto& m : r1.models) {
    const std::vector<double> aucs(m.test_auc.begin(), m.test_auc.end());
    EXPECT_EQ(average_d_prime(aucs).value, *m.avg_dprime_test);
  }
}

TEST(ProbeRecords, JsonLinesRoundTrip) {
  std::vector<ProbeRecord> rs = {rec("m", "a", 0.8, 0.7), rec("n", "b", 0.6, 0.55)};
  rs[1].metric = SelectionMetric::kEer;
  rs[1].variant = ProbeVariant::kLda;
  const std::string text = probe_records_to_jsonl(rs);
  const auto back = probe_records_from_jsonl(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(probe_records_to_jsonl(back), text);
  EXPECT_EQ(back[1].variant, ProbeVariant::kLda);
  EXPECT_EQ(error_kind_of([] { probe_records_from_jsonl("{\"model_id\":1}\n"); }),
            ErrorKind::kInvalidInput);
}

TEST(LossCurve, Csv) {
  EXPECT_EQ(loss_curve_to_csv({0.5, 0.25}), "step,loss\n0,0.5\n1,0.25\n");
}

}  // namespace
}  // namespace embdistill
