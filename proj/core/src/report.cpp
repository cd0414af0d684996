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

#include "embdistill/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "embdistill/error.hpp"
#include "embdistill/io.hpp"
#include "embdistill/students.hpp"

namespace embdistill {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::optional<double> avg_dprime(const std::vector<double>& aucs) {
  if (aucs.empty()) return std::nullopt;
  for (double a : aucs) {
    if (std::isnan(a)) return std::nullopt;
  }
  const AverageDPrime d = average_d_prime(aucs);
  if (!d.ok()) return std::nullopt;
  return d.value;
}

// Models that no other model beats with at most the same size.
std::vector<bool> pareto(const std::vector<const ModelSummary*>& ms,
                         const std::vector<std::optional<double>>& score) {
  std::vector<bool> on(ms.size(), false);
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (!score[i]) continue;
    bool dominated = false;
    for (std::size_t j = 0; j < ms.size() && !dominated; ++j) {
      if (j == i || !score[j]) continue;
      const std::size_t si = ms[i]->info.param_count, sj = ms[j]->info.param_count;
      const bool no_worse = sj <= si && *score[j] >= *score[i];
      const bool better = sj < si || *score[j] > *score[i];
      dominated = no_worse && better;
    }
    on[i] = !dominated;
  }
  return on;
}

}  // namespace

ProbeRecord make_probe_record(const std::string& model_id, const TaskSpec& task,
                              const ProbeResult& best) {
  ProbeRecord r;
  r.model_id = model_id;
  r.task = task.name;
  r.metric = task.metric;
  r.variant = best.variant;
  r.dev_score = best.dev_score;
  r.test_score = best.test_score;
  r.dev_auc = best.dev.auc;
  r.test_auc = best.test.auc;
  r.dev_accuracy = best.dev.accuracy;
  r.test_accuracy = best.test.accuracy;
  return r;
}

nlohmann::json to_json(const ProbeRecord& r) {
  return {{"model_id", r.model_id},         {"task", r.task},
          {"metric", to_string(r.metric)},  {"variant", to_string(r.variant)},
          {"dev_score", r.dev_score},       {"test_score", r.test_score},
          {"dev_auc", r.dev_auc},           {"test_auc", r.test_auc},
          {"dev_accuracy", r.dev_accuracy}, {"test_accuracy", r.test_accuracy}};
}

ProbeRecord probe_record_from_json(const nlohmann::json& j) {
  try {
    ProbeRecord r;
    r.model_id = j.at("model_id").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.metric = selection_metric_from_string(j.value("metric", std::string("accuracy")));
    r.variant = probe_variant_from_string(j.at("variant").get<std::string>());
    r.dev_score = j.at("dev_score").get<double>();
    r.test_score = j.at("test_score").get<double>();
    r.dev_auc = j.at("dev_auc").get<double>();
    r.test_auc = j.at("test_auc").get<double>();
    r.dev_accuracy = j.at("dev_accuracy").get<double>();
    r.test_accuracy = j.at("test_accuracy").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidInput, std::string("malformed probe result: ") + e.what());
  }
}

KendallTable kendall_table(const std::array<std::vector<double>, 4>& orderings) {
  KendallTable t;
  t.num_models = orderings[0].size();
  for (std::size_t i = 0; i < 4; ++i) {
    t.tau[i][i] = 1.0;
    for (std::size_t j = i + 1; j < 4; ++j) {
      std::optional<double> v;
      try {
        v = kendall_tau(orderings[i], orderings[j]);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerateInput) throw;
        t.degenerate = true;
      }
      t.tau[i][j] = v;
      t.tau[j][i] = v;
    }
  }
  return t;
}

MetricReport run_report(const ReportInput& in) {
  MetricReport rep;
  rep.tasks = in.tasks;
  rep.provenance = in.provenance;

  std::map<std::string, std::size_t> model_index;
  for (const auto& m : in.models) {
    if (!model_index.emplace(m.model_id, rep.models.size()).second) {
      throw Error(ErrorKind::kInvalidInput, "model '" + m.model_id + "' registered twice");
    }
    ModelSummary s;
    s.info = m;
    s.size_mb = size_mb(m.param_count);
    rep.models.push_back(std::move(s));
  }
  std::map<std::pair<std::string, std::string>, const ProbeRecord*> cell;
  for (const auto& r : in.results) {
    if (!model_index.count(r.model_id)) {
      throw Error(ErrorKind::kMissingModel,
                  "results name model '" + r.model_id + "' which is not in the registry");
    }
    if (std::find(in.tasks.begin(), in.tasks.end(), r.task) == in.tasks.end()) continue;
    if (!cell.emplace(std::make_pair(r.model_id, r.task), &r).second) {
      throw Error(ErrorKind::kInvalidInput,
                  "duplicate result for model '" + r.model_id + "' on task '" + r.task + "'");
    }
  }

  for (auto& s : rep.models) {
    std::vector<double> acc_dev, acc_test;
    for (const auto& task : in.tasks) {
      auto it = cell.find({s.info.model_id, task});
      if (it == cell.end()) {
        s.missing_tasks.push_back(task);
        rep.gaps.push_back(s.info.model_id + "/" + task);
        s.dev_auc.push_back(kNaN);
        s.test_auc.push_back(kNaN);
        continue;
      }
      const ProbeRecord& r = *it->second;
      rep.results.push_back(r);
      s.dev_auc.push_back(r.dev_auc);
      s.test_auc.push_back(r.test_auc);
      acc_dev.push_back(r.dev_accuracy);
      acc_test.push_back(r.test_accuracy);
    }
    s.complete = s.missing_tasks.empty() && !in.tasks.empty();
    if (s.complete) {
      s.avg_dprime_dev = avg_dprime(s.dev_auc);
      s.avg_dprime_test = avg_dprime(s.test_auc);
      s.avg_accuracy_dev = mean_of(acc_dev);
      s.avg_accuracy_test = mean_of(acc_test);
    }
  }

  // Ranked models: complete, non-reference, finite averages everywhere.
  std::vector<const ModelSummary*> ranked;
  std::vector<std::size_t> ranked_idx;
  for (std::size_t i = 0; i < rep.models.size(); ++i) {
    const auto& s = rep.models[i];
    if (s.info.reference || !s.complete) continue;
    if (!s.avg_dprime_dev || !s.avg_dprime_test) continue;
    ranked.push_back(&s);
    ranked_idx.push_back(i);
  }

  std::vector<std::optional<double>> dev_score;
  for (const auto* s : ranked) dev_score.push_back(s->avg_dprime_dev);
  const std::vector<bool> on = pareto(ranked, dev_score);
  std::map<std::size_t, std::size_t> best_by_size;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    rep.models[ranked_idx[k]].on_curve = on[k];
    auto [it, fresh] = best_by_size.emplace(ranked[k]->info.param_count, k);
    if (!fresh && *dev_score[k] > *dev_score[it->second]) it->second = k;
  }
  for (const auto& [size, k] : best_by_size) rep.models[ranked_idx[k]].best_at_size = true;

  std::array<std::vector<double>, 4> orderings;
  for (const auto* s : ranked) {
    orderings[0].push_back(*s->avg_dprime_dev);
    orderings[1].push_back(*s->avg_dprime_test);
    orderings[2].push_back(*s->avg_accuracy_dev);
    orderings[3].push_back(*s->avg_accuracy_test);
  }
  rep.kendall = kendall_table(orderings);

  if (in.tasks.size() > 1) {
    for (std::size_t t = 0; t < in.tasks.size(); ++t) {
      LeaveOneOut loo;
      loo.left_out = in.tasks[t];
      std::vector<std::optional<double>> score;
      for (const auto* s : ranked) {
        std::vector<double> aucs = s->dev_auc;
        aucs.erase(aucs.begin() + static_cast<std::ptrdiff_t>(t));
        score.push_back(avg_dprime(aucs));
      }
      const std::vector<bool> keep = pareto(ranked, score);
      std::optional<double> top;
      for (std::size_t k = 0; k < ranked.size(); ++k) {
        if (keep[k]) loo.on_curve.push_back(ranked[k]->info.model_id);
        if (score[k] && (!top || *score[k] > *top)) {
          top = score[k];
          loo.best = ranked[k]->info.model_id;
        }
      }
      rep.leave_one_out.push_back(std::move(loo));
    }
  }

  for (const auto& cmp : in.comparisons) {
    // Pair by seed; only complete models take part.
    std::map<std::uint64_t, const ModelSummary*> a, b;
    for (const auto& s : rep.models) {
      if (!s.complete) continue;
      if (s.info.group == cmp.group_a) a.emplace(s.info.seed, &s);
      if (s.info.group == cmp.group_b) b.emplace(s.info.seed, &s);
    }
    std::vector<std::pair<const ModelSummary*, const ModelSummary*>> pairs;
    for (const auto& [seed, ma] : a) {
      if (auto it = b.find(seed); it != b.end()) pairs.emplace_back(ma, it->second);
    }
    auto add = [&](const std::string& measure, auto&& value) {
      std::vector<double> va, vb;
      for (const auto& [ma, mb] : pairs) {
        const std::optional<double> x = value(*ma), y = value(*mb);
        if (!x || !y) continue;
        va.push_back(*x);
        vb.push_back(*y);
      }
      if (va.size() < 2) {
        rep.gaps.push_back("ab:" + cmp.name + "/" + measure);
        return;
      }
      ABResult r;
      r.comparison = cmp;
      r.measure = measure;
      r.test = paired_t_test(vb, va);
      r.direction = r.test.mean_difference > 0.0   ? "b>a"
                    : r.test.mean_difference < 0.0 ? "a>b"
                                                   : "none";
      rep.ab_tests.push_back(std::move(r));
    };
    for (std::size_t t = 0; t < in.tasks.size(); ++t) {
      add(in.tasks[t], [t](const ModelSummary& s) -> std::optional<double> {
        const double auc = s.test_auc[t];
        if (std::isnan(auc) || auc <= 0.0 || auc >= 1.0) return std::nullopt;
        return d_prime(auc);
      });
    }
    add("average_dprime", [](const ModelSummary& s) { return s.avg_dprime_test; });
  }
  return rep;
}

std::string report_to_json(const MetricReport& r) {
  nlohmann::json j;
  j["format"] = "embdistill-report-v1";
  j["tasks"] = r.tasks;
  j["provenance"] = r.provenance;
  j["gaps"] = r.gaps;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& s : r.models) {
    nlohmann::json aucs_dev = nlohmann::json::array(), aucs_test = nlohmann::json::array();
    for (std::size_t t = 0; t < r.tasks.size(); ++t) {
      aucs_dev.push_back(std::isnan(s.dev_auc[t]) ? nlohmann::json(nullptr) : nlohmann::json(s.dev_auc[t]));
      aucs_test.push_back(std::isnan(s.test_auc[t]) ? nlohmann::json(nullptr) : nlohmann::json(s.test_auc[t]));
    }
    models.push_back({{"model_id", s.info.model_id},
                      {"param_count", s.info.param_count},
                      {"size_mb", s.size_mb},
                      {"reference", s.info.reference},
                      {"group", s.info.group},
                      {"seed", s.info.seed},
                      {"complete", s.complete},
                      {"missing_tasks", s.missing_tasks},
                      {"dev_auc", aucs_dev},
                      {"test_auc", aucs_test},
                      {"avg_dprime_dev", opt_json(s.avg_dprime_dev)},
                      {"avg_dprime_test", opt_json(s.avg_dprime_test)},
                      {"avg_accuracy_dev", opt_json(s.avg_accuracy_dev)},
                      {"avg_accuracy_test", opt_json(s.avg_accuracy_test)},
                      {"best_at_size", s.best_at_size},
                      {"on_curve", s.on_curve}});
  }
  j["models"] = models;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& p : r.results) results.push_back(to_json(p));
  j["results"] = results;
  nlohmann::json tau = nlohmann::json::array();
  for (const auto& row : r.kendall.tau) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& v : row) jr.push_back(opt_json(v));
    tau.push_back(jr);
  }
  j["kendall"] = {{"orderings", kOrderingNames},
                  {"tau", tau},
                  {"num_models", r.kendall.num_models},
                  {"degenerate", r.kendall.degenerate}};
  nlohmann::json loo = nlohmann::json::array();
  for (const auto& l : r.leave_one_out) {
    loo.push_back({{"left_out", l.left_out}, {"on_curve", l.on_curve}, {"best", l.best}});
  }
  j["leave_one_task_out"] = loo;
  nlohmann::json ab = nlohmann::json::array();
  for (const auto& a : r.ab_tests) {
    const char* status = a.test.status == StatTestResult::Status::kOk            ? "ok"
                         : a.test.status == StatTestResult::Status::kInfiniteT ? "infinite_t"
                                                                               : "no_effect";
    ab.push_back({{"name", a.comparison.name},
                  {"group_a", a.comparison.group_a},
                  {"group_b", a.comparison.group_b},
                  {"measure", a.measure},
                  {"n", a.test.n},
                  {"mean_difference", a.test.mean_difference},
                  {"t_statistic", std::isfinite(a.test.t_statistic) ? nlohmann::json(a.test.t_statistic)
                                                                    : nlohmann::json(nullptr)},
                  {"p_value", a.test.p_value},
                  {"status", status},
                  {"direction", a.direction}});
  }
  j["ab_tests"] = ab;
  return j.dump(2) + "\n";
}

std::string curve_to_csv(const MetricReport& r) {
  std::ostringstream os;
  os << "model_id,param_count,size_mb,avg_dprime_dev,avg_dprime_test,best_at_size,on_curve\n";
  std::vector<const ModelSummary*> rows;
  for (const auto& s : r.models) {
    if (!s.info.reference) rows.push_back(&s);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return a->info.param_count < b->info.param_count;
  });
  for (const auto* s : rows) {
    os << s->info.model_id << "," << s->info.param_count << "," << fmt(s->size_mb) << ","
       << fmt(s->avg_dprime_dev) << "," << fmt(s->avg_dprime_test) << ","
       << (s->best_at_size ? 1 : 0) << "," << (s->on_curve ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string table_to_csv(const MetricReport& r) {
  std::map<std::pair<std::string, std::string>, const ProbeRecord*> cell;
  for (const auto& p : r.results) cell[{p.model_id, p.task}] = &p;
  std::ostringstream os;
  os << "model_id,param_count,size_mb";
  for (const auto& t : r.tasks) os << "," << t;
  os << ",avg_dprime_test\n";
  for (const auto& s : r.models) {
    os << s.info.model_id << "," << s.info.param_count << "," << fmt(s.size_mb);
    for (const auto& t : r.tasks) {
      auto it = cell.find({s.info.model_id, t});
      os << "," << (it == cell.end() ? std::string("missing") : fmt(it->second->test_score));
    }
    os << "," << fmt(s.avg_dprime_test) << "\n";
  }
  return os.str();
}

}  // namespace embdistill
