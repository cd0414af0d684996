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

#include "embdistill/probes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "embdistill/error.hpp"

namespace embdistill {
namespace {

constexpr double kGradTolerance = 1e-6;
constexpr int kMaxNewtonIterations = 200;
// Keeps the Hessian invertible along the (flat) shared-bias direction.
constexpr double kBiasRidge = 1e-8;

struct Standardized {
  std::vector<double> mean;
  std::vector<double> inv_scale;
  Eigen::MatrixXd x;  // n x dim
};

Standardized standardize(const LabeledEmbeddings& data) {
  const std::size_t n = data.size();
  const std::size_t d = data.dim;
  Standardized s;
  s.mean.assign(d, 0.0);
  s.inv_scale.assign(d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += data.row(i)[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  bool any_spread = false;
  for (std::size_t j = 0; j < d; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = data.row(i)[j] - s.mean[j];
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd > 0.0) {
      s.inv_scale[j] = 1.0 / sd;
      any_spread = true;
    }
  }
  if (!any_spread) {
    throw Error(ErrorKind::kDegenerateInput,
                "all training embeddings are identical; nothing to probe");
  }
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (data.row(i)[j] - s.mean[j]) * s.inv_scale[j];
    }
  }
  return s;
}

void softmax_rows(Eigen::MatrixXd& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - mx).exp();
    z.row(i) /= z.row(i).sum();
  }
}

// Multinomial logistic regression, parameters theta = [W | b] (K x (d+1)).
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& x, const std::vector<int>& y, std::size_t k,
                    double lambda)
      : y_(y), k_(static_cast<Eigen::Index>(k)), lambda_(lambda) {
    xa_.resize(x.rows(), x.cols() + 1);
    xa_.leftCols(x.cols()) = x;
    xa_.col(x.cols()).setOnes();
    onehot_ = Eigen::MatrixXd::Zero(x.rows(), k_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) onehot_(i, y_[static_cast<std::size_t>(i)]) = 1.0;
  }

  Eigen::Index cols() const { return xa_.cols(); }

  double value(const Eigen::MatrixXd& theta) const {
    Eigen::MatrixXd z = xa_ * theta.transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double mx = z.row(i).maxCoeff();
      const double lse = mx + std::log((z.row(i).array() - mx).exp().sum());
      loss += lse - z(i, y_[static_cast<std::size_t>(i)]);
    }
    loss /= static_cast<double>(z.rows());
    const Eigen::Index d = cols() - 1;
    loss += 0.5 * lambda_ * theta.leftCols(d).squaredNorm();
    loss += 0.5 * kBiasRidge * theta.col(d).squaredNorm();
    return loss;
  }

  // Returns probabilities for reuse by the Hessian.
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& theta, Eigen::MatrixXd* grad) const {
    Eigen::MatrixXd p = xa_ * theta.transpose();
    softmax_rows(p);
    const Eigen::Index d = cols() - 1;
    *grad = (p - onehot_).transpose() * xa_ / static_cast<double>(xa_.rows());
    grad->leftCols(d) += lambda_ * theta.leftCols(d);
    grad->col(d) += kBiasRidge * theta.col(d);
    return p;
  }

  Eigen::MatrixXd hessian(const Eigen::MatrixXd& p) const {
    const Eigen::Index c = cols();
    const Eigen::Index n = xa_.rows();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k_ * c, k_ * c);
    for (Eigen::Index a = 0; a < k_; ++a) {
      for (Eigen::Index b = a; b < k_; ++b) {
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          w(i) = p(i, a) * ((a == b ? 1.0 : 0.0) - p(i, b));
        }
        Eigen::MatrixXd block = xa_.transpose() * (w.asDiagonal() * xa_) / static_cast<double>(n);
        h.block(a * c, b * c, c, c) = block;
        if (a != b) h.block(b * c, a * c, c, c) = block.transpose();
      }
    }
    for (Eigen::Index a = 0; a < k_; ++a) {
      for (Eigen::Index j = 0; j < c; ++j) {
        h(a * c + j, a * c + j) += j + 1 == c ? kBiasRidge : lambda_;
      }
    }
    return h;
  }

 private:
  Eigen::MatrixXd xa_;
  Eigen::MatrixXd onehot_;
  const std::vector<int>& y_;
  Eigen::Index k_;
  double lambda_;
};

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  // Row-major flattening: class blocks are contiguous.
  Eigen::VectorXd v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) v.segment(r * m.cols(), m.cols()) = m.row(r).transpose();
  return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = v.segment(r * cols, cols).transpose();
  return m;
}

Eigen::MatrixXd fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& y, std::size_t k,
                             double lambda) {
  LogisticObjective obj(x, y, k, lambda);
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(kk, obj.cols());
  Eigen::MatrixXd grad;
  double f = obj.value(theta);
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const Eigen::MatrixXd p = obj.gradient(theta, &grad);
    const Eigen::VectorXd g = flatten(grad);
    if (g.norm() <= kGradTolerance) break;
    const Eigen::MatrixXd h = obj.hessian(p);
    Eigen::VectorXd step = h.ldlt().solve(-g);
    if (!step.allFinite() || step.dot(g) >= 0.0) step = -g;
    const Eigen::MatrixXd dir = unflatten(step, kk, obj.cols());
    const double slope = step.dot(g);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::MatrixXd trial = theta + t * dir;
      const double ft = obj.value(trial);
      if (ft <= f + 1e-4 * t * slope) {
        theta = trial;
        f = ft;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // at numerical precision
  }
  return theta;
}

}  // namespace

std::string to_string(ProbeVariant v) {
  switch (v) {
    case ProbeVariant::kLogregStrong: return "logreg-l2-strong";
    case ProbeVariant::kLogregWeak: return "logreg-l2-weak";
    case ProbeVariant::kLda: return "lda";
  }
  return "unknown";
}

ProbeVariant probe_variant_from_string(const std::string& name) {
  for (ProbeVariant v : kProbeVariants) {
    if (to_string(v) == name) return v;
  }
  throw Error(ErrorKind::kConfig, "unknown probe variant '" + name + "'");
}

std::string to_string(SelectionMetric m) {
  return m == SelectionMetric::kAccuracy ? "accuracy" : "eer";
}

SelectionMetric selection_metric_from_string(const std::string& name) {
  if (name == "accuracy") return SelectionMetric::kAccuracy;
  if (name == "eer") return SelectionMetric::kEer;
  throw Error(ErrorKind::kConfig, "unknown selection metric '" + name + "'");
}

ProbeConfig ProbeConfig::defaults(ProbeVariant v, std::uint64_t seed) {
  switch (v) {
    case ProbeVariant::kLogregStrong: return {v, 1.0, seed};
    case ProbeVariant::kLogregWeak: return {v, 1e-3, seed};
    case ProbeVariant::kLda: return {v, 0.1, seed};
  }
  return {};
}

void ProbeConfig::validate() const {
  if (variant == ProbeVariant::kLda) {
    if (!(regularization >= 0.0 && regularization <= 1.0)) {
      throw Error(ErrorKind::kConfig, "LDA shrinkage must lie in [0, 1]");
    }
  } else if (!(regularization > 0.0)) {
    throw Error(ErrorKind::kConfig, "logistic regression needs regularization > 0");
  }
}

LinearProbe::LinearProbe(std::size_t dim, std::size_t num_classes, std::vector<double> mean,
                         std::vector<double> inv_scale, std::vector<double> weights,
                         std::vector<double> bias)
    : dim_(dim),
      num_classes_(num_classes),
      mean_(std::move(mean)),
      inv_scale_(std::move(inv_scale)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {}

std::vector<double> LinearProbe::decision(const float* x) const {
  std::vector<double> z(bias_);
  std::vector<double> xs(dim_);
  for (std::size_t j = 0; j < dim_; ++j) xs[j] = (x[j] - mean_[j]) * inv_scale_[j];
  for (std::size_t k = 0; k < num_classes_; ++k) {
    const double* w = weights_.data() + k * dim_;
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) acc += w[j] * xs[j];
    z[k] += acc;
  }
  return z;
}

MulticlassScores LinearProbe::score(const LabeledEmbeddings& data) const {
  if (data.dim != dim_) throw Error(ErrorKind::kShapeMismatch, "probe input dimension mismatch");
  MulticlassScores out;
  out.num_classes = num_classes_;
  out.labels = data.labels;
  out.scores.resize(data.size() * num_classes_);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> z = decision(data.row(i));
    const double mx = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
      v = std::exp(v - mx);
      total += v;
    }
    for (std::size_t k = 0; k < num_classes_; ++k) out.scores[i * num_classes_ + k] = z[k] / total;
  }
  return out;
}

std::vector<int> LinearProbe::predict(const LabeledEmbeddings& data) const {
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> z = decision(data.row(i));
    out[i] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

LinearProbe train_probe(const LabeledEmbeddings& train, std::size_t num_classes,
                        const ProbeConfig& pc) {
  pc.validate();
  if (train.size() == 0 || train.rows.size() != train.size() * train.dim) {
    throw Error(ErrorKind::kInvalidInput, "training embeddings are empty or malformed");
  }
  if (num_classes < 2) throw Error(ErrorKind::kInvalidInput, "a probe needs at least two classes");
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : train.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw Error(ErrorKind::kInvalidInput, "label outside the declared class set");
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  const auto present = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
  if (present < 2) {
    throw Error(ErrorKind::kDegenerateInput, "training split contains a single class");
  }

  Standardized s = standardize(train);
  const std::size_t d = train.dim;
  const std::size_t n = train.size();
  std::vector<double> weights(num_classes * d, 0.0);
  std::vector<double> bias(num_classes, 0.0);

  if (pc.variant == ProbeVariant::kLda) {
    const auto dd = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes), dd);
    for (std::size_t i = 0; i < n; ++i) {
      means.row(train.labels[i]) += s.x.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (counts[k] > 0) means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(counts[k]);
    }
    Eigen::MatrixXd centered = s.x;
    for (std::size_t i = 0; i < n; ++i) {
      centered.row(static_cast<Eigen::Index>(i)) -= means.row(train.labels[i]);
    }
    // Maximum-likelihood pooled covariance: invariant to duplicating the data.
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    const double avg_var = cov.trace() / static_cast<double>(d);
    Eigen::MatrixXd shrunk;
    if (avg_var <= 1e-12) {
      shrunk = Eigen::MatrixXd::Identity(dd, dd);  // classes are point masses
    } else {
      shrunk = (1.0 - pc.regularization) * cov +
               pc.regularization * avg_var * Eigen::MatrixXd::Identity(dd, dd);
    }
    const Eigen::LDLT<Eigen::MatrixXd> solver(shrunk);
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (counts[k] == 0) {
        bias[k] = -1e30;
        continue;
      }
      const Eigen::VectorXd mu = means.row(static_cast<Eigen::Index>(k)).transpose();
      const Eigen::VectorXd w = solver.solve(mu);
      for (std::size_t j = 0; j < d; ++j) weights[k * d + j] = w(static_cast<Eigen::Index>(j));
      bias[k] = -0.5 * mu.dot(w) +
                std::log(static_cast<double>(counts[k]) / static_cast<double>(n));
    }
  } else {
    const Eigen::MatrixXd theta = fit_logistic(s.x, train.labels, num_classes, pc.regularization);
    for (std::size_t k = 0; k < num_classes; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        weights[k * d + j] = theta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      }
      bias[k] = theta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    }
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorKind::kDegenerateInput, "probe fit produced non-finite weights");
  }
  return LinearProbe(d, num_classes, std::move(s.mean), std::move(s.inv_scale),
                     std::move(weights), std::move(bias));
}

SplitScores score_split(const LinearProbe& probe, const LabeledEmbeddings& data,
                        const TaskSpec& task) {
  if (data.size() == 0) throw Error(ErrorKind::kInvalidInput, "cannot score an empty split");
  SplitScores out;
  out.scores = probe.score(data);
  const std::vector<int> pred = probe.predict(data);
  out.accuracy = accuracy(pred, data.labels);
  out.auc = macro_ovr_auc(out.scores);
  if (task.num_classes == 2) {
    ScoredExamples b;
    b.labels = data.labels;
    b.scores.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) b.scores[i] = out.scores.scores[i * 2 + 1];
    out.eer = equal_error_rate(b);
  } else {
    out.eer = std::numeric_limits<double>::quiet_NaN();
  }
  out.metric = task.metric == SelectionMetric::kEer ? out.eer : out.accuracy;
  return out;
}

namespace {

bool better(double candidate, double incumbent, SelectionMetric m) {
  return m == SelectionMetric::kEer ? candidate < incumbent : candidate > incumbent;
}

void check_task(const TaskSpec& task) {
  if (task.num_classes < 2) throw Error(ErrorKind::kConfig, "task needs at least two classes");
  if (task.metric == SelectionMetric::kEer && task.num_classes != 2) {
    throw Error(ErrorKind::kConfig, "EER selection requires a binary task");
  }
}

}  // namespace

DevSelection select_on_dev(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                           const TaskSpec& task, std::uint64_t seed) {
  check_task(task);
  if (train.size() == 0) throw Error(ErrorKind::kInvalidInput, "train split is empty");
  if (dev.size() == 0) throw Error(ErrorKind::kInvalidInput, "dev split is empty");
  DevSelection sel;
  std::size_t best = 0;
  for (ProbeVariant v : kProbeVariants) {
    LinearProbe probe = train_probe(train, task.num_classes, ProbeConfig::defaults(v, seed));
    sel.dev.push_back(score_split(probe, dev, task));
    sel.variants.push_back(v);
    sel.probes.push_back(std::move(probe));
    if (sel.dev.size() > 1 && better(sel.dev.back().metric, sel.dev[best].metric, task.metric)) {
      best = sel.dev.size() - 1;
    }
  }
  sel.best = sel.variants[best];
  return sel;
}

TaskEvaluation evaluate_task(const LabeledEmbeddings& train, const LabeledEmbeddings& dev,
                             const LabeledEmbeddings& test, const TaskSpec& task,
                             std::uint64_t seed) {
  if (test.size() == 0) throw Error(ErrorKind::kInvalidInput, "test split is empty");
  // Selection completes before the test split is touched.
  DevSelection sel = select_on_dev(train, dev, task, seed);
  TaskEvaluation out;
  for (std::size_t i = 0; i < sel.variants.size(); ++i) {
    ProbeResult r;
    r.variant = sel.variants[i];
    r.dev = std::move(sel.dev[i]);
    r.dev_score = r.dev.metric;
    r.test = score_split(sel.probes[i], test, task);
    r.test_score = r.test.metric;
    if (r.variant == sel.best) out.best = r;
    out.all.push_back(std::move(r));
  }
  return out;
}

}  // namespace embdistill
