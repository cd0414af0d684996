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

// Minimal reverse-mode layer library for the student networks. Every layer
// reads its parameters from a slice of one flat vector and writes gradients
// into the matching slice of a flat gradient vector. Activations needed by
// the backward pass live in a per-call Tape, so layers stay immutable.

#ifndef EMBDISTILL_SRC_NN_HPP_
#define EMBDISTILL_SRC_NN_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace embdistill::nn {

// len x ch, row-major.
template <typename Real>
struct Seq {
  std::size_t len = 0;
  std::size_t ch = 0;
  std::vector<Real> v;

  Seq() = default;
  Seq(std::size_t l, std::size_t c) : len(l), ch(c), v(l * c, Real(0)) {}

  Real* row(std::size_t t) { return v.data() + t * ch; }
  const Real* row(std::size_t t) const { return v.data() + t * ch; }
};

template <typename Real>
struct Tape {
  std::vector<Seq<Real>> saved;
  std::vector<Tape> children;
};

template <typename Real>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::size_t param_count() const = 0;
  virtual void init(Real* p, std::mt19937_64& rng) const = 0;
  virtual Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const = 0;
  // Adds parameter gradients into dp. Returns dL/dx when need_dx is set.
  virtual Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                             bool need_dx) const = 0;
};

template <typename Real>
void fill_normal(Real* p, std::size_t n, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<Real>(normal(rng));
}

// y[t] = b + x[t] W for every row; W is cin x cout.
template <typename Real>
void linear_rows(const Real* w, const Real* b, const Seq<Real>& x, std::size_t cout,
                 Seq<Real>& y) {
  y = Seq<Real>(x.len, cout);
  for (std::size_t t = 0; t < x.len; ++t) {
    Real* yr = y.row(t);
    for (std::size_t o = 0; o < cout; ++o) yr[o] = b[o];
    const Real* xr = x.row(t);
    for (std::size_t ci = 0; ci < x.ch; ++ci) {
      const Real xv = xr[ci];
      const Real* wr = w + ci * cout;
      for (std::size_t o = 0; o < cout; ++o) yr[o] += xv * wr[o];
    }
  }
}

template <typename Real>
void linear_rows_backward(const Real* w, const Seq<Real>& x, const Seq<Real>& dy, Real* dw,
                          Real* db, Seq<Real>* dx) {
  const std::size_t cout = dy.ch;
  if (dx != nullptr) *dx = Seq<Real>(x.len, x.ch);
  for (std::size_t t = 0; t < x.len; ++t) {
    const Real* dyr = dy.row(t);
    const Real* xr = x.row(t);
    for (std::size_t o = 0; o < cout; ++o) db[o] += dyr[o];
    for (std::size_t ci = 0; ci < x.ch; ++ci) {
      const Real xv = xr[ci];
      Real* dwr = dw + ci * cout;
      for (std::size_t o = 0; o < cout; ++o) dwr[o] += xv * dyr[o];
    }
    if (dx != nullptr) {
      Real* dxr = dx->row(t);
      for (std::size_t ci = 0; ci < x.ch; ++ci) {
        const Real* wr = w + ci * cout;
        Real acc = 0;
        for (std::size_t o = 0; o < cout; ++o) acc += wr[o] * dyr[o];
        dxr[ci] = acc;
      }
    }
  }
}

// 1-D convolution over time with zero padding (k-1)/2 on both sides.
// Dense weights are laid out [k][cin][cout]; depthwise weights [k][ch].
template <typename Real>
class Conv1d final : public Layer<Real> {
 public:
  Conv1d(std::size_t cin, std::size_t cout, std::size_t kernel, std::size_t stride,
         bool depthwise)
      : cin_(cin), cout_(cout), k_(kernel), stride_(stride), depthwise_(depthwise) {}

  std::size_t weight_count() const { return depthwise_ ? k_ * cout_ : k_ * cin_ * cout_; }
  std::size_t param_count() const override { return weight_count() + cout_; }

  void init(Real* p, std::mt19937_64& rng) const override {
    const std::size_t fan_in = depthwise_ ? k_ : k_ * cin_;
    fill_normal(p, weight_count(), 1.0 / std::sqrt(static_cast<double>(fan_in)), rng);
    for (std::size_t o = 0; o < cout_; ++o) p[weight_count() + o] = Real(0);
  }

  std::size_t out_len(std::size_t len) const {
    const std::size_t pad = (k_ - 1) / 2;
    return (len + 2 * pad - k_) / stride_ + 1;
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    const Real* w = p;
    const Real* b = p + weight_count();
    const std::size_t pad = (k_ - 1) / 2;
    const std::size_t olen = out_len(x.len);
    Seq<Real> y(olen, cout_);
    for (std::size_t t = 0; t < olen; ++t) {
      Real* yr = y.row(t);
      for (std::size_t o = 0; o < cout_; ++o) yr[o] = b[o];
      for (std::size_t j = 0; j < k_; ++j) {
        const long long src = static_cast<long long>(t * stride_ + j) - static_cast<long long>(pad);
        if (src < 0 || src >= static_cast<long long>(x.len)) continue;
        const Real* xr = x.row(static_cast<std::size_t>(src));
        if (depthwise_) {
          const Real* wj = w + j * cout_;
          for (std::size_t c = 0; c < cout_; ++c) yr[c] += wj[c] * xr[c];
        } else {
          const Real* wj = w + j * cin_ * cout_;
          for (std::size_t ci = 0; ci < cin_; ++ci) {
            const Real xv = xr[ci];
            const Real* wr = wj + ci * cout_;
            for (std::size_t o = 0; o < cout_; ++o) yr[o] += xv * wr[o];
          }
        }
      }
    }
    tape.saved.push_back(std::move(x));
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool need_dx) const override {
    const Seq<Real>& x = tape.saved[0];
    const Real* w = p;
    Real* dw = dp;
    Real* db = dp + weight_count();
    const std::size_t pad = (k_ - 1) / 2;
    Seq<Real> dx;
    if (need_dx) dx = Seq<Real>(x.len, cin_);
    for (std::size_t t = 0; t < dy.len; ++t) {
      const Real* dyr = dy.row(t);
      for (std::size_t o = 0; o < cout_; ++o) db[o] += dyr[o];
      for (std::size_t j = 0; j < k_; ++j) {
        const long long src = static_cast<long long>(t * stride_ + j) - static_cast<long long>(pad);
        if (src < 0 || src >= static_cast<long long>(x.len)) continue;
        const auto s = static_cast<std::size_t>(src);
        const Real* xr = x.row(s);
        if (depthwise_) {
          Real* dwj = dw + j * cout_;
          const Real* wj = w + j * cout_;
          for (std::size_t c = 0; c < cout_; ++c) dwj[c] += dyr[c] * xr[c];
          if (need_dx) {
            Real* dxr = dx.row(s);
            for (std::size_t c = 0; c < cout_; ++c) dxr[c] += dyr[c] * wj[c];
          }
        } else {
          Real* dwj = dw + j * cin_ * cout_;
          const Real* wj = w + j * cin_ * cout_;
          for (std::size_t ci = 0; ci < cin_; ++ci) {
            const Real xv = xr[ci];
            Real* dwr = dwj + ci * cout_;
            for (std::size_t o = 0; o < cout_; ++o) dwr[o] += xv * dyr[o];
          }
          if (need_dx) {
            Real* dxr = dx.row(s);
            for (std::size_t ci = 0; ci < cin_; ++ci) {
              const Real* wr = wj + ci * cout_;
              Real acc = 0;
              for (std::size_t o = 0; o < cout_; ++o) acc += wr[o] * dyr[o];
              dxr[ci] += acc;
            }
          }
        }
      }
    }
    return dx;
  }

 private:
  std::size_t cin_, cout_, k_, stride_;
  bool depthwise_;
};

// x * sigmoid(x); smooth, so finite differences agree with the analytic
// gradient everywhere.
template <typename Real>
class Silu final : public Layer<Real> {
 public:
  std::size_t param_count() const override { return 0; }
  void init(Real*, std::mt19937_64&) const override {}

  Seq<Real> forward(const Real*, Seq<Real> x, Tape<Real>& tape) const override {
    Seq<Real> y(x.len, x.ch);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
      const Real s = Real(1) / (Real(1) + std::exp(-x.v[i]));
      y.v[i] = x.v[i] * s;
    }
    tape.saved.push_back(std::move(x));
    return y;
  }

  Seq<Real> backward(const Real*, const Tape<Real>& tape, Seq<Real> dy, Real*,
                     bool) const override {
    const Seq<Real>& x = tape.saved[0];
    for (std::size_t i = 0; i < x.v.size(); ++i) {
      const Real s = Real(1) / (Real(1) + std::exp(-x.v[i]));
      dy.v[i] *= s * (Real(1) + x.v[i] * (Real(1) - s));
    }
    return dy;
  }
};

// Per-row normalization over channels with learned gain and bias.
template <typename Real>
class LayerNorm final : public Layer<Real> {
 public:
  explicit LayerNorm(std::size_t ch) : ch_(ch) {}

  std::size_t param_count() const override { return 2 * ch_; }
  void init(Real* p, std::mt19937_64&) const override {
    for (std::size_t c = 0; c < ch_; ++c) {
      p[c] = Real(1);
      p[ch_ + c] = Real(0);
    }
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    Seq<Real> xhat(x.len, ch_);
    Seq<Real> inv(x.len, 1);
    Seq<Real> y(x.len, ch_);
    for (std::size_t t = 0; t < x.len; ++t) {
      const Real* xr = x.row(t);
      Real mean = 0;
      for (std::size_t c = 0; c < ch_; ++c) mean += xr[c];
      mean /= static_cast<Real>(ch_);
      Real var = 0;
      for (std::size_t c = 0; c < ch_; ++c) var += (xr[c] - mean) * (xr[c] - mean);
      var /= static_cast<Real>(ch_);
      const Real is = Real(1) / std::sqrt(var + kEps);
      inv.v[t] = is;
      for (std::size_t c = 0; c < ch_; ++c) {
        const Real h = (xr[c] - mean) * is;
        xhat.row(t)[c] = h;
        y.row(t)[c] = p[c] * h + p[ch_ + c];
      }
    }
    tape.saved.push_back(std::move(xhat));
    tape.saved.push_back(std::move(inv));
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool need_dx) const override {
    const Seq<Real>& xhat = tape.saved[0];
    const Seq<Real>& inv = tape.saved[1];
    Seq<Real> dx;
    if (need_dx) dx = Seq<Real>(dy.len, ch_);
    const auto n = static_cast<Real>(ch_);
    for (std::size_t t = 0; t < dy.len; ++t) {
      const Real* dyr = dy.row(t);
      const Real* hr = xhat.row(t);
      Real sum_g = 0, sum_gh = 0;
      for (std::size_t c = 0; c < ch_; ++c) {
        dp[c] += dyr[c] * hr[c];
        dp[ch_ + c] += dyr[c];
        const Real g = dyr[c] * p[c];
        sum_g += g;
        sum_gh += g * hr[c];
      }
      if (need_dx) {
        Real* dxr = dx.row(t);
        for (std::size_t c = 0; c < ch_; ++c) {
          const Real g = dyr[c] * p[c];
          dxr[c] = inv.v[t] / n * (n * g - sum_g - hr[c] * sum_gh);
        }
      }
    }
    return dx;
  }

 private:
  static constexpr Real kEps = Real(1e-5);
  std::size_t ch_;
};

// Single-head scaled dot-product self-attention with input and output
// projections. Projection weights are laid out [in][out].
template <typename Real>
class SelfAttention final : public Layer<Real> {
 public:
  explicit SelfAttention(std::size_t ch) : ch_(ch) {}

  std::size_t block() const { return ch_ * ch_ + ch_; }
  std::size_t param_count() const override { return 4 * block(); }

  void init(Real* p, std::mt19937_64& rng) const override {
    for (std::size_t i = 0; i < 4; ++i) {
      Real* w = p + i * block();
      fill_normal(w, ch_ * ch_, 1.0 / std::sqrt(static_cast<double>(ch_)), rng);
      for (std::size_t o = 0; o < ch_; ++o) w[ch_ * ch_ + o] = Real(0);
    }
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    Seq<Real> q, k, v, o, y;
    linear_rows(weight(p, 0), bias(p, 0), x, ch_, q);
    linear_rows(weight(p, 1), bias(p, 1), x, ch_, k);
    linear_rows(weight(p, 2), bias(p, 2), x, ch_, v);
    const std::size_t n = x.len;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(ch_));
    Seq<Real> a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      Real* ar = a.row(i);
      Real mx = -std::numeric_limits<Real>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        Real s = 0;
        const Real* qi = q.row(i);
        const Real* kj = k.row(j);
        for (std::size_t c = 0; c < ch_; ++c) s += qi[c] * kj[c];
        ar[j] = s * scale;
        mx = std::max(mx, ar[j]);
      }
      Real z = 0;
      for (std::size_t j = 0; j < n; ++j) {
        ar[j] = std::exp(ar[j] - mx);
        z += ar[j];
      }
      for (std::size_t j = 0; j < n; ++j) ar[j] /= z;
    }
    o = Seq<Real>(n, ch_);
    for (std::size_t i = 0; i < n; ++i) {
      Real* orow = o.row(i);
      const Real* ar = a.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const Real aij = ar[j];
        const Real* vj = v.row(j);
        for (std::size_t c = 0; c < ch_; ++c) orow[c] += aij * vj[c];
      }
    }
    linear_rows(weight(p, 3), bias(p, 3), o, ch_, y);
    tape.saved.push_back(std::move(x));
    tape.saved.push_back(std::move(q));
    tape.saved.push_back(std::move(k));
    tape.saved.push_back(std::move(v));
    tape.saved.push_back(std::move(a));
    tape.saved.push_back(std::move(o));
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool need_dx) const override {
    const Seq<Real>& x = tape.saved[0];
    const Seq<Real>& q = tape.saved[1];
    const Seq<Real>& k = tape.saved[2];
    const Seq<Real>& v = tape.saved[3];
    const Seq<Real>& a = tape.saved[4];
    const Seq<Real>& o = tape.saved[5];
    const std::size_t n = x.len;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(ch_));

    Seq<Real> d_o;
    linear_rows_backward(weight(p, 3), o, dy, dweight(dp, 3), dbias(dp, 3), &d_o);

    Seq<Real> ds(n, n);
    Seq<Real> dv(n, ch_);
    for (std::size_t i = 0; i < n; ++i) {
      const Real* ar = a.row(i);
      const Real* dor = d_o.row(i);
      Real* dsr = ds.row(i);
      Real dot = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const Real* vj = v.row(j);
        Real da = 0;
        for (std::size_t c = 0; c < ch_; ++c) da += dor[c] * vj[c];
        dsr[j] = da;
        dot += da * ar[j];
        Real* dvj = dv.row(j);
        for (std::size_t c = 0; c < ch_; ++c) dvj[c] += ar[j] * dor[c];
      }
      for (std::size_t j = 0; j < n; ++j) dsr[j] = ar[j] * (dsr[j] - dot) * scale;
    }
    Seq<Real> dq(n, ch_), dk(n, ch_);
    for (std::size_t i = 0; i < n; ++i) {
      const Real* dsr = ds.row(i);
      Real* dqi = dq.row(i);
      const Real* qi = q.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const Real s = dsr[j];
        const Real* kj = k.row(j);
        Real* dkj = dk.row(j);
        for (std::size_t c = 0; c < ch_; ++c) {
          dqi[c] += s * kj[c];
          dkj[c] += s * qi[c];
        }
      }
    }
    Seq<Real> dxq, dxk, dxv;
    linear_rows_backward(weight(p, 0), x, dq, dweight(dp, 0), dbias(dp, 0),
                         need_dx ? &dxq : nullptr);
    linear_rows_backward(weight(p, 1), x, dk, dweight(dp, 1), dbias(dp, 1),
                         need_dx ? &dxk : nullptr);
    linear_rows_backward(weight(p, 2), x, dv, dweight(dp, 2), dbias(dp, 2),
                         need_dx ? &dxv : nullptr);
    if (!need_dx) return {};
    for (std::size_t i = 0; i < dxq.v.size(); ++i) dxq.v[i] += dxk.v[i] + dxv.v[i];
    return dxq;
  }

 private:
  const Real* weight(const Real* p, std::size_t i) const { return p + i * block(); }
  const Real* bias(const Real* p, std::size_t i) const { return p + i * block() + ch_ * ch_; }
  Real* dweight(Real* p, std::size_t i) const { return p + i * block(); }
  Real* dbias(Real* p, std::size_t i) const { return p + i * block() + ch_ * ch_; }

  std::size_t ch_;
};

// Mean over the time axis. Rows are laid out time-major over `groups`
// interleaved positions (row = t * groups + g); each position is pooled
// separately and the results concatenated: len x ch -> 1 x (groups * ch).
template <typename Real>
class MeanPool final : public Layer<Real> {
 public:
  explicit MeanPool(std::size_t groups = 1) : groups_(groups) {}

  std::size_t param_count() const override { return 0; }
  void init(Real*, std::mt19937_64&) const override {}

  Seq<Real> forward(const Real*, Seq<Real> x, Tape<Real>& tape) const override {
    const std::size_t steps = x.len / groups_;
    Seq<Real> y(1, groups_ * x.ch);
    for (std::size_t t = 0; t < steps * groups_; ++t) {
      const Real* xr = x.row(t);
      Real* yr = y.v.data() + (t % groups_) * x.ch;
      for (std::size_t c = 0; c < x.ch; ++c) yr[c] += xr[c];
    }
    for (auto& v : y.v) v /= static_cast<Real>(steps);
    Seq<Real> shape(x.len, 0);
    tape.saved.push_back(std::move(shape));
    return y;
  }

  Seq<Real> backward(const Real*, const Tape<Real>& tape, Seq<Real> dy, Real*,
                     bool need_dx) const override {
    if (!need_dx) return {};
    const std::size_t len = tape.saved[0].len;
    const std::size_t ch = dy.ch / groups_;
    const std::size_t steps = len / groups_;
    Seq<Real> dx(len, ch);
    const Real inv = Real(1) / static_cast<Real>(steps);
    for (std::size_t t = 0; t < steps * groups_; ++t) {
      const Real* dyr = dy.v.data() + (t % groups_) * ch;
      for (std::size_t c = 0; c < ch; ++c) dx.row(t)[c] = dyr[c] * inv;
    }
    return dx;
  }

 private:
  std::size_t groups_;
};

// Row-wise affine map (a 1x1 convolution), weights [in][out].
template <typename Real>
class Dense final : public Layer<Real> {
 public:
  Dense(std::size_t cin, std::size_t cout) : cin_(cin), cout_(cout) {}

  std::size_t param_count() const override { return cin_ * cout_ + cout_; }
  void init(Real* p, std::mt19937_64& rng) const override {
    fill_normal(p, cin_ * cout_, 1.0 / std::sqrt(static_cast<double>(cin_)), rng);
    for (std::size_t o = 0; o < cout_; ++o) p[cin_ * cout_ + o] = Real(0);
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    Seq<Real> y;
    linear_rows(p, p + cin_ * cout_, x, cout_, y);
    tape.saved.push_back(std::move(x));
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool need_dx) const override {
    Seq<Real> dx;
    linear_rows_backward(p, tape.saved[0], dy, dp, dp + cin_ * cout_, need_dx ? &dx : nullptr);
    return dx;
  }

 private:
  std::size_t cin_, cout_;
};

// Cuts a frames x bins input into non-overlapping patch_frames x patch_bins
// tiles (trailing remainders dropped), projects each tile to ch channels and
// adds a fixed sinusoidal position code. Only valid as the first layer.
template <typename Real>
class PatchEmbed final : public Layer<Real> {
 public:
  PatchEmbed(std::size_t patch_frames, std::size_t patch_bins, std::size_t ch)
      : pt_(patch_frames), pf_(patch_bins), ch_(ch) {}

  std::size_t tile() const { return pt_ * pf_; }
  std::size_t param_count() const override { return tile() * ch_ + ch_; }
  void init(Real* p, std::mt19937_64& rng) const override {
    fill_normal(p, tile() * ch_, 1.0 / std::sqrt(static_cast<double>(tile())), rng);
    for (std::size_t o = 0; o < ch_; ++o) p[tile() * ch_ + o] = Real(0);
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    const std::size_t nt = x.len / pt_;
    const std::size_t nf = x.ch / pf_;
    Seq<Real> tokens(nt * nf, tile());
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < nf; ++j) {
        Real* tr = tokens.row(i * nf + j);
        for (std::size_t a = 0; a < pt_; ++a) {
          const Real* xr = x.row(i * pt_ + a) + j * pf_;
          for (std::size_t b = 0; b < pf_; ++b) tr[a * pf_ + b] = xr[b];
        }
      }
    }
    Seq<Real> y;
    linear_rows(p, p + tile() * ch_, tokens, ch_, y);
    for (std::size_t n = 0; n < y.len; ++n) {
      Real* yr = y.row(n);
      for (std::size_t c = 0; c < ch_; ++c) {
        const double freq =
            std::pow(10000.0, -static_cast<double>(c - c % 2) / static_cast<double>(ch_));
        const double angle = static_cast<double>(n) * freq;
        yr[c] += static_cast<Real>(c % 2 == 0 ? std::sin(angle) : std::cos(angle));
      }
    }
    tape.saved.push_back(std::move(tokens));
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool) const override {
    linear_rows_backward(p, tape.saved[0], dy, dp, dp + tile() * ch_,
                         static_cast<Seq<Real>*>(nullptr));
    return {};
  }

 private:
  std::size_t pt_, pf_, ch_;
};

template <typename Real>
class Sequential final : public Layer<Real> {
 public:
  void add(std::unique_ptr<Layer<Real>> layer) {
    offsets_.push_back(count_);
    count_ += layer->param_count();
    layers_.push_back(std::move(layer));
  }

  std::size_t param_count() const override { return count_; }

  void init(Real* p, std::mt19937_64& rng) const override {
    for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->init(p + offsets_[i], rng);
  }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    tape.children.resize(layers_.size());
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = layers_[i]->forward(p + offsets_[i], std::move(x), tape.children[i]);
    }
    return x;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool need_dx) const override {
    for (std::size_t i = layers_.size(); i-- > 0;) {
      const bool want = need_dx || i > 0;
      dy = layers_[i]->backward(p + offsets_[i], tape.children[i], std::move(dy),
                                dp + offsets_[i], want);
    }
    return dy;
  }

 private:
  std::vector<std::unique_ptr<Layer<Real>>> layers_;
  std::vector<std::size_t> offsets_;
  std::size_t count_ = 0;
};

// y = x + body(x).
template <typename Real>
class Residual final : public Layer<Real> {
 public:
  explicit Residual(std::unique_ptr<Sequential<Real>> body) : body_(std::move(body)) {}

  std::size_t param_count() const override { return body_->param_count(); }
  void init(Real* p, std::mt19937_64& rng) const override { body_->init(p, rng); }

  Seq<Real> forward(const Real* p, Seq<Real> x, Tape<Real>& tape) const override {
    tape.children.resize(1);
    Seq<Real> y = body_->forward(p, x, tape.children[0]);
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += x.v[i];
    return y;
  }

  Seq<Real> backward(const Real* p, const Tape<Real>& tape, Seq<Real> dy, Real* dp,
                     bool) const override {
    Seq<Real> dx = body_->backward(p, tape.children[0], dy, dp, true);
    for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dy.v[i];
    return dx;
  }

 private:
  std::unique_ptr<Sequential<Real>> body_;
};

}  // namespace embdistill::nn

#endif  // EMBDISTILL_SRC_NN_HPP_
