// langid/layers.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_NN_LAYERS_H_
#define LANGID_NN_LAYERS_H_

// Layers of the encoder/decoder. Every layer works on a batch of
// variable-length sequences (Frames), so padding never reaches the
// arithmetic. The per-frame kernels at the top are shared with the
// streaming path, which makes offline and streaming evaluation produce the
// same floating point results.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "langid/nn/tensor.h"

namespace langid {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr double kPoolVarEps = 1e-9;

// ---------------------------------------------------------------------------
// Per-frame kernels.

/// out[c] = sum_j w[j][c] * taps[j][c]; a null tap is zero padding.
template <typename T>
void DepthwiseFrame(const T *const *taps, const T *w, int k, int channels,
                    T *out) {
  std::fill(out, out + channels, T(0));
  for (int j = 0; j < k; ++j) {
    const T *x = taps[j];
    if (x == nullptr) continue;
    const T *wj = w + static_cast<size_t>(j) * channels;
    for (int c = 0; c < channels; ++c) out[c] += wj[c] * x[c];
  }
}

/// out[o] = sum_i in[i] * w[i][o] (+ bias[o]); w is stored in x out.
template <typename T>
void PointwiseFrame(const T *in, const T *w, const T *bias, int cin, int cout,
                    T *out) {
  if (bias)
    std::copy(bias, bias + cout, out);
  else
    std::fill(out, out + cout, T(0));
  for (int i = 0; i < cin; ++i) {
    const T xi = in[i];
    const T *row = w + static_cast<size_t>(i) * cout;
    for (int o = 0; o < cout; ++o) out[o] += xi * row[o];
  }
}

/// Row-wise softmax.
template <typename T>
Frames<T> SoftmaxRows(const Frames<T> &logits) {
  Frames<T> p(logits.n, logits.c);
  for (int r = 0; r < logits.n; ++r) {
    const T *z = logits.row(r);
    T m = *std::max_element(z, z + logits.c);
    T s = T(0);
    for (int j = 0; j < logits.c; ++j) s += (p.at(r, j) = std::exp(z[j] - m));
    for (int j = 0; j < logits.c; ++j) p.at(r, j) /= s;
  }
  return p;
}

template <typename T>
T Sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

/// Excitation gate for one squeezed context vector: sigmoid(W2 relu(W1 s + b1) + b2).
/// `hidden` receives the pre-ReLU activation.
template <typename T>
void SeGate(const T *s, const T *w1, const T *b1, const T *w2, const T *b2,
            int channels, int hidden_size, T *hidden, T *gate) {
  PointwiseFrame(s, w1, b1, channels, hidden_size, hidden);
  std::vector<T> z(hidden_size);
  for (int h = 0; h < hidden_size; ++h) z[h] = hidden[h] > T(0) ? hidden[h] : T(0);
  PointwiseFrame(z.data(), w2, b2, hidden_size, channels, gate);
  for (int c = 0; c < channels; ++c) gate[c] = Sigmoid(gate[c]);
}

/// Running max-shifted softmax statistics for attentive pooling:
/// m = max e, s0 = sum exp(e-m), s1 = sum exp(e-m) h, s2 = sum exp(e-m) h^2.
template <typename T>
struct PoolAccumulator {
  T m = T(0);
  T s0 = T(0);
  std::vector<T> s1, s2;
  long frames = 0;

  explicit PoolAccumulator(int channels = 0) : s1(channels), s2(channels) {}

  void Add(T e, const T *h) {
    const int c = static_cast<int>(s1.size());
    if (frames == 0) {
      m = e;
    } else if (e > m) {
      const T scale = std::exp(m - e);
      s0 *= scale;
      for (int i = 0; i < c; ++i) {
        s1[i] *= scale;
        s2[i] *= scale;
      }
      m = e;
    }
    const T a = std::exp(e - m);
    s0 += a;
    for (int i = 0; i < c; ++i) {
      s1[i] += a * h[i];
      s2[i] += a * h[i] * h[i];
    }
    ++frames;
  }

  /// Writes concat(mu, sigma) into out (2c values).
  void Finish(T *out) const {
    Check(frames > 0, "attentive pooling over zero frames");
    const int c = static_cast<int>(s1.size());
    for (int i = 0; i < c; ++i) {
      const T mu = s1[i] / s0;
      T var = s2[i] / s0 - mu * mu;
      if (var < T(0)) var = T(0);
      out[i] = mu;
      out[c + i] = std::sqrt(var + T(kPoolVarEps));
    }
  }
};

/// Attention score e = v . tanh(W h + b) for one frame; `u` receives tanh(.).
template <typename T>
T AttentionScore(const T *h, const T *w, const T *b, const T *v, int channels,
                 int hidden_size, T *u) {
  PointwiseFrame(h, w, b, channels, hidden_size, u);
  T e = T(0);
  for (int a = 0; a < hidden_size; ++a) {
    u[a] = std::tanh(u[a]);
    e += v[a] * u[a];
  }
  return e;
}

/// Eval-mode batch norm as a per-channel affine map.
template <typename T>
void BnAffine(const ParameterSet<T> &p, int gamma, int beta, int mean, int var,
              int channels, std::vector<T> *scale, std::vector<T> *shift) {
  scale->resize(channels);
  shift->resize(channels);
  for (int c = 0; c < channels; ++c) {
    const T s = p.value(gamma)[c] / std::sqrt(p.value(var)[c] + T(kBnEps));
    (*scale)[c] = s;
    (*shift)[c] = p.value(beta)[c] - p.value(mean)[c] * s;
  }
}

template <typename T>
void InitUniform(ParameterSet<T> &p, int idx, double bound, Rng &rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  for (T &x : p.entry(idx).value.data) x = static_cast<T>(u(rng));
}

template <typename T>
void Fill(ParameterSet<T> &p, int idx, T value) {
  auto &d = p.entry(idx).value.data;
  std::fill(d.begin(), d.end(), value);
}

// ---------------------------------------------------------------------------
// Layers.

/// Depthwise (per-channel, kernel k, same padding) then pointwise 1x1 conv.
/// A kernel of 1 with no depthwise stage is a plain pointwise conv.
template <typename T>
class DwSepConv {
 public:
  struct Cache {
    Batch<T> x, d;
  };

  DwSepConv() = default;
  DwSepConv(ParameterSet<T> &p, const std::string &prefix, int cin, int cout,
            int kernel, bool depthwise = true)
      : cin_(cin), cout_(cout), k_(kernel), depthwise_(depthwise) {
    Check(kernel % 2 == 1, prefix, ": kernel must be odd, got ", kernel);
    if (depthwise_) dw_ = p.Add(prefix + ".dw", {kernel, cin});
    pw_ = p.Add(prefix + ".pw", {cin, cout});
  }

  void Init(ParameterSet<T> &p, Rng &rng) const {
    if (depthwise_) InitUniform(p, dw_, std::sqrt(3.0 / k_), rng);
    InitUniform(p, pw_, std::sqrt(6.0 / cin_), rng);
  }

  int cin() const { return cin_; }
  int cout() const { return cout_; }
  int kernel() const { return depthwise_ ? k_ : 1; }
  bool depthwise() const { return depthwise_; }
  int dw() const { return dw_; }
  int pw() const { return pw_; }

  /// Depthwise stage of one sequence.
  Frames<T> Depthwise(const ParameterSet<T> &p, const Frames<T> &x) const {
    Check(x.c == cin_, "conv expects ", cin_, " channels, got ", x.c);
    if (!depthwise_) return x;
    Frames<T> d(x.n, cin_);
    const int pad = (k_ - 1) / 2;
    std::vector<const T *> taps(k_);
    for (int t = 0; t < x.n; ++t) {
      for (int j = 0; j < k_; ++j) {
        int s = t + j - pad;
        taps[j] = (s >= 0 && s < x.n) ? x.row(s) : nullptr;
      }
      DepthwiseFrame(taps.data(), p.value(dw_), k_, cin_, d.row(t));
    }
    return d;
  }

  Frames<T> Pointwise(const ParameterSet<T> &p, const Frames<T> &d) const {
    Frames<T> y(d.n, cout_);
    for (int t = 0; t < d.n; ++t)
      PointwiseFrame(d.row(t), p.value(pw_), static_cast<const T *>(nullptr),
                     cin_, cout_, y.row(t));
    return y;
  }

  Batch<T> Forward(const ParameterSet<T> &p, const Batch<T> &x, Cache *cache) const {
    Batch<T> y(x.size());
    if (cache) {
      cache->x = x;
      cache->d.resize(x.size());
    }
    for (size_t b = 0; b < x.size(); ++b) {
      Frames<T> d = Depthwise(p, x[b]);
      y[b] = Pointwise(p, d);
      if (cache) cache->d[b] = std::move(d);
    }
    return y;
  }

  Batch<T> Backward(ParameterSet<T> &p, const Cache &cache, const Batch<T> &dy) const {
    Batch<T> dx(dy.size());
    const T *pw = p.value(pw_);
    T *gpw = p.grad(pw_);
    // Transposed pointwise weights for the input gradient.
    std::vector<T> pwt(static_cast<size_t>(cin_) * cout_);
    for (int i = 0; i < cin_; ++i)
      for (int o = 0; o < cout_; ++o) pwt[size_t(o) * cin_ + i] = pw[size_t(i) * cout_ + o];
    for (size_t b = 0; b < dy.size(); ++b) {
      const Frames<T> &d = cache.d[b];
      const Frames<T> &g = dy[b];
      Frames<T> dd(g.n, cin_);
      for (int t = 0; t < g.n; ++t) {
        const T *drow = d.row(t);
        const T *grow = g.row(t);
        for (int i = 0; i < cin_; ++i) {
          const T di = drow[i];
          T *gw = gpw + size_t(i) * cout_;
          for (int o = 0; o < cout_; ++o) gw[o] += di * grow[o];
        }
        PointwiseFrame(grow, pwt.data(), static_cast<const T *>(nullptr), cout_,
                       cin_, dd.row(t));
      }
      if (!depthwise_) {
        dx[b] = std::move(dd);
        continue;
      }
      const Frames<T> &x = cache.x[b];
      Frames<T> gx(x.n, cin_);
      const int pad = (k_ - 1) / 2;
      const T *w = p.value(dw_);
      T *gw = p.grad(dw_);
      for (int t = 0; t < x.n; ++t) {
        const T *ddr = dd.row(t);
        for (int j = 0; j < k_; ++j) {
          int s = t + j - pad;
          if (s < 0 || s >= x.n) continue;
          const T *xr = x.row(s);
          T *gxr = gx.row(s);
          const T *wj = w + size_t(j) * cin_;
          T *gwj = gw + size_t(j) * cin_;
          for (int c = 0; c < cin_; ++c) {
            gwj[c] += ddr[c] * xr[c];
            gxr[c] += wj[c] * ddr[c];
          }
        }
      }
      dx[b] = std::move(gx);
    }
    return dx;
  }

 private:
  int cin_ = 0, cout_ = 0, k_ = 1;
  bool depthwise_ = true;
  int dw_ = -1, pw_ = -1;
};

/// Fully connected layer on rows (each row one utterance).
template <typename T>
class Linear {
 public:
  struct Cache {
    Frames<T> x;
  };

  Linear() = default;
  Linear(ParameterSet<T> &p, const std::string &prefix, int in, int out)
      : in_(in), out_(out) {
    w_ = p.Add(prefix + ".w", {in, out});
    b_ = p.Add(prefix + ".b", {out});
  }

  void Init(ParameterSet<T> &p, Rng &rng) const {
    InitUniform(p, w_, std::sqrt(3.0 / in_), rng);
    Fill(p, b_, T(0));
  }

  int w() const { return w_; }
  int b() const { return b_; }
  int in() const { return in_; }
  int out() const { return out_; }

  Frames<T> Forward(const ParameterSet<T> &p, const Frames<T> &x, Cache *cache) const {
    Check(x.c == in_, "linear expects ", in_, " inputs, got ", x.c);
    Frames<T> y(x.n, out_);
    for (int r = 0; r < x.n; ++r)
      PointwiseFrame(x.row(r), p.value(w_), p.value(b_), in_, out_, y.row(r));
    if (cache) cache->x = x;
    return y;
  }

  Frames<T> Backward(ParameterSet<T> &p, const Cache &cache, const Frames<T> &dy) const {
    const T *w = p.value(w_);
    T *gw = p.grad(w_);
    T *gb = p.grad(b_);
    Frames<T> dx(dy.n, in_);
    for (int r = 0; r < dy.n; ++r) {
      const T *g = dy.row(r);
      const T *x = cache.x.row(r);
      for (int o = 0; o < out_; ++o) gb[o] += g[o];
      T *gxr = dx.row(r);
      for (int i = 0; i < in_; ++i) {
        const T *wr = w + size_t(i) * out_;
        T *gwr = gw + size_t(i) * out_;
        T acc = T(0);
        for (int o = 0; o < out_; ++o) {
          gwr[o] += x[i] * g[o];
          acc += wr[o] * g[o];
        }
        gxr[i] = acc;
      }
    }
    return dx;
  }

 private:
  int in_ = 0, out_ = 0;
  int w_ = -1, b_ = -1;
};

/// Batch normalization over channels. Training mode normalizes with the
/// statistics of every frame in the batch and updates running estimates.
template <typename T>
class BatchNorm {
 public:
  struct Cache {
    bool train = false;
    Batch<T> xhat;
    std::vector<T> inv_std;
    long count = 0;
  };

  BatchNorm() = default;
  BatchNorm(ParameterSet<T> &p, const std::string &prefix, int channels)
      : c_(channels) {
    gamma_ = p.Add(prefix + ".gamma", {channels});
    beta_ = p.Add(prefix + ".beta", {channels});
    mean_ = p.Add(prefix + ".running_mean", {channels}, false);
    var_ = p.Add(prefix + ".running_var", {channels}, false);
  }

  void Init(ParameterSet<T> &p) const {
    Fill(p, gamma_, T(1));
    Fill(p, beta_, T(0));
    Fill(p, mean_, T(0));
    Fill(p, var_, T(1));
  }

  int channels() const { return c_; }
  void Affine(const ParameterSet<T> &p, std::vector<T> *scale, std::vector<T> *shift) const {
    BnAffine(p, gamma_, beta_, mean_, var_, c_, scale, shift);
  }

  Batch<T> Forward(ParameterSet<T> &p, const Batch<T> &x, bool train, Cache *cache,
                   double momentum = kBnMomentum) const {
    Batch<T> y(x.size());
    if (!train) {
      std::vector<T> scale, shift;
      Affine(p, &scale, &shift);
      for (size_t b = 0; b < x.size(); ++b) {
        y[b] = Frames<T>(x[b].n, c_);
        for (int t = 0; t < x[b].n; ++t) {
          const T *xr = x[b].row(t);
          T *yr = y[b].row(t);
          for (int c = 0; c < c_; ++c) yr[c] = xr[c] * scale[c] + shift[c];
        }
      }
      if (cache) {
        cache->train = false;
        cache->xhat.resize(x.size());
        cache->inv_std.resize(c_);
        const T *rm = p.value(mean_);
        const T *rv = p.value(var_);
        for (int c = 0; c < c_; ++c) cache->inv_std[c] = T(1) / std::sqrt(rv[c] + T(kBnEps));
        for (size_t b = 0; b < x.size(); ++b) {
          cache->xhat[b] = Frames<T>(x[b].n, c_);
          for (int t = 0; t < x[b].n; ++t)
            for (int c = 0; c < c_; ++c)
              cache->xhat[b].at(t, c) = (x[b].at(t, c) - rm[c]) * cache->inv_std[c];
        }
      }
      return y;
    }
    long count = 0;
    std::vector<double> sum(c_, 0.0);
    for (const auto &f : x) {
      Check(f.c == c_, "batch norm expects ", c_, " channels, got ", f.c);
      count += f.n;
      for (int t = 0; t < f.n; ++t)
        for (int c = 0; c < c_; ++c) sum[c] += f.at(t, c);
    }
    Check(count > 0, "batch norm over an empty batch");
    std::vector<double> mean(c_), var(c_, 0.0);
    for (int c = 0; c < c_; ++c) mean[c] = sum[c] / count;
    for (const auto &f : x)
      for (int t = 0; t < f.n; ++t)
        for (int c = 0; c < c_; ++c) {
          double d = f.at(t, c) - mean[c];
          var[c] += d * d;
        }
    std::vector<T> inv(c_);
    for (int c = 0; c < c_; ++c) {
      double v = var[c] / count;
      inv[c] = static_cast<T>(1.0 / std::sqrt(v + kBnEps));
      double unbiased = count > 1 ? var[c] / (count - 1) : v;
      T *rm = p.value(mean_);
      T *rv = p.value(var_);
      if (momentum > 0.0) {
        rm[c] = static_cast<T>((1.0 - momentum) * rm[c] + momentum * mean[c]);
        rv[c] = static_cast<T>((1.0 - momentum) * rv[c] + momentum * unbiased);
      }
    }
    const T *gamma = p.value(gamma_);
    const T *beta = p.value(beta_);
    Batch<T> xhat(x.size());
    for (size_t b = 0; b < x.size(); ++b) {
      xhat[b] = Frames<T>(x[b].n, c_);
      y[b] = Frames<T>(x[b].n, c_);
      for (int t = 0; t < x[b].n; ++t)
        for (int c = 0; c < c_; ++c) {
          T h = static_cast<T>((x[b].at(t, c) - mean[c])) * inv[c];
          xhat[b].at(t, c) = h;
          y[b].at(t, c) = gamma[c] * h + beta[c];
        }
    }
    if (cache) {
      cache->train = true;
      cache->xhat = std::move(xhat);
      cache->inv_std = std::move(inv);
      cache->count = count;
    }
    return y;
  }

  Batch<T> Backward(ParameterSet<T> &p, const Cache &cache, const Batch<T> &dy) const {
    const T *gamma = p.value(gamma_);
    T *gg = p.grad(gamma_);
    T *gb = p.grad(beta_);
    if (!cache.train) {
      // Eval mode is a fixed per-channel affine map.
      Batch<T> dx(dy.size());
      for (size_t b = 0; b < dy.size(); ++b) {
        dx[b] = Frames<T>(dy[b].n, c_);
        for (int t = 0; t < dy[b].n; ++t)
          for (int c = 0; c < c_; ++c) {
            const T g = dy[b].at(t, c);
            gg[c] += g * cache.xhat[b].at(t, c);
            gb[c] += g;
            dx[b].at(t, c) = g * gamma[c] * cache.inv_std[c];
          }
      }
      return dx;
    }
    std::vector<double> sum_dy(c_, 0.0), sum_dy_xhat(c_, 0.0);
    for (size_t b = 0; b < dy.size(); ++b)
      for (int t = 0; t < dy[b].n; ++t)
        for (int c = 0; c < c_; ++c) {
          sum_dy[c] += dy[b].at(t, c);
          sum_dy_xhat[c] += dy[b].at(t, c) * cache.xhat[b].at(t, c);
        }
    for (int c = 0; c < c_; ++c) {
      gg[c] += static_cast<T>(sum_dy_xhat[c]);
      gb[c] += static_cast<T>(sum_dy[c]);
    }
    const double n = static_cast<double>(cache.count);
    Batch<T> dx(dy.size());
    for (size_t b = 0; b < dy.size(); ++b) {
      dx[b] = Frames<T>(dy[b].n, c_);
      for (int t = 0; t < dy[b].n; ++t)
        for (int c = 0; c < c_; ++c) {
          double g = dy[b].at(t, c) - sum_dy[c] / n -
                     cache.xhat[b].at(t, c) * sum_dy_xhat[c] / n;
          dx[b].at(t, c) = static_cast<T>(gamma[c] * cache.inv_std[c] * g);
        }
    }
    return dx;
  }

 private:
  int c_ = 0;
  int gamma_ = -1, beta_ = -1, mean_ = -1, var_ = -1;
};

/// y = relu(x) scaled by an inverted-dropout mask (training only).
/// The cache keeps the combined derivative factor per element.
template <typename T>
struct ReluDropout {
  struct Cache {
    Batch<T> factor;
  };

  static Batch<T> Forward(const Batch<T> &x, double drop, Rng *rng, Cache *cache) {
    Batch<T> y(x.size());
    if (cache) cache->factor.resize(x.size());
    const bool use_drop = rng != nullptr && drop > 0.0;
    std::bernoulli_distribution keep(1.0 - drop);
    const T keep_scale = use_drop ? static_cast<T>(1.0 / (1.0 - drop)) : T(1);
    for (size_t b = 0; b < x.size(); ++b) {
      y[b] = Frames<T>(x[b].n, x[b].c);
      Frames<T> f(x[b].n, x[b].c);
      for (size_t i = 0; i < x[b].v.size(); ++i) {
        T m = x[b].v[i] > T(0) ? T(1) : T(0);
        if (use_drop) m *= keep(*rng) ? keep_scale : T(0);
        f.v[i] = m;
        y[b].v[i] = x[b].v[i] * m;
      }
      if (cache) cache->factor[b] = std::move(f);
    }
    return y;
  }

  static Batch<T> Backward(const Cache &cache, const Batch<T> &dy) {
    Batch<T> dx(dy.size());
    for (size_t b = 0; b < dy.size(); ++b) {
      dx[b] = Frames<T>(dy[b].n, dy[b].c);
      for (size_t i = 0; i < dy[b].v.size(); ++i)
        dx[b].v[i] = dy[b].v[i] * cache.factor[b].v[i];
    }
    return dx;
  }
};

/// Squeeze-and-excitation. window == 0: squeeze over the whole sequence
/// (global context). window > 0: each frame is gated from the mean of the
/// trailing `window` frames. window < 0: causal cumulative mean (the
/// streaming stand-in for global context).
template <typename T>
class SqueezeExcite {
 public:
  struct Cache {
    Batch<T> x;
    Batch<T> s;       // squeezed context per gate row
    Batch<T> hidden;  // pre-ReLU
    Batch<T> gate;
  };

  SqueezeExcite() = default;
  SqueezeExcite(ParameterSet<T> &p, const std::string &prefix, int channels,
                int reduction, int window)
      : c_(channels), h_(std::max(1, channels / reduction)), window_(window) {
    w1_ = p.Add(prefix + ".fc1.w", {c_, h_});
    b1_ = p.Add(prefix + ".fc1.b", {h_});
    w2_ = p.Add(prefix + ".fc2.w", {h_, c_});
    b2_ = p.Add(prefix + ".fc2.b", {c_});
  }

  void Init(ParameterSet<T> &p, Rng &rng) const {
    InitUniform(p, w1_, std::sqrt(6.0 / c_), rng);
    Fill(p, b1_, T(0));
    InitUniform(p, w2_, std::sqrt(3.0 / h_), rng);
    Fill(p, b2_, T(0));
  }

  int channels() const { return c_; }
  int hidden() const { return h_; }
  int window() const { return window_; }
  void set_window(int w) { window_ = w; }
  int w1() const { return w1_; }
  int b1() const { return b1_; }
  int w2() const { return w2_; }
  int b2() const { return b2_; }

  /// Context mean for frame t under the configured window, summed oldest
  /// to newest.
  static void WindowMean(const Frames<T> &x, int t, int window, T *out) {
    const int lo = window > 0 ? std::max(0, t - window + 1) : 0;
    std::fill(out, out + x.c, T(0));
    for (int s = lo; s <= t; ++s) {
      const T *r = x.row(s);
      for (int c = 0; c < x.c; ++c) out[c] += r[c];
    }
    const T inv = T(1) / static_cast<T>(t - lo + 1);
    for (int c = 0; c < x.c; ++c) out[c] *= inv;
  }

  Batch<T> Forward(const ParameterSet<T> &p, const Batch<T> &x, Cache *cache) const {
    Batch<T> y(x.size());
    if (cache) {
      cache->x = x;
      cache->s.resize(x.size());
      cache->hidden.resize(x.size());
      cache->gate.resize(x.size());
    }
    for (size_t b = 0; b < x.size(); ++b) {
      const Frames<T> &xb = x[b];
      Check(xb.c == c_, "SE expects ", c_, " channels, got ", xb.c);
      Check(xb.n > 0, "SE over an empty sequence");
      const int rows = window_ == 0 ? 1 : xb.n;
      Frames<T> s(rows, c_), hid(rows, h_), g(rows, c_);
      if (window_ == 0) {
        WindowMean(xb, xb.n - 1, 0, s.row(0));
      } else {
        for (int t = 0; t < xb.n; ++t) WindowMean(xb, t, window_, s.row(t));
      }
      for (int r = 0; r < rows; ++r)
        SeGate(s.row(r), p.value(w1_), p.value(b1_), p.value(w2_), p.value(b2_),
               c_, h_, hid.row(r), g.row(r));
      y[b] = Frames<T>(xb.n, c_);
      for (int t = 0; t < xb.n; ++t) {
        const T *gr = g.row(window_ == 0 ? 0 : t);
        for (int c = 0; c < c_; ++c) y[b].at(t, c) = xb.at(t, c) * gr[c];
      }
      if (cache) {
        cache->s[b] = std::move(s);
        cache->hidden[b] = std::move(hid);
        cache->gate[b] = std::move(g);
      }
    }
    return y;
  }

  Batch<T> Backward(ParameterSet<T> &p, const Cache &cache, const Batch<T> &dy) const {
    const T *w1 = p.value(w1_);
    const T *w2 = p.value(w2_);
    T *gw1 = p.grad(w1_), *gb1 = p.grad(b1_), *gw2 = p.grad(w2_), *gb2 = p.grad(b2_);
    Batch<T> dx(dy.size());
    for (size_t b = 0; b < dy.size(); ++b) {
      const Frames<T> &x = cache.x[b];
      const Frames<T> &g = cache.gate[b];
      const Frames<T> &s = cache.s[b];
      const Frames<T> &hid = cache.hidden[b];
      const int rows = g.n;
      Frames<T> dg(rows, c_);
      dx[b] = Frames<T>(x.n, c_);
      for (int t = 0; t < x.n; ++t) {
        const int r = window_ == 0 ? 0 : t;
        for (int c = 0; c < c_; ++c) {
          dg.at(r, c) += dy[b].at(t, c) * x.at(t, c);
          dx[b].at(t, c) = dy[b].at(t, c) * g.at(r, c);
        }
      }
      std::vector<T> da2(c_), dz(h_), da1(h_), ds(c_);
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < c_; ++c) {
          T gv = g.at(r, c);
          da2[c] = dg.at(r, c) * gv * (T(1) - gv);
          gb2[c] += da2[c];
        }
        for (int h = 0; h < h_; ++h) {
          T z = hid.at(r, h) > T(0) ? hid.at(r, h) : T(0);
          T acc = T(0);
          for (int c = 0; c < c_; ++c) {
            gw2[size_t(h) * c_ + c] += z * da2[c];
            acc += w2[size_t(h) * c_ + c] * da2[c];
          }
          dz[h] = acc;
          da1[h] = hid.at(r, h) > T(0) ? acc : T(0);
          gb1[h] += da1[h];
        }
        for (int c = 0; c < c_; ++c) {
          T acc = T(0);
          for (int h = 0; h < h_; ++h) {
            gw1[size_t(c) * h_ + h] += s.at(r, c) * da1[h];
            acc += w1[size_t(c) * h_ + h] * da1[h];
          }
          ds[c] = acc;
        }
        // Spread the context gradient over the frames that formed it.
        const int t = window_ == 0 ? x.n - 1 : r;
        const int lo = window_ > 0 ? std::max(0, t - window_ + 1) : 0;
        const T inv = T(1) / static_cast<T>(t - lo + 1);
        for (int u = lo; u <= t; ++u)
          for (int c = 0; c < c_; ++c) dx[b].at(u, c) += ds[c] * inv;
      }
    }
    return dx;
  }

 private:
  int c_ = 0, h_ = 0, window_ = 0;
  int w1_ = -1, b1_ = -1, w2_ = -1, b2_ = -1;
};

/// Attentive temporal pooling: softmax attention over frames, output
/// concat(weighted mean, weighted standard deviation).
template <typename T>
class AttentivePool {
 public:
  struct Cache {
    Batch<T> h;
    Batch<T> u;                   // tanh activations per frame
    std::vector<std::vector<T>> alpha;
    Frames<T> out;                // B x 2C
  };

  AttentivePool() = default;
  AttentivePool(ParameterSet<T> &p, const std::string &prefix, int channels,
                int hidden)
      : c_(channels), a_(hidden) {
    w_ = p.Add(prefix + ".w", {c_, a_});
    b_ = p.Add(prefix + ".b", {a_});
    v_ = p.Add(prefix + ".v", {a_});
  }

  void Init(ParameterSet<T> &p, Rng &rng) const {
    InitUniform(p, w_, std::sqrt(3.0 / c_), rng);
    Fill(p, b_, T(0));
    InitUniform(p, v_, std::sqrt(3.0 / a_), rng);
  }

  int channels() const { return c_; }
  int hidden() const { return a_; }
  int w() const { return w_; }
  int b() const { return b_; }
  int v() const { return v_; }

  /// Pools one sequence over its first `valid` frames.
  void PoolOne(const ParameterSet<T> &p, const Frames<T> &h, int valid, T *out,
               Frames<T> *u_cache, std::vector<T> *alpha) const {
    Check(h.c == c_, "pooling expects ", c_, " channels, got ", h.c);
    if (valid <= 0) Fail("attentive pooling: all frames masked");
    Check(valid <= h.n, "valid length exceeds sequence length");
    PoolAccumulator<T> acc(c_);
    std::vector<T> e(valid);
    Frames<T> u(valid, a_);
    for (int t = 0; t < valid; ++t) {
      e[t] = AttentionScore(h.row(t), p.value(w_), p.value(b_), p.value(v_), c_,
                            a_, u.row(t));
      acc.Add(e[t], h.row(t));
    }
    acc.Finish(out);
    if (alpha) {
      alpha->resize(valid);
      for (int t = 0; t < valid; ++t) (*alpha)[t] = std::exp(e[t] - acc.m) / acc.s0;
    }
    if (u_cache) *u_cache = std::move(u);
  }

  Frames<T> Forward(const ParameterSet<T> &p, const Batch<T> &h, Cache *cache) const {
    Frames<T> out(static_cast<int>(h.size()), 2 * c_);
    if (cache) {
      cache->h = h;
      cache->u.resize(h.size());
      cache->alpha.resize(h.size());
    }
    for (size_t b = 0; b < h.size(); ++b)
      PoolOne(p, h[b], h[b].n, out.row(static_cast<int>(b)),
              cache ? &cache->u[b] : nullptr, cache ? &cache->alpha[b] : nullptr);
    if (cache) cache->out = out;
    return out;
  }

  Batch<T> Backward(ParameterSet<T> &p, const Cache &cache, const Frames<T> &dout) const {
    const T *w = p.value(w_);
    const T *v = p.value(v_);
    T *gw = p.grad(w_), *gb = p.grad(b_), *gv = p.grad(v_);
    Batch<T> dh(cache.h.size());
    for (size_t b = 0; b < cache.h.size(); ++b) {
      const Frames<T> &h = cache.h[b];
      const Frames<T> &u = cache.u[b];
      const std::vector<T> &alpha = cache.alpha[b];
      const T *o = cache.out.row(static_cast<int>(b));
      const T *g = dout.row(static_cast<int>(b));
      std::vector<T> dmu(c_), ds2(c_);
      for (int c = 0; c < c_; ++c) {
        const T mu = o[c], sigma = o[c_ + c];
        const T var = sigma * sigma - T(kPoolVarEps);
        // Clamped region (variance <= 0) has zero derivative.
        ds2[c] = var > T(0) ? g[c_ + c] / (T(2) * sigma) : T(0);
        dmu[c] = g[c] - T(2) * mu * ds2[c];
      }
      const int n = h.n;
      std::vector<T> dalpha(n);
      T weighted = T(0);
      dh[b] = Frames<T>(n, c_);
      for (int t = 0; t < n; ++t) {
        const T *hr = h.row(t);
        T *dr = dh[b].row(t);
        T da = T(0);
        for (int c = 0; c < c_; ++c) {
          da += hr[c] * dmu[c] + hr[c] * hr[c] * ds2[c];
          dr[c] = alpha[t] * (dmu[c] + T(2) * hr[c] * ds2[c]);
        }
        dalpha[t] = da;
        weighted += alpha[t] * da;
      }
      std::vector<T> dpre(a_);
      for (int t = 0; t < n; ++t) {
        const T de = alpha[t] * (dalpha[t] - weighted);
        const T *ur = u.row(t);
        for (int a = 0; a < a_; ++a) {
          gv[a] += de * ur[a];
          dpre[a] = de * v[a] * (T(1) - ur[a] * ur[a]);
          gb[a] += dpre[a];
        }
        const T *hr = h.row(t);
        T *dr = dh[b].row(t);
        for (int c = 0; c < c_; ++c) {
          const T *wr = w + size_t(c) * a_;
          T *gwr = gw + size_t(c) * a_;
          T acc = T(0);
          for (int a = 0; a < a_; ++a) {
            gwr[a] += hr[c] * dpre[a];
            acc += wr[a] * dpre[a];
          }
          dr[c] += acc;
        }
      }
    }
    return dh;
  }

 private:
  int c_ = 0, a_ = 0;
  int w_ = -1, b_ = -1, v_ = -1;
};

/// Scaled cosine classifier: logit_j = scale * cos(e, w_j). Class vectors
/// are the columns of an in x n weight matrix.
template <typename T>
struct CosineHead {
  struct Cache {
    Frames<T> e;
  };

  static Frames<T> Forward(const T *w, int in, int n, T scale, const Frames<T> &e,
                           Cache *cache) {
    Frames<T> logits(e.n, n);
    std::vector<T> wn(n, T(0));
    for (int j = 0; j < n; ++j) {
      T s = T(0);
      for (int i = 0; i < in; ++i) s += w[size_t(i) * n + j] * w[size_t(i) * n + j];
      wn[j] = std::sqrt(s);
      if (!(wn[j] > T(0))) Fail("zero-norm class vector");
    }
    for (int r = 0; r < e.n; ++r) {
      const T *er = e.row(r);
      T en = T(0);
      for (int i = 0; i < in; ++i) en += er[i] * er[i];
      en = std::sqrt(en);
      if (!(en > T(0))) Fail("zero-norm embedding");
      for (int j = 0; j < n; ++j) {
        T dot = T(0);
        for (int i = 0; i < in; ++i) dot += er[i] * w[size_t(i) * n + j];
        logits.at(r, j) = scale * dot / (en * wn[j]);
      }
    }
    if (cache) cache->e = e;
    return logits;
  }

  /// Gradient of sum_j dcos_j * cos_j with respect to e and w; accumulates
  /// into gw and returns de.
  static Frames<T> BackwardCos(const T *w, T *gw, int in, int n, const Frames<T> &e,
                               const Frames<T> &dcos) {
    Frames<T> de(e.n, in);
    std::vector<T> wn(n, T(0));
    for (int j = 0; j < n; ++j) {
      T s = T(0);
      for (int i = 0; i < in; ++i) s += w[size_t(i) * n + j] * w[size_t(i) * n + j];
      wn[j] = std::sqrt(s);
    }
    for (int r = 0; r < e.n; ++r) {
      const T *er = e.row(r);
      T en = T(0);
      for (int i = 0; i < in; ++i) en += er[i] * er[i];
      en = std::sqrt(en);
      for (int j = 0; j < n; ++j) {
        const T g = dcos.at(r, j);
        if (g == T(0)) continue;
        T dot = T(0);
        for (int i = 0; i < in; ++i) dot += er[i] * w[size_t(i) * n + j];
        const T c = dot / (en * wn[j]);
        for (int i = 0; i < in; ++i) {
          const T eh = er[i] / en;
          const T wh = w[size_t(i) * n + j] / wn[j];
          de.at(r, i) += g * (wh - c * eh) / en;
          gw[size_t(i) * n + j] += g * (eh - c * wh) / wn[j];
        }
      }
    }
    return de;
  }
};

}  // namespace langid

#endif  // LANGID_NN_LAYERS_H_
