// langid/layers_test.cc

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

#include <gtest/gtest.h>

#include "langid/loss.h"
#include "langid/nn/layers.h"
#include "langid/nn/model.h"
#include "test_util.h"

namespace langid {
namespace {

using testing::FdRelError;
using testing::RandomFrames;

constexpr double kLayerTol = 1e-4;

double Dot(const Batch<double> &a, const Batch<double> &b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t k = 0; k < a[i].v.size(); ++k) s += a[i].v[k] * b[i].v[k];
  return s;
}

Batch<double> RandomBatch(const std::vector<int> &lengths, int c, Rng &rng) {
  Batch<double> b;
  for (int n : lengths) b.push_back(RandomFrames(n, c, rng));
  return b;
}

void RandomizeParams(ParameterSet<double> &p, Rng &rng, double scale = 0.5) {
  std::normal_distribution<double> g(0.0, scale);
  for (auto &e : p.entries())
    if (e.trainable)
      for (double &v : e.value.data) v = g(rng);
}

// Pointers to every trainable value with its accumulated gradient.
void ParamGrads(ParameterSet<double> &p, std::vector<double *> *x, std::vector<double> *g) {
  for (auto &e : p.entries()) {
    if (!e.trainable) continue;
    for (size_t i = 0; i < e.value.size(); ++i) {
      x->push_back(&e.value.data[i]);
      g->push_back(e.grad.data[i]);
    }
  }
}

void InputGrads(Batch<double> &x, const Batch<double> &dx, std::vector<double *> *px,
                std::vector<double> *g) {
  for (size_t b = 0; b < x.size(); ++b)
    for (size_t i = 0; i < x[b].v.size(); ++i) {
      px->push_back(&x[b].v[i]);
      g->push_back(dx[b].v[i]);
    }
}

// Naive nested-loop depthwise-separable convolution with zero padding.
Frames<double> NaiveConv(const Frames<double> &x, const double *dw, const double *pw, int k,
                         int cout) {
  const int pad = (k - 1) / 2;
  Frames<double> y(x.n, cout);
  for (int t = 0; t < x.n; ++t)
    for (int o = 0; o < cout; ++o) {
      double acc = 0.0;
      for (int i = 0; i < x.c; ++i) {
        double d = 0.0;
        for (int j = 0; j < k; ++j) {
          int s = t + j - pad;
          if (s >= 0 && s < x.n) d += dw[j * x.c + i] * x.at(s, i);
        }
        acc += pw[i * cout + o] * d;
      }
      y.at(t, o) = acc;
    }
  return y;
}

TEST(DwSepConv, MatchesNaiveOracle) {
  Rng rng(3);
  for (int k : {1, 3, 7, 15}) {
    ParameterSet<double> p;
    DwSepConv<double> conv(p, "c", 5, 6, k);
    RandomizeParams(p, rng);
    Batch<double> x = RandomBatch({1, 4, 20}, 5, rng);
    Batch<double> y = conv.Forward(p, x, nullptr);
    for (size_t b = 0; b < x.size(); ++b) {
      Frames<double> ref = NaiveConv(x[b], p.value(conv.dw()), p.value(conv.pw()), k, 6);
      for (size_t i = 0; i < ref.v.size(); ++i) EXPECT_NEAR(y[b].v[i], ref.v[i], 1e-6);
    }
  }
}

TEST(DwSepConv, FloatMatchesDoubleOracle) {
  Rng rng(4);
  ParameterSet<double> pd;
  ParameterSet<float> pf;
  DwSepConv<double> cd(pd, "c", 8, 4, 7);
  DwSepConv<float> cf(pf, "c", 8, 4, 7);
  cd.Init(pd, rng);
  pf.CopyValuesFrom(pd);
  Frames<double> xd = RandomFrames(30, 8, rng);
  Frames<float> xf(30, 8);
  for (size_t i = 0; i < xd.v.size(); ++i) xf.v[i] = static_cast<float>(xd.v[i]);
  for (size_t i = 0; i < xd.v.size(); ++i) xd.v[i] = xf.v[i];
  Frames<double> ref = NaiveConv(xd, pd.value(cd.dw()), pd.value(cd.pw()), 7, 4);
  Batch<float> y = cf.Forward(pf, {xf}, nullptr);
  for (size_t i = 0; i < ref.v.size(); ++i) EXPECT_NEAR(y[0].v[i], ref.v[i], 1e-5);
}

TEST(DwSepConv, FiniteDifference) {
  Rng rng(5);
  for (bool dw : {true, false}) {
    ParameterSet<double> p;
    DwSepConv<double> conv(p, "c", 4, 3, dw ? 5 : 1, dw);
    RandomizeParams(p, rng);
    Batch<double> x = RandomBatch({2, 7}, 4, rng);
    Batch<double> r = RandomBatch({2, 7}, 3, rng);
    DwSepConv<double>::Cache cache;
    conv.Forward(p, x, &cache);
    p.ZeroGrad();
    Batch<double> dx = conv.Backward(p, cache, r);
    auto loss = [&] { return Dot(conv.Forward(p, x, nullptr), r); };
    std::vector<double *> px;
    std::vector<double> g;
    ParamGrads(p, &px, &g);
    InputGrads(x, dx, &px, &g);
    EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
  }
}

TEST(Linear, FiniteDifference) {
  Rng rng(6);
  ParameterSet<double> p;
  Linear<double> lin(p, "l", 5, 4);
  RandomizeParams(p, rng);
  Frames<double> x = RandomFrames(3, 5, rng), r = RandomFrames(3, 4, rng);
  Linear<double>::Cache cache;
  lin.Forward(p, x, &cache);
  p.ZeroGrad();
  Frames<double> dx = lin.Backward(p, cache, r);
  auto loss = [&] { return Dot({lin.Forward(p, x, nullptr)}, {r}); };
  std::vector<double *> px;
  std::vector<double> g;
  ParamGrads(p, &px, &g);
  Batch<double> xb{x};
  for (size_t i = 0; i < x.v.size(); ++i) {
    px.push_back(&x.v[i]);
    g.push_back(dx.v[i]);
  }
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

TEST(BatchNorm, TrainModeFiniteDifference) {
  Rng rng(7);
  ParameterSet<double> p;
  BatchNorm<double> bn(p, "bn", 3);
  bn.Init(p);
  RandomizeParams(p, rng);
  Batch<double> x = RandomBatch({4, 6}, 3, rng);
  Batch<double> r = RandomBatch({4, 6}, 3, rng);
  BatchNorm<double>::Cache cache;
  bn.Forward(p, x, true, &cache, 0.0);
  p.ZeroGrad();
  Batch<double> dx = bn.Backward(p, cache, r);
  auto loss = [&] { return Dot(bn.Forward(p, x, true, nullptr, 0.0), r); };
  std::vector<double *> px;
  std::vector<double> g;
  ParamGrads(p, &px, &g);
  InputGrads(x, dx, &px, &g);
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

TEST(BatchNorm, EvalModeFiniteDifference) {
  Rng rng(8);
  ParameterSet<double> p;
  BatchNorm<double> bn(p, "bn", 3);
  bn.Init(p);
  RandomizeParams(p, rng);
  p.value(p.IndexOf("bn.running_var"))[1] = 2.5;
  p.value(p.IndexOf("bn.running_mean"))[2] = -0.7;
  Batch<double> x = RandomBatch({5}, 3, rng);
  Batch<double> r = RandomBatch({5}, 3, rng);
  BatchNorm<double>::Cache cache;
  bn.Forward(p, x, false, &cache);
  p.ZeroGrad();
  Batch<double> dx = bn.Backward(p, cache, r);
  auto loss = [&] { return Dot(bn.Forward(p, x, false, nullptr), r); };
  std::vector<double *> px;
  std::vector<double> g;
  ParamGrads(p, &px, &g);
  InputGrads(x, dx, &px, &g);
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

TEST(BatchNorm, RunningStatisticsUpdate) {
  ParameterSet<double> p;
  BatchNorm<double> bn(p, "bn", 1);
  bn.Init(p);
  Frames<double> x(4, 1);
  x.v = {1.0, 2.0, 3.0, 6.0};
  bn.Forward(p, {x}, true, nullptr);
  // mean 3, unbiased variance 14/3.
  EXPECT_NEAR(p.value(p.IndexOf("bn.running_mean"))[0], 0.1 * 3.0, 1e-12);
  EXPECT_NEAR(p.value(p.IndexOf("bn.running_var"))[0], 0.9 + 0.1 * 14.0 / 3.0, 1e-12);
}

class SeTest : public ::testing::TestWithParam<int> {};

TEST_P(SeTest, FiniteDifference) {
  Rng rng(9);
  ParameterSet<double> p;
  SqueezeExcite<double> se(p, "se", 8, 4, GetParam());
  RandomizeParams(p, rng);
  Batch<double> x = RandomBatch({3, 9}, 8, rng);
  Batch<double> r = RandomBatch({3, 9}, 8, rng);
  SqueezeExcite<double>::Cache cache;
  se.Forward(p, x, &cache);
  p.ZeroGrad();
  Batch<double> dx = se.Backward(p, cache, r);
  auto loss = [&] { return Dot(se.Forward(p, x, nullptr), r); };
  std::vector<double *> px;
  std::vector<double> g;
  ParamGrads(p, &px, &g);
  InputGrads(x, dx, &px, &g);
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

INSTANTIATE_TEST_SUITE_P(Windows, SeTest, ::testing::Values(0, 1, 4, -1));

TEST(SqueezeExcite, WindowedContextIsTrailingMean) {
  Frames<double> x(5, 1);
  x.v = {1, 2, 3, 4, 5};
  double out = 0.0;
  SqueezeExcite<double>::WindowMean(x, 4, 3, &out);
  EXPECT_DOUBLE_EQ(out, 4.0);
  SqueezeExcite<double>::WindowMean(x, 1, 3, &out);
  EXPECT_DOUBLE_EQ(out, 1.5);
  SqueezeExcite<double>::WindowMean(x, 4, 0, &out);
  EXPECT_DOUBLE_EQ(out, 3.0);
}

TEST(AttentivePool, FiniteDifference) {
  Rng rng(10);
  ParameterSet<double> p;
  AttentivePool<double> pool(p, "pool", 5, 3);
  RandomizeParams(p, rng);
  Batch<double> x = RandomBatch({1, 2, 8}, 5, rng);
  Frames<double> r = RandomFrames(3, 10, rng);
  AttentivePool<double>::Cache cache;
  pool.Forward(p, x, &cache);
  p.ZeroGrad();
  Batch<double> dx = pool.Backward(p, cache, r);
  auto loss = [&] { return Dot({pool.Forward(p, x, nullptr)}, {r}); };
  std::vector<double *> px;
  std::vector<double> g;
  ParamGrads(p, &px, &g);
  // A single frame has zero variance (clamped region); skip its input.
  Batch<double> xs(x.begin() + 1, x.end());
  for (size_t b = 1; b < x.size(); ++b)
    for (size_t i = 0; i < x[b].v.size(); ++i) {
      px.push_back(&x[b].v[i]);
      g.push_back(dx[b].v[i]);
    }
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

TEST(AttentivePool, MatchesDirectSoftmaxPooling) {
  Rng rng(11);
  ParameterSet<double> p;
  AttentivePool<double> pool(p, "pool", 4, 3);
  RandomizeParams(p, rng, 2.0);
  Frames<double> h = RandomFrames(12, 4, rng, 3.0);
  Frames<double> out = pool.Forward(p, {h}, nullptr);
  // Direct: alpha = softmax(e), mu = sum alpha h, sigma = sqrt(sum alpha h^2 - mu^2 + eps).
  std::vector<double> e(h.n), u(3);
  for (int t = 0; t < h.n; ++t)
    e[t] = AttentionScore(h.row(t), p.value(pool.w()), p.value(pool.b()), p.value(pool.v()), 4,
                          3, u.data());
  double z = 0.0;
  for (double v : e) z += std::exp(v);
  for (int c = 0; c < 4; ++c) {
    double mu = 0.0, m2 = 0.0;
    for (int t = 0; t < h.n; ++t) {
      const double a = std::exp(e[t]) / z;
      mu += a * h.at(t, c);
      m2 += a * h.at(t, c) * h.at(t, c);
    }
    EXPECT_NEAR(out.at(0, c), mu, 1e-9);
    EXPECT_NEAR(out.at(0, 4 + c), std::sqrt(m2 - mu * mu + kPoolVarEps), 1e-9);
  }
}

TEST(PoolAccumulator, StreamedEqualsDirectSoftmax) {
  Rng rng(12);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial * 3, c = 3;
    std::vector<double> e(n);
    Frames<double> h = RandomFrames(n, c, rng);
    for (double &v : e) v = g(rng) + (trial % 2 ? 40.0 : 0.0);
    PoolAccumulator<double> acc(c);
    for (int t = 0; t < n; ++t) acc.Add(e[t], h.row(t));
    std::vector<double> out(2 * c);
    acc.Finish(out.data());
    const double m = *std::max_element(e.begin(), e.end());
    double z = 0.0;
    for (double v : e) z += std::exp(v - m);
    for (int k = 0; k < c; ++k) {
      double mu = 0.0, m2 = 0.0;
      for (int t = 0; t < n; ++t) {
        const double a = std::exp(e[t] - m) / z;
        mu += a * h.at(t, k);
        m2 += a * h.at(t, k) * h.at(t, k);
      }
      EXPECT_NEAR(out[k], mu, 1e-9);
      EXPECT_NEAR(out[c + k], std::sqrt(std::max(0.0, m2 - mu * mu) + kPoolVarEps), 1e-9);
    }
  }
}

TEST(AttentivePool, EmptySequenceFails) {
  ParameterSet<double> p;
  AttentivePool<double> pool(p, "pool", 2, 2);
  Frames<double> h(3, 2);
  std::vector<double> out(4);
  EXPECT_THROW(pool.PoolOne(p, h, 0, out.data(), nullptr, nullptr), Error);
}

TEST(CosineHead, FiniteDifference) {
  Rng rng(13);
  const int d = 5, n = 3;
  std::vector<double> w(d * n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double &v : w) v = g(rng);
  Frames<double> x = RandomFrames(4, d, rng), r = RandomFrames(4, n, rng);
  std::vector<double> gw(d * n, 0.0);
  Frames<double> dx = CosineHead<double>::BackwardCos(w.data(), gw.data(), d, n, x, r);
  auto loss = [&] { return Dot({CosineHead<double>::Forward(w.data(), d, n, 1.0, x, nullptr)}, {r}); };
  std::vector<double *> px;
  std::vector<double> ga;
  for (int i = 0; i < d * n; ++i) {
    px.push_back(&w[i]);
    ga.push_back(gw[i]);
  }
  for (size_t i = 0; i < x.v.size(); ++i) {
    px.push_back(&x.v[i]);
    ga.push_back(dx.v[i]);
  }
  EXPECT_LT(FdRelError(px, ga, loss), kLayerTol);
}

TEST(CosineHead, ZeroVectorFails) {
  std::vector<double> w = {1.0, 0.0};
  Frames<double> x(1, 2);
  EXPECT_THROW(CosineHead<double>::Forward(w.data(), 2, 1, 1.0, x, nullptr), Error);
}

TEST(WeightedCrossEntropy, FiniteDifference) {
  Rng rng(14);
  Frames<double> z = RandomFrames(6, 3, rng, 2.0);
  std::vector<int> y = {0, 1, 2, 2, 1, 0};
  std::vector<double> w = {1.5, 3.0, 0.7};
  Frames<double> dz;
  WeightedCrossEntropy<double>(z, y, w, &dz);
  auto loss = [&] { return WeightedCrossEntropy<double>(z, y, w); };
  std::vector<double *> px;
  std::vector<double> g;
  for (size_t i = 0; i < z.v.size(); ++i) {
    px.push_back(&z.v[i]);
    g.push_back(dz.v[i]);
  }
  EXPECT_LT(FdRelError(px, g, loss), kLayerTol);
}

TEST(WeightedCrossEntropy, KnownValues) {
  Frames<double> z(2, 2);
  z.v = {0.0, 0.0, 0.0, 0.0};
  // Uniform logits: loss log 2 regardless of weights.
  EXPECT_NEAR(WeightedCrossEntropy<double>(z, {0, 1}, {1.0, 9.0}), std::log(2.0), 1e-12);
  z.v = {std::log(3.0), 0.0, 0.0, 0.0};
  // Sample losses log(4/3) and log 2, weights 1 and 3.
  const double want = (std::log(4.0 / 3.0) + 3.0 * std::log(2.0)) / 4.0;
  EXPECT_NEAR(WeightedCrossEntropy<double>(z, {0, 1}, {1.0, 3.0}), want, 1e-12);
}

TEST(AamLoss, FiniteDifference) {
  Rng rng(15);
  const int d = 6, n = 4;
  std::vector<double> w(d * n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double &v : w) v = g(rng);
  Frames<double> x = RandomFrames(5, d, rng);
  std::vector<int> y = {0, 1, 2, 3, 1};
  for (double margin : {0.01, 0.3}) {
    AamConfig cfg;
    cfg.margin = margin;
    Frames<double> dx;
    std::vector<double> dw;
    AamLoss<double>(x, y, w.data(), n, cfg, &dx, &dw);
    auto loss = [&] { return AamLoss<double>(x, y, w.data(), n, cfg); };
    std::vector<double *> px;
    std::vector<double> ga;
    for (int i = 0; i < d * n; ++i) {
      px.push_back(&w[i]);
      ga.push_back(dw[i]);
    }
    for (size_t i = 0; i < x.v.size(); ++i) {
      px.push_back(&x.v[i]);
      ga.push_back(dx.v[i]);
    }
    EXPECT_LT(FdRelError(px, ga, loss), kLayerTol) << "margin " << margin;
  }
}

TEST(AamLoss, ZeroMarginEqualsScaledCosineSoftmax) {
  Rng rng(16);
  const int d = 4, n = 3;
  std::vector<double> w(d * n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double &v : w) v = g(rng);
  Frames<double> x = RandomFrames(3, d, rng);
  std::vector<int> y = {2, 0, 1};
  AamConfig cfg;
  cfg.margin = 0.0;
  Frames<double> logits = CosineHead<double>::Forward(w.data(), d, n, cfg.scale, x, nullptr);
  EXPECT_NEAR(AamLoss<double>(x, y, w.data(), n, cfg),
              WeightedCrossEntropy<double>(logits, y, {1.0, 1.0, 1.0}), 1e-10);
}

TEST(AamLoss, MarginRaisesLoss) {
  Rng rng(17);
  std::vector<double> w(4 * 2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double &v : w) v = g(rng);
  Frames<double> x = RandomFrames(4, 4, rng);
  std::vector<int> y = {0, 1, 0, 1};
  AamConfig a, b;
  a.margin = 0.0;
  b.margin = 0.2;
  EXPECT_GT(AamLoss<double>(x, y, w.data(), 2, b), AamLoss<double>(x, y, w.data(), 2, a));
}

ModelConfig SmallConfig(bool emb_bn, HeadType head, int se_window) {
  ModelConfig c;
  c.feat_dim = 6;
  c.prologue_channels = 5;
  c.blocks = {{2, 3, 5}, {1, 5, 4}};
  c.epilogue_channels = 6;
  c.se_reduction = 2;
  c.se_window = se_window;
  c.attention_hidden = 3;
  c.embedding = 4;
  c.emb_bn_relu = emb_bn;
  c.head = head;
  c.cosine_scale = 3.0;
  c.dropout = 0.0;
  return c;
}

double ModelLoss(Model<double> &m, const Batch<double> &x, const std::vector<int> &y) {
  auto out = m.Forward(x, true);
  return WeightedCrossEntropy<double>(out.logits, y, {1.0, 1.0});
}

struct ModelCase {
  bool emb_bn;
  HeadType head;
  int se_window;
};

class ModelGradTest : public ::testing::TestWithParam<ModelCase> {};

TEST_P(ModelGradTest, EndToEndFiniteDifference) {
  const ModelCase mc = GetParam();
  Model<double> m(SmallConfig(mc.emb_bn, mc.head, mc.se_window), 21);
  m.set_bn_momentum(0.0);
  Rng rng(22);
  Batch<double> x = RandomBatch({6, 9, 4}, 6, rng);
  std::vector<int> y = {0, 1, 1};
  Activations<double> acts;
  auto out = m.Forward(x, true, nullptr, &acts);
  Frames<double> dz;
  WeightedCrossEntropy<double>(out.logits, y, {1.0, 1.0}, &dz);
  m.params().ZeroGrad();
  m.Backward(acts, dz);
  std::vector<double *> px;
  std::vector<double> g;
  for (auto &e : m.params().entries()) {
    if (!e.trainable) continue;
    if (mc.head == HeadType::kCosine && e.name == "decoder.head.b") continue;
    for (size_t i = 0; i < e.value.size(); ++i) {
      px.push_back(&e.value.data[i]);
      g.push_back(e.grad.data[i]);
    }
  }
  Batch<double> dx = m.input_grad();
  InputGrads(x, dx, &px, &g);
  EXPECT_LT(FdRelError(px, g, [&] { return ModelLoss(m, x, y); }), kLayerTol);
}

INSTANTIATE_TEST_SUITE_P(Variants, ModelGradTest,
                         ::testing::Values(ModelCase{true, HeadType::kLinear, 0},
                                           ModelCase{false, HeadType::kLinear, 3},
                                           ModelCase{true, HeadType::kCosine, 2}));

TEST(Model, ZeroUpstreamGradientGivesZeroParameterGradients) {
  Model<double> m(SmallConfig(true, HeadType::kLinear, 0), 1);
  Rng rng(2);
  Batch<double> x = RandomBatch({5, 7}, 6, rng);
  Activations<double> acts;
  auto out = m.Forward(x, true, &rng, &acts);
  m.params().ZeroGrad();
  m.Backward(acts, Frames<double>(out.logits.n, out.logits.c));
  for (const auto &e : m.params().entries())
    for (double v : e.grad.data) EXPECT_EQ(v, 0.0) << e.name;
}

TEST(Model, EvalIsBatchIndependent) {
  Model<double> m(SmallConfig(true, HeadType::kLinear, 0), 3);
  Rng rng(4);
  Batch<double> x = RandomBatch({5, 8, 3}, 6, rng);
  auto all = m.Forward(x, false);
  for (size_t b = 0; b < x.size(); ++b) {
    auto one = m.Forward({x[b]}, false);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(one.logits.at(0, j), all.logits.at(static_cast<int>(b), j));
  }
}

TEST(Model, DropoutOnlyInTraining) {
  ModelConfig c = SmallConfig(true, HeadType::kLinear, 0);
  c.dropout = 0.5;
  Model<double> m(c, 5);
  Rng rng(6);
  Batch<double> x = RandomBatch({6, 6}, 6, rng);
  auto a = m.Forward(x, false, &rng);
  auto b = m.Forward(x, false, &rng);
  EXPECT_EQ(a.logits.v, b.logits.v);
}

}  // namespace
}  // namespace langid
