// langid/model.h

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

#ifndef LANGID_NN_MODEL_H_
#define LANGID_NN_MODEL_H_

#include <string>
#include <vector>

#include "langid/frontend.h"
#include "langid/model_config.h"
#include "langid/nn/layers.h"

namespace langid {

/// 80 x T feature matrix -> T x 80 frame-major sequence.
template <typename T>
Frames<T> FramesFromFeatures(const FeatureMatrix &f) {
  Frames<T> x(f.n_frames, f.n_bins);
  for (int b = 0; b < f.n_bins; ++b)
    for (int t = 0; t < f.n_frames; ++t) x.at(t, b) = static_cast<T>(f.at(b, t));
  return x;
}

template <typename T>
struct SubBlock {
  DwSepConv<T> conv;
  BatchNorm<T> bn;
};

template <typename T>
struct MegaBlock {
  std::vector<SubBlock<T>> subs;
  SqueezeExcite<T> se;
  DwSepConv<T> res_conv;  // 1x1, no depthwise stage
  BatchNorm<T> res_bn;
};

template <typename T>
struct Activations {
  struct Sub {
    typename DwSepConv<T>::Cache conv;
    typename BatchNorm<T>::Cache bn;
    typename ReluDropout<T>::Cache act;
  };
  struct Block {
    std::vector<Sub> subs;
    typename SqueezeExcite<T>::Cache se;
    typename DwSepConv<T>::Cache res_conv;
    typename BatchNorm<T>::Cache res_bn;
    typename ReluDropout<T>::Cache out_act;
  };

  bool valid = false;
  bool train = false;
  typename DwSepConv<T>::Cache pro_conv;
  typename BatchNorm<T>::Cache pro_bn;
  typename ReluDropout<T>::Cache pro_act;
  std::vector<Block> blocks;
  typename DwSepConv<T>::Cache epi_conv;
  typename BatchNorm<T>::Cache epi_bn;
  typename ReluDropout<T>::Cache epi_act;
  typename AttentivePool<T>::Cache pool;
  typename Linear<T>::Cache emb;
  typename BatchNorm<T>::Cache emb_bn;
  typename ReluDropout<T>::Cache emb_act;
  typename Linear<T>::Cache head;
  Frames<T> head_input;
};

/// Encoder (prologue, mega blocks with SE and residuals, epilogue),
/// attentive pooling, embedding layer, and classifier head.
template <typename T>
class Model {
 public:
  struct Output {
    Frames<T> logits;     // batch x n_classes
    Frames<T> embedding;  // batch x embedding (the head's input)
  };

  explicit Model(const ModelConfig &cfg, uint64_t seed = 0) : cfg_(cfg) {
    cfg_.Validate();
    Build();
    Rng rng(MixSeed(seed, 0x1417));
    Init(rng);
  }

  const ModelConfig &config() const { return cfg_; }

  /// Running-statistics momentum of every batch norm in training mode;
  /// 0 freezes the running statistics.
  void set_bn_momentum(double m) { bn_momentum_ = m; }
  double bn_momentum() const { return bn_momentum_; }
  ParameterSet<T> &params() { return params_; }
  const ParameterSet<T> &params() const { return params_; }

  // Layer access for the streaming path.
  const DwSepConv<T> &prologue_conv() const { return pro_conv_; }
  const BatchNorm<T> &prologue_bn() const { return pro_bn_; }
  const std::vector<MegaBlock<T>> &blocks() const { return blocks_; }
  const DwSepConv<T> &epilogue_conv() const { return epi_conv_; }
  const BatchNorm<T> &epilogue_bn() const { return epi_bn_; }
  const AttentivePool<T> &pool() const { return pool_; }
  const Linear<T> &emb() const { return emb_; }
  const BatchNorm<T> &emb_bn() const { return emb_bn_; }
  const Linear<T> &head() const { return head_; }

  /// Freshly initializes the final classifier layer.
  void ReinitHead(uint64_t seed) {
    Rng rng(MixSeed(seed, 0x4ead));
    head_.Init(params_, rng);
  }

  /// Forward pass over variable-length sequences (T_i x feat_dim each).
  /// In training mode batch norm uses batch statistics and dropout draws
  /// from `rng` (no dropout when rng is null).
  Output Forward(const Batch<T> &x, bool train, Rng *rng = nullptr,
                 Activations<T> *acts = nullptr) {
    Check(!x.empty(), "empty batch");
    for (const auto &f : x) {
      Check(f.c == cfg_.feat_dim, "expected ", cfg_.feat_dim, " features, got ", f.c);
      Check(f.n >= 1, "sequence with zero frames");
    }
    Activations<T> local;
    Activations<T> &a = acts ? *acts : local;
    const bool keep = acts != nullptr;
    a.train = train;
    a.blocks.assign(blocks_.size(), {});
    const double drop = train ? cfg_.dropout : 0.0;

    Batch<T> h = pro_conv_.Forward(params_, x, keep ? &a.pro_conv : nullptr);
    h = pro_bn_.Forward(params_, h, train, keep ? &a.pro_bn : nullptr, bn_momentum_);
    h = ReluDropout<T>::Forward(h, drop, rng, keep ? &a.pro_act : nullptr);

    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      const MegaBlock<T> &blk = blocks_[bi];
      auto &ba = a.blocks[bi];
      ba.subs.resize(blk.subs.size());
      Batch<T> m = h;
      for (size_t r = 0; r < blk.subs.size(); ++r) {
        m = blk.subs[r].conv.Forward(params_, m, keep ? &ba.subs[r].conv : nullptr);
        m = blk.subs[r].bn.Forward(params_, m, train, keep ? &ba.subs[r].bn : nullptr, bn_momentum_);
        if (r + 1 < blk.subs.size())
          m = ReluDropout<T>::Forward(m, drop, rng, keep ? &ba.subs[r].act : nullptr);
      }
      m = blk.se.Forward(params_, m, keep ? &ba.se : nullptr);
      Batch<T> res = blk.res_conv.Forward(params_, h, keep ? &ba.res_conv : nullptr);
      res = blk.res_bn.Forward(params_, res, train, keep ? &ba.res_bn : nullptr, bn_momentum_);
      for (size_t b = 0; b < m.size(); ++b)
        for (size_t i = 0; i < m[b].v.size(); ++i) m[b].v[i] += res[b].v[i];
      h = ReluDropout<T>::Forward(m, drop, rng, keep ? &ba.out_act : nullptr);
    }

    h = epi_conv_.Forward(params_, h, keep ? &a.epi_conv : nullptr);
    h = epi_bn_.Forward(params_, h, train, keep ? &a.epi_bn : nullptr, bn_momentum_);
    h = ReluDropout<T>::Forward(h, 0.0, nullptr, keep ? &a.epi_act : nullptr);

    Frames<T> pooled = pool_.Forward(params_, h, keep ? &a.pool : nullptr);
    Output out = Decode(pooled, train, keep ? &a : nullptr);
    a.valid = keep;
    return out;
  }

  /// Embedding layer and head applied to pooled vectors (batch x 2C_e).
  Output Decode(const Frames<T> &pooled, bool train, Activations<T> *acts = nullptr) {
    const bool keep = acts != nullptr;
    Frames<T> e = emb_.Forward(params_, pooled, keep ? &acts->emb : nullptr);
    if (cfg_.emb_bn_relu) {
      Batch<T> eb{std::move(e)};
      eb = emb_bn_.Forward(params_, eb, train, keep ? &acts->emb_bn : nullptr, bn_momentum_);
      eb = ReluDropout<T>::Forward(eb, 0.0, nullptr, keep ? &acts->emb_act : nullptr);
      e = std::move(eb[0]);
    }
    Output out;
    if (cfg_.head == HeadType::kLinear) {
      out.logits = head_.Forward(params_, e, keep ? &acts->head : nullptr);
    } else {
      out.logits = CosineHead<T>::Forward(params_.value(head_.w()), cfg_.embedding,
                                          cfg_.n_classes(),
                                          static_cast<T>(cfg_.cosine_scale), e,
                                          nullptr);
    }
    if (keep) acts->head_input = e;
    out.embedding = std::move(e);
    return out;
  }

  /// Accumulates parameter gradients for upstream logit gradients.
  void Backward(Activations<T> &acts, const Frames<T> &dlogits) {
    Check(acts.valid, "backward without a cached forward pass");
    Frames<T> de;
    if (cfg_.head == HeadType::kLinear) {
      de = head_.Backward(params_, acts.head, dlogits);
    } else {
      Frames<T> dcos = dlogits;
      for (T &g : dcos.v) g *= static_cast<T>(cfg_.cosine_scale);
      de = CosineHead<T>::BackwardCos(params_.value(head_.w()), params_.grad(head_.w()),
                                      cfg_.embedding, cfg_.n_classes(),
                                      acts.head_input, dcos);
    }
    BackwardFromEmbedding(acts, de);
  }

  /// Backward pass starting at the head input (used with the AAM loss,
  /// which handles the class vectors itself).
  void BackwardFromEmbedding(Activations<T> &acts, const Frames<T> &demb) {
    Check(acts.valid, "backward without a cached forward pass");
    Frames<T> g = demb;
    if (cfg_.emb_bn_relu) {
      Batch<T> gb{std::move(g)};
      gb = ReluDropout<T>::Backward(acts.emb_act, gb);
      gb = emb_bn_.Backward(params_, acts.emb_bn, gb);
      g = std::move(gb[0]);
    }
    Frames<T> dpool = emb_.Backward(params_, acts.emb, g);
    Batch<T> h = pool_.Backward(params_, acts.pool, dpool);
    h = ReluDropout<T>::Backward(acts.epi_act, h);
    h = epi_bn_.Backward(params_, acts.epi_bn, h);
    h = epi_conv_.Backward(params_, acts.epi_conv, h);

    for (size_t bi = blocks_.size(); bi-- > 0;) {
      const MegaBlock<T> &blk = blocks_[bi];
      auto &ba = acts.blocks[bi];
      Batch<T> dsum = ReluDropout<T>::Backward(ba.out_act, h);
      Batch<T> dres = blk.res_bn.Backward(params_, ba.res_bn, dsum);
      dres = blk.res_conv.Backward(params_, ba.res_conv, dres);
      Batch<T> m = blk.se.Backward(params_, ba.se, dsum);
      for (size_t r = blk.subs.size(); r-- > 0;) {
        if (r + 1 < blk.subs.size()) m = ReluDropout<T>::Backward(ba.subs[r].act, m);
        m = blk.subs[r].bn.Backward(params_, ba.subs[r].bn, m);
        m = blk.subs[r].conv.Backward(params_, ba.subs[r].conv, m);
      }
      for (size_t b = 0; b < m.size(); ++b)
        for (size_t i = 0; i < m[b].v.size(); ++i) m[b].v[i] += dres[b].v[i];
      h = std::move(m);
    }
    h = ReluDropout<T>::Backward(acts.pro_act, h);
    h = pro_bn_.Backward(params_, acts.pro_bn, h);
    input_grad_ = pro_conv_.Backward(params_, acts.pro_conv, h);
  }

  /// Gradient with respect to the input features from the last backward.
  const Batch<T> &input_grad() const { return input_grad_; }

  /// Eval-mode class probabilities, one row per sequence.
  Frames<T> Predict(const Batch<T> &x) { return SoftmaxRows(Forward(x, false).logits); }

 private:
  void Build() {
    pro_conv_ = DwSepConv<T>(params_, "prologue.conv", cfg_.feat_dim,
                             cfg_.prologue_channels, cfg_.prologue_kernel);
    pro_bn_ = BatchNorm<T>(params_, "prologue.bn", cfg_.prologue_channels);
    int in = cfg_.prologue_channels;
    for (size_t bi = 0; bi < cfg_.blocks.size(); ++bi) {
      const MegaBlockConfig &bc = cfg_.blocks[bi];
      const std::string pre = "blocks." + std::to_string(bi);
      MegaBlock<T> blk;
      int cin = in;
      for (int r = 0; r < bc.repeats; ++r) {
        const std::string sp = pre + ".sub." + std::to_string(r);
        SubBlock<T> sb;
        sb.conv = DwSepConv<T>(params_, sp + ".conv", cin, bc.channels, bc.kernel);
        sb.bn = BatchNorm<T>(params_, sp + ".bn", bc.channels);
        blk.subs.push_back(sb);
        cin = bc.channels;
      }
      blk.se = SqueezeExcite<T>(params_, pre + ".se", bc.channels, cfg_.se_reduction,
                                cfg_.se_window);
      blk.res_conv = DwSepConv<T>(params_, pre + ".res.conv", in, bc.channels, 1, false);
      blk.res_bn = BatchNorm<T>(params_, pre + ".res.bn", bc.channels);
      blocks_.push_back(blk);
      in = bc.channels;
    }
    epi_conv_ = DwSepConv<T>(params_, "epilogue.conv", in, cfg_.epilogue_channels,
                             cfg_.epilogue_kernel);
    epi_bn_ = BatchNorm<T>(params_, "epilogue.bn", cfg_.epilogue_channels);
    pool_ = AttentivePool<T>(params_, "pool.attention", cfg_.epilogue_channels,
                             cfg_.attention_hidden);
    emb_ = Linear<T>(params_, "decoder.emb", cfg_.pooled_dim(), cfg_.embedding);
    if (cfg_.emb_bn_relu) emb_bn_ = BatchNorm<T>(params_, "decoder.emb_bn", cfg_.embedding);
    head_ = Linear<T>(params_, "decoder.head", cfg_.embedding, cfg_.n_classes());
  }

  void Init(Rng &rng) {
    pro_conv_.Init(params_, rng);
    pro_bn_.Init(params_);
    for (const auto &blk : blocks_) {
      for (const auto &sb : blk.subs) {
        sb.conv.Init(params_, rng);
        sb.bn.Init(params_);
      }
      blk.se.Init(params_, rng);
      blk.res_conv.Init(params_, rng);
      blk.res_bn.Init(params_);
    }
    epi_conv_.Init(params_, rng);
    epi_bn_.Init(params_);
    pool_.Init(params_, rng);
    emb_.Init(params_, rng);
    if (cfg_.emb_bn_relu) emb_bn_.Init(params_);
    head_.Init(params_, rng);
  }

  ModelConfig cfg_;
  ParameterSet<T> params_;
  DwSepConv<T> pro_conv_;
  BatchNorm<T> pro_bn_;
  std::vector<MegaBlock<T>> blocks_;
  DwSepConv<T> epi_conv_;
  BatchNorm<T> epi_bn_;
  AttentivePool<T> pool_;
  Linear<T> emb_;
  BatchNorm<T> emb_bn_;
  Linear<T> head_;
  Batch<T> input_grad_;
  double bn_momentum_ = kBnMomentum;
};

/// Names of the classifier-head tensors (replaced on head re-initialization).
inline bool IsHeadTensor(const std::string &name) {
  return name.rfind("decoder.head.", 0) == 0;
}

}  // namespace langid

#endif  // LANGID_NN_MODEL_H_
