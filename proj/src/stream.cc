// langid/stream.cc

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

#include "langid/stream.h"

#include <algorithm>
#include <cmath>
#include <span>

namespace langid {

namespace {

using Vec = std::vector<float>;

const LogMelExtractor &Extractor() {
  static const LogMelExtractor extractor;
  return extractor;
}

// Conv outputs (before batch norm) whose right context has arrived; all
// remaining outputs when flushing, with zeros past the end.
std::vector<Vec> ConvStep(const ParameterSet<float> &p, const DwSepConv<float> &conv,
                          ConvCache &c, const Vec *frame, bool flush) {
  if (frame) {
    c.frames.push_back(*frame);
    ++c.received;
  }
  const int k = conv.kernel();
  const int pad = (k - 1) / 2;
  const long limit = flush ? c.received : c.received - pad;
  std::vector<Vec> out;
  std::vector<const float *> taps(k);
  Vec d(conv.cin());
  while (c.emitted < limit) {
    const long t = c.emitted;
    const float *src;
    if (conv.depthwise()) {
      for (int j = 0; j < k; ++j) {
        const long s = t + j - pad;
        taps[j] = (s >= 0 && s < c.received) ? c.frames[s - c.first].data() : nullptr;
      }
      DepthwiseFrame(taps.data(), p.value(conv.dw()), k, conv.cin(), d.data());
      src = d.data();
    } else {
      src = c.frames[t - c.first].data();
    }
    Vec y(conv.cout());
    PointwiseFrame(src, p.value(conv.pw()), static_cast<const float *>(nullptr), conv.cin(),
                   conv.cout(), y.data());
    out.push_back(std::move(y));
    ++c.emitted;
    while (!c.frames.empty() && c.first < c.emitted - pad) {
      c.frames.pop_front();
      ++c.first;
    }
  }
  return out;
}

void Affine(Vec &x, const Vec &scale, const Vec &shift) {
  for (size_t i = 0; i < x.size(); ++i) x[i] = x[i] * scale[i] + shift[i];
}

void Relu(Vec &x) {
  for (float &v : x) v *= v > 0.0f ? 1.0f : 0.0f;
}

ConvCache MakeCache(const ParameterSet<float> &p, const BatchNorm<float> &bn) {
  ConvCache c;
  bn.Affine(p, &c.bn_scale, &c.bn_shift);
  return c;
}

class Pipeline {
 public:
  explicit Pipeline(StreamState &s) : s_(s), m_(*s.model), p_(m_.params()) {}

  void Feature(const Vec &f) { Prologue(&f, false); }
  void Flush() { Prologue(nullptr, true); }

 private:
  void Prologue(const Vec *f, bool flush) {
    for (Vec &y : ConvStep(p_, m_.prologue_conv(), s_.prologue, f, flush)) {
      Affine(y, s_.prologue.bn_scale, s_.prologue.bn_shift);
      Relu(y);
      Block(0, &y, false);
    }
    if (flush) Block(0, nullptr, true);
  }

  void Block(size_t bi, const Vec *x, bool flush) {
    if (bi == s_.blocks.size()) {
      Epilogue(x, flush);
      return;
    }
    if (x) s_.blocks[bi].residual.push_back(*x);
    Sub(bi, 0, x, flush);
    if (flush) Block(bi + 1, nullptr, true);
  }

  void Sub(size_t bi, size_t r, const Vec *x, bool flush) {
    const MegaBlock<float> &blk = m_.blocks()[bi];
    BlockState &bs = s_.blocks[bi];
    ConvCache &c = bs.subs[r];
    const bool last = r + 1 == blk.subs.size();
    for (Vec &y : ConvStep(p_, blk.subs[r].conv, c, x, flush)) {
      Affine(y, c.bn_scale, c.bn_shift);
      if (!last) {
        Relu(y);
        Sub(bi, r + 1, &y, false);
      } else {
        Out(bi, y);
      }
    }
    if (flush && !last) Sub(bi, r + 1, nullptr, true);
  }

  // SE gate, residual add, activation, then the next block.
  void Out(size_t bi, Vec &y) {
    const MegaBlock<float> &blk = m_.blocks()[bi];
    BlockState &bs = s_.blocks[bi];
    const int ch = static_cast<int>(y.size());
    Vec ctx(ch, 0.0f);
    if (s_.se_window > 0) {
      bs.se_window.push_back(y);
      if (static_cast<int>(bs.se_window.size()) > s_.se_window) bs.se_window.pop_front();
      for (const Vec &r : bs.se_window)
        for (int c = 0; c < ch; ++c) ctx[c] += r[c];
      const float inv = 1.0f / static_cast<float>(bs.se_window.size());
      for (int c = 0; c < ch; ++c) ctx[c] *= inv;
    } else {
      if (bs.se_sum.empty()) bs.se_sum.assign(ch, 0.0f);
      for (int c = 0; c < ch; ++c) bs.se_sum[c] += y[c];
      ++bs.se_count;
      const float inv = 1.0f / static_cast<float>(bs.se_count);
      for (int c = 0; c < ch; ++c) ctx[c] = bs.se_sum[c] * inv;
    }
    const SqueezeExcite<float> &se = blk.se;
    Vec hidden(se.hidden()), gate(ch);
    SeGate(ctx.data(), p_.value(se.w1()), p_.value(se.b1()), p_.value(se.w2()),
           p_.value(se.b2()), ch, se.hidden(), hidden.data(), gate.data());
    for (int c = 0; c < ch; ++c) y[c] = y[c] * gate[c];

    Check(!bs.residual.empty(), "stream: residual queue underflow");
    const Vec x = std::move(bs.residual.front());
    bs.residual.pop_front();
    Vec res(ch);
    PointwiseFrame(x.data(), p_.value(blk.res_conv.pw()), static_cast<const float *>(nullptr),
                   blk.res_conv.cin(), ch, res.data());
    Affine(res, bs.res_scale, bs.res_shift);
    for (int c = 0; c < ch; ++c) y[c] += res[c];
    Relu(y);
    Block(bi + 1, &y, false);
  }

  void Epilogue(const Vec *x, bool flush) {
    const AttentivePool<float> &pool = m_.pool();
    Vec u(pool.hidden());
    for (Vec &y : ConvStep(p_, m_.epilogue_conv(), s_.epilogue, x, flush)) {
      Affine(y, s_.epilogue.bn_scale, s_.epilogue.bn_shift);
      Relu(y);
      const float e = AttentionScore(y.data(), p_.value(pool.w()), p_.value(pool.b()),
                                     p_.value(pool.v()), pool.channels(), pool.hidden(),
                                     u.data());
      s_.pool.Add(e, y.data());
      ++s_.frames_pooled;
    }
  }

  StreamState &s_;
  const Model<float> &m_;
  const ParameterSet<float> &p_;
};

Vec NormalizeFrame(StreamState &s, const Vec &raw) {
  Vec out(raw.size());
  const size_t bins = raw.size();
  switch (s.cfg.norm) {
    case StreamNorm::kPrecomputed:
      for (size_t b = 0; b < bins; ++b) {
        const double inv = 1.0 / std::max(s.cfg.stats.std[b], kStdFloor);
        out[b] = static_cast<float>((raw[b] - s.cfg.stats.mean[b]) * inv);
      }
      break;
    case StreamNorm::kRunning:
      ++s.norm_count;
      for (size_t b = 0; b < bins; ++b) {
        const double d = raw[b] - s.norm_mean[b];
        s.norm_mean[b] += d / static_cast<double>(s.norm_count);
        s.norm_m2[b] += d * (raw[b] - s.norm_mean[b]);
        const double sd = std::sqrt(s.norm_m2[b] / static_cast<double>(s.norm_count));
        out[b] = static_cast<float>((raw[b] - s.norm_mean[b]) / std::max(sd, kStdFloor));
      }
      break;
    case StreamNorm::kPerFrame: {
      double sum = 0.0;
      for (size_t b = 0; b < bins; ++b) sum += raw[b];
      const double mean = sum / static_cast<double>(bins);
      double var = 0.0;
      for (size_t b = 0; b < bins; ++b) {
        const double d = raw[b] - mean;
        var += d * d;
      }
      const double inv = 1.0 / std::max(std::sqrt(var / static_cast<double>(bins)), kStdFloor);
      for (size_t b = 0; b < bins; ++b) out[b] = static_cast<float>((raw[b] - mean) * inv);
      break;
    }
  }
  return out;
}

std::vector<double> Logits(const StreamState &s, const PoolAccumulator<float> &acc) {
  const int c = static_cast<int>(acc.s1.size());
  Frames<float> pooled(1, 2 * c);
  acc.Finish(pooled.row(0));
  // Eval-mode decoding reads the parameters only.
  auto out = const_cast<Model<float> *>(s.model)->Decode(pooled, false);
  return std::vector<double>(out.logits.row(0), out.logits.row(0) + out.logits.c);
}

std::vector<double> Softmax(const std::vector<double> &z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (size_t i = 0; i < z.size(); ++i) sum += (p[i] = std::exp(z[i] - m));
  for (double &v : p) v /= sum;
  return p;
}

}  // namespace

StreamState StreamInit(const Model<float> &model, const StreamConfig &cfg) {
  const ModelConfig &mc = model.config();
  if (cfg.norm == StreamNorm::kPrecomputed)
    Check(cfg.stats.mean.size() == static_cast<size_t>(mc.feat_dim) &&
              cfg.stats.std.size() == static_cast<size_t>(mc.feat_dim),
          "precomputed normalization needs ", mc.feat_dim, " statistics per kind");
  StreamState s;
  s.model = &model;
  s.cfg = cfg;
  s.se_window = mc.se_window;
  if (s.se_window == 0) {
    LogInfo("stream: global SE context replaced by a causal running mean (approximate)");
    s.se_window = -1;
  }
  s.norm_mean.assign(mc.feat_dim, 0.0);
  s.norm_m2.assign(mc.feat_dim, 0.0);
  const ParameterSet<float> &p = model.params();
  s.prologue = MakeCache(p, model.prologue_bn());
  for (const auto &blk : model.blocks()) {
    BlockState bs;
    for (const auto &sb : blk.subs) bs.subs.push_back(MakeCache(p, sb.bn));
    blk.res_bn.Affine(p, &bs.res_scale, &bs.res_shift);
    s.blocks.push_back(std::move(bs));
  }
  s.epilogue = MakeCache(p, model.epilogue_bn());
  s.pool = PoolAccumulator<float>(mc.epilogue_channels);
  return s;
}

StreamOutput StreamPush(StreamState &s, const std::vector<float> &chunk) {
  Check(!s.finalized, "stream already finalized");
  StreamOutput out;
  out.frames_pooled = s.frames_pooled;
  if (chunk.empty()) return out;
  s.pending.insert(s.pending.end(), chunk.begin(), chunk.end());
  s.samples_seen += static_cast<long>(chunk.size());
  Pipeline pipe(s);
  Vec raw(kMelBins);
  size_t start = 0;
  while (s.pending.size() - start >= static_cast<size_t>(kWindowSamples)) {
    Extractor().ComputeFrame(std::span<const float>(s.pending.data() + start, kWindowSamples),
                             std::span<float>(raw));
    ++s.frames_in;
    pipe.Feature(NormalizeFrame(s, raw));
    start += kHopSamples;
  }
  s.pending.erase(s.pending.begin(), s.pending.begin() + static_cast<long>(start));
  out.frames_pooled = s.frames_pooled;
  if (s.cfg.interim && s.frames_pooled > 0) out.probs = Softmax(Logits(s, s.pool));
  return out;
}

std::vector<double> StreamFinalizeLogits(StreamState &s) {
  Check(!s.finalized, "stream already finalized");
  if (s.frames_in == 0) Fail("no frames");
  Pipeline pipe(s);
  pipe.Flush();
  s.finalized = true;
  return Logits(s, s.pool);
}

std::vector<double> StreamFinalize(StreamState &s) { return Softmax(StreamFinalizeLogits(s)); }

std::vector<double> StreamLogits(const Model<float> &model, const AudioBuffer &audio,
                                 const std::vector<size_t> &chunk_sizes,
                                 const StreamConfig &cfg) {
  StreamState s = StreamInit(model, cfg);
  size_t pos = 0;
  for (size_t n : chunk_sizes) {
    const size_t end = std::min(audio.samples.size(), pos + n);
    StreamPush(s, std::vector<float>(audio.samples.begin() + pos, audio.samples.begin() + end));
    pos = end;
  }
  if (pos < audio.samples.size())
    StreamPush(s, std::vector<float>(audio.samples.begin() + pos, audio.samples.end()));
  return StreamFinalizeLogits(s);
}

}  // namespace langid
