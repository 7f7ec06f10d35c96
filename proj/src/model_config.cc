// langid/model_config.cc

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

#include "langid/model_config.h"

#include <algorithm>

namespace langid {

namespace {

std::string JoinInts(const std::vector<int> &v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> ParseInts(const std::string &key, const std::string &s) {
  std::vector<int> out;
  for (const std::string &piece : SplitTrim(s, ',')) {
    try {
      size_t pos = 0;
      int v = std::stoi(piece, &pos);
      if (pos != piece.size()) throw std::invalid_argument(piece);
      out.push_back(v);
    } catch (const std::exception &) {
      Fail("config key '", key, "': bad integer list '", s, "'");
    }
  }
  return out;
}

int64_t DwSepCount(int cin, int cout, int k) {
  return int64_t(k) * cin + int64_t(cin) * cout;
}
int64_t BnCount(int c) { return 4 * int64_t(c); }

}  // namespace

int ModelConfig::LabelIndex(const std::string &label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) Fail("unknown label '", label, "'");
  return static_cast<int>(it - labels.begin());
}

void ModelConfig::Validate() const {
  Check(feat_dim > 0, "feat_dim must be positive");
  Check(prologue_kernel % 2 == 1 && epilogue_kernel % 2 == 1,
        "kernels must be odd");
  Check(prologue_channels > 0 && epilogue_channels > 0, "channels must be positive");
  for (const auto &b : blocks)
    Check(b.repeats > 0 && b.kernel % 2 == 1 && b.channels > 0,
          "invalid mega block (repeats ", b.repeats, ", kernel ", b.kernel,
          ", channels ", b.channels, ")");
  Check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0,1)");
  Check(se_reduction > 0, "se_reduction must be positive");
  Check(se_window >= 0, "se_window must be >= 0 (0 = global)");
  Check(attention_hidden > 0 && embedding > 0, "sizes must be positive");
  Check(labels.size() >= 2, "need at least two class labels");
  Check(cosine_scale > 0.0, "cosine_scale must be positive");
}

KeyValueFile ModelConfig::ToKeyValue() const {
  KeyValueFile kv;
  kv.Set("feat_dim", std::to_string(feat_dim));
  kv.Set("prologue_kernel", std::to_string(prologue_kernel));
  kv.Set("prologue_channels", std::to_string(prologue_channels));
  std::vector<int> reps, ks, cs;
  for (const auto &b : blocks) {
    reps.push_back(b.repeats);
    ks.push_back(b.kernel);
    cs.push_back(b.channels);
  }
  kv.Set("block_repeats", JoinInts(reps));
  kv.Set("block_kernels", JoinInts(ks));
  kv.Set("block_channels", JoinInts(cs));
  kv.Set("epilogue_kernel", std::to_string(epilogue_kernel));
  kv.Set("epilogue_channels", std::to_string(epilogue_channels));
  std::ostringstream d;
  d << dropout;
  kv.Set("dropout", d.str());
  kv.Set("se_reduction", std::to_string(se_reduction));
  kv.Set("se_context", se_window == 0 ? "global" : std::to_string(se_window));
  kv.Set("attention_hidden", std::to_string(attention_hidden));
  kv.Set("embedding", std::to_string(embedding));
  kv.Set("emb_bn_relu", emb_bn_relu ? "true" : "false");
  kv.Set("head", head == HeadType::kLinear ? "linear" : "cosine");
  std::ostringstream s;
  s << cosine_scale;
  kv.Set("cosine_scale", s.str());
  std::string l;
  for (size_t i = 0; i < labels.size(); ++i) l += (i ? "," : "") + labels[i];
  kv.Set("labels", l);
  return kv;
}

ModelConfig ModelConfig::FromKeyValue(const KeyValueFile &kv) {
  const KeyValueFile known = ModelConfig().ToKeyValue();
  for (const auto &[k, v] : kv.values())
    if (!known.Has(k)) Fail("unknown model config key '", k, "'");
  ModelConfig c;
  c.blocks.clear();
  c.feat_dim = static_cast<int>(kv.GetInt("feat_dim", c.feat_dim));
  c.prologue_kernel = static_cast<int>(kv.GetInt("prologue_kernel", c.prologue_kernel));
  c.prologue_channels =
      static_cast<int>(kv.GetInt("prologue_channels", c.prologue_channels));
  std::vector<int> reps = ParseInts("block_repeats", kv.GetOr("block_repeats", ""));
  std::vector<int> ks = ParseInts("block_kernels", kv.GetOr("block_kernels", ""));
  std::vector<int> cs = ParseInts("block_channels", kv.GetOr("block_channels", ""));
  Check(reps.size() == ks.size() && ks.size() == cs.size(),
        "block_repeats, block_kernels, block_channels must have equal length");
  for (size_t i = 0; i < reps.size(); ++i) c.blocks.push_back({reps[i], ks[i], cs[i]});
  c.epilogue_kernel = static_cast<int>(kv.GetInt("epilogue_kernel", c.epilogue_kernel));
  c.epilogue_channels =
      static_cast<int>(kv.GetInt("epilogue_channels", c.epilogue_channels));
  c.dropout = kv.GetDouble("dropout", c.dropout);
  c.se_reduction = static_cast<int>(kv.GetInt("se_reduction", c.se_reduction));
  const std::string se = kv.GetOr("se_context", "global");
  if (se == "global") {
    c.se_window = 0;
  } else {
    std::vector<int> w = ParseInts("se_context", se);
    Check(w.size() == 1 && w[0] > 0, "se_context must be 'global' or a positive frame count");
    c.se_window = w[0];
  }
  c.attention_hidden = static_cast<int>(kv.GetInt("attention_hidden", c.attention_hidden));
  c.embedding = static_cast<int>(kv.GetInt("embedding", c.embedding));
  c.emb_bn_relu = kv.GetBool("emb_bn_relu", c.emb_bn_relu);
  const std::string head = kv.GetOr("head", "linear");
  if (head == "linear")
    c.head = HeadType::kLinear;
  else if (head == "cosine")
    c.head = HeadType::kCosine;
  else
    Fail("head must be 'linear' or 'cosine', got '", head, "'");
  c.cosine_scale = kv.GetDouble("cosine_scale", c.cosine_scale);
  if (kv.Has("labels")) c.labels = SplitTrim(kv.Get("labels"), ',');
  c.Validate();
  return c;
}

ModelConfig ModelConfig::Read(const std::string &path) {
  return FromKeyValue(KeyValueFile::Read(path));
}

void ModelConfig::Write(const std::string &path) const { ToKeyValue().Write(path); }

uint64_t ModelConfig::Digest() const { return Fnv1a64(ToKeyValue().ToString()); }

ModelConfig ModelConfig::Tiny() {
  ModelConfig c;
  c.prologue_kernel = 3;
  c.prologue_channels = 64;
  c.blocks = {{3, 7, 64}, {3, 11, 64}, {3, 15, 64}};
  c.epilogue_kernel = 1;
  c.epilogue_channels = 64;
  c.dropout = 0.1;
  c.attention_hidden = 32;
  return c;
}

ModelConfig ModelConfig::Large() {
  ModelConfig c;
  c.prologue_kernel = 3;
  c.prologue_channels = 1224;
  c.blocks = {{3, 7, 1224}, {3, 11, 1224}, {3, 15, 1224}};
  c.epilogue_kernel = 1;
  c.epilogue_channels = 1536;
  c.dropout = 0.1;
  c.attention_hidden = 128;
  return c;
}

ModelConfig ModelConfig::Preset(const std::string &name) {
  if (name == "tiny") return Tiny();
  if (name == "large") return Large();
  Fail("unknown model preset '", name, "' (tiny | large)");
}

int64_t CountParams(const ModelConfig &cfg) {
  int64_t n = 0;
  n += DwSepCount(cfg.feat_dim, cfg.prologue_channels, cfg.prologue_kernel) +
       BnCount(cfg.prologue_channels);
  int in = cfg.prologue_channels;
  for (const auto &b : cfg.blocks) {
    int cin = in;
    for (int r = 0; r < b.repeats; ++r) {
      n += DwSepCount(cin, b.channels, b.kernel) + BnCount(b.channels);
      cin = b.channels;
    }
    const int h = std::max(1, b.channels / cfg.se_reduction);
    n += int64_t(b.channels) * h + h + int64_t(h) * b.channels + b.channels;
    n += int64_t(in) * b.channels + BnCount(b.channels);  // residual 1x1 + BN
    in = b.channels;
  }
  n += DwSepCount(in, cfg.epilogue_channels, cfg.epilogue_kernel) +
       BnCount(cfg.epilogue_channels);
  n += int64_t(cfg.epilogue_channels) * cfg.attention_hidden +
       2 * int64_t(cfg.attention_hidden);
  n += int64_t(cfg.pooled_dim()) * cfg.embedding + cfg.embedding;
  if (cfg.emb_bn_relu) n += BnCount(cfg.embedding);
  n += int64_t(cfg.embedding) * cfg.n_classes() + cfg.n_classes();
  return n;
}

int LookaheadFrames(const ModelConfig &cfg) {
  int l = (cfg.prologue_kernel - 1) / 2;
  for (const auto &b : cfg.blocks) l += b.repeats * ((b.kernel - 1) / 2);
  l += (cfg.epilogue_kernel - 1) / 2;
  return l;
}

}  // namespace langid
