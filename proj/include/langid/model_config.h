// langid/model_config.h

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

#ifndef LANGID_MODEL_CONFIG_H_
#define LANGID_MODEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "langid/common.h"

namespace langid {

struct MegaBlockConfig {
  int repeats = 3;
  int kernel = 7;
  int channels = 64;

  bool operator==(const MegaBlockConfig &) const = default;
};

enum class HeadType { kLinear, kCosine };

/// Architecture hyperparameters. Pooled size is 2 * epilogue_channels.
struct ModelConfig {
  int feat_dim = 80;
  int prologue_kernel = 3;
  int prologue_channels = 64;
  std::vector<MegaBlockConfig> blocks;
  int epilogue_kernel = 1;
  int epilogue_channels = 64;
  double dropout = 0.1;
  int se_reduction = 8;
  /// 0 = global context; W > 0 = trailing window of W frames.
  int se_window = 0;
  int attention_hidden = 32;
  int embedding = 192;
  /// BN + ReLU between the embedding layer and the classifier.
  bool emb_bn_relu = true;
  HeadType head = HeadType::kLinear;
  double cosine_scale = 30.0;
  std::vector<std::string> labels = {"en", "zh"};

  int n_classes() const { return static_cast<int>(labels.size()); }
  int pooled_dim() const { return 2 * epilogue_channels; }
  int LabelIndex(const std::string &label) const;

  void Validate() const;

  KeyValueFile ToKeyValue() const;
  static ModelConfig FromKeyValue(const KeyValueFile &kv);
  static ModelConfig Read(const std::string &path);
  void Write(const std::string &path) const;

  /// FNV-1a over the canonical key = value text.
  uint64_t Digest() const;

  /// ~100K parameters, for desk-scale runs.
  static ModelConfig Tiny();
  /// Full-size preset (~22 M parameters, pooled size 3072).
  static ModelConfig Large();
  static ModelConfig Preset(const std::string &name);

  bool operator==(const ModelConfig &) const = default;
};

/// Analytic parameter count (all tensors, including BN running statistics).
int64_t CountParams(const ModelConfig &cfg);

/// Sum of (kernel - 1) / 2 over every depthwise conv on the encoder path:
/// how many future frames one output frame depends on.
int LookaheadFrames(const ModelConfig &cfg);

}  // namespace langid

#endif  // LANGID_MODEL_CONFIG_H_
