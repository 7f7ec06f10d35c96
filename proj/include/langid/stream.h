// langid/stream.h

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

#ifndef LANGID_STREAM_H_
#define LANGID_STREAM_H_

#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "langid/audio.h"
#include "langid/frontend.h"
#include "langid/nn/model.h"

namespace langid {

enum class StreamNorm {
  kPrecomputed,  // fixed per-bin statistics supplied up front
  kRunning,      // per-bin running mean / variance over the frames so far
  kPerFrame,     // each frame over its own mel bins
};

struct StreamConfig {
  StreamNorm norm = StreamNorm::kRunning;
  NormStats stats;              // required for kPrecomputed
  bool interim = true;          // compute probabilities after every push
};

/// Causal state of one conv layer: input frames still needed for pending
/// outputs, with absolute frame indices.
struct ConvCache {
  std::deque<std::vector<float>> frames;
  long first = 0;    // absolute index of frames.front()
  long received = 0;
  long emitted = 0;
  std::vector<float> bn_scale, bn_shift;  // the batch norm after the conv
};

struct BlockState {
  std::vector<ConvCache> subs;
  std::deque<std::vector<float>> residual;  // block inputs awaiting the main path
  std::vector<float> res_scale, res_shift;
  std::deque<std::vector<float>> se_window; // finite window ring
  std::vector<float> se_sum;                // cumulative sum (causal mean mode)
  long se_count = 0;
};

struct StreamState {
  const Model<float> *model = nullptr;
  StreamConfig cfg;
  int se_window = 0;  // effective window; < 0 is the causal running mean
  std::vector<float> pending;  // samples from the next frame start onward
  long samples_seen = 0;
  // Running normalization statistics per bin.
  long norm_count = 0;
  std::vector<double> norm_mean, norm_m2;
  ConvCache prologue;
  std::vector<BlockState> blocks;
  ConvCache epilogue;
  PoolAccumulator<float> pool;
  long frames_in = 0;      // feature frames extracted
  long frames_pooled = 0;  // encoder frames accumulated
  bool finalized = false;
};

struct StreamOutput {
  std::optional<std::vector<double>> probs;  // interim, when any frame is pooled
  long frames_pooled = 0;
};

/// Empty streaming session. A model with global SE context streams with a
/// causal running mean instead (approximate).
StreamState StreamInit(const Model<float> &model, const StreamConfig &cfg = {});

/// Consumes 16 kHz samples; an empty chunk leaves the state unchanged.
StreamOutput StreamPush(StreamState &state, const std::vector<float> &chunk);

/// Flushes the right context and returns the final logits.
std::vector<double> StreamFinalizeLogits(StreamState &state);

/// Class probabilities; fails with "no frames" before any frame exists.
std::vector<double> StreamFinalize(StreamState &state);

/// Convenience: one session over `audio` split into chunks of `chunk` samples.
std::vector<double> StreamLogits(const Model<float> &model, const AudioBuffer &audio,
                                 const std::vector<size_t> &chunk_sizes,
                                 const StreamConfig &cfg);

}  // namespace langid

#endif  // LANGID_STREAM_H_
