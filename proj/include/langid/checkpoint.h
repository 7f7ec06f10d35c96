// langid/checkpoint.h

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

#ifndef LANGID_CHECKPOINT_H_
#define LANGID_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "langid/nn/model.h"

namespace langid {

// Binary layout, little-endian:
//   "LIDC" | u32 version | u64 config digest | u32 tensor count |
//   per tensor: u32 name length | name | u32 rank | u32 dims[rank] |
//               float32 payload
constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct CheckpointContents {
  uint64_t digest = 0;
  std::vector<CheckpointTensor> tensors;
};

std::vector<uint8_t> EncodeCheckpoint(const ModelConfig &cfg, const ParameterSet<float> &params);
CheckpointContents DecodeCheckpoint(const std::vector<uint8_t> &bytes,
                                    const std::string &what = "<memory>");

void SaveCheckpoint(const std::string &path, const Model<float> &model);
CheckpointContents ReadCheckpoint(const std::string &path);

/// Loads a checkpoint into `model`. Without reinit_head the config digest
/// must match and every tensor must be present with the same shape. With
/// reinit_head the digest is not checked, head tensors are re-initialized
/// from `seed`, and only non-head shape mismatches are errors.
void LoadCheckpointInto(const std::string &path, Model<float> &model, bool reinit_head = false,
                        uint64_t seed = 0);

}  // namespace langid

#endif  // LANGID_CHECKPOINT_H_
