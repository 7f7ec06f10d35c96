// langid/checkpoint.cc

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

#include "langid/checkpoint.h"

#include <cstring>
#include <fstream>
#include <map>

namespace langid {

namespace {

void PutU32(std::vector<uint8_t> &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}
void PutU64(std::vector<uint8_t> &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

class Reader {
 public:
  Reader(const std::vector<uint8_t> &b, const std::string &what) : b_(b), what_(what) {}
  void Need(size_t n) const {
    if (pos_ + n > b_.size()) Fail(what_, ": truncated checkpoint");
  }
  uint32_t U32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(b_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t U64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(b_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::string Bytes(size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char *>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float F32() {
    uint32_t u = U32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
  }
  bool AtEnd() const { return pos_ == b_.size(); }

 private:
  const std::vector<uint8_t> &b_;
  std::string what_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<uint8_t> EncodeCheckpoint(const ModelConfig &cfg, const ParameterSet<float> &params) {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'L', 'I', 'D', 'C'});
  PutU32(out, kCheckpointVersion);
  PutU64(out, cfg.Digest());
  PutU32(out, static_cast<uint32_t>(params.size()));
  for (const auto &e : params.entries()) {
    PutU32(out, static_cast<uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    PutU32(out, static_cast<uint32_t>(e.value.shape.size()));
    for (int d : e.value.shape) PutU32(out, static_cast<uint32_t>(d));
    for (float v : e.value.data) {
      uint32_t u;
      std::memcpy(&u, &v, 4);
      PutU32(out, u);
    }
  }
  return out;
}

CheckpointContents DecodeCheckpoint(const std::vector<uint8_t> &bytes, const std::string &what) {
  Reader r(bytes, what);
  if (r.Bytes(4) != "LIDC") Fail(what, ": not a langid checkpoint");
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion)
    Fail(what, ": unsupported checkpoint version ", version);
  CheckpointContents c;
  c.digest = r.U64();
  const uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    t.name = r.Bytes(r.U32());
    const uint32_t rank = r.U32();
    size_t n = 1;
    for (uint32_t k = 0; k < rank; ++k) {
      t.shape.push_back(static_cast<int>(r.U32()));
      n *= static_cast<size_t>(t.shape.back());
    }
    r.Need(4 * n);
    t.data.resize(n);
    for (size_t k = 0; k < n; ++k) t.data[k] = r.F32();
    c.tensors.push_back(std::move(t));
  }
  if (!r.AtEnd()) Fail(what, ": trailing bytes after checkpoint payload");
  return c;
}

void SaveCheckpoint(const std::string &path, const Model<float> &model) {
  std::vector<uint8_t> bytes = EncodeCheckpoint(model.config(), model.params());
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot write checkpoint ", path);
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail("write failed: ", path);
}

CheckpointContents ReadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open checkpoint ", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeCheckpoint(bytes, path);
}

void LoadCheckpointInto(const std::string &path, Model<float> &model, bool reinit_head,
                        uint64_t seed) {
  CheckpointContents c = ReadCheckpoint(path);
  if (!reinit_head && c.digest != model.config().Digest())
    Fail(path, ": config digest mismatch (checkpoint was trained with a different model config)");
  std::map<std::string, const CheckpointTensor *> by_name;
  for (const auto &t : c.tensors) by_name[t.name] = &t;
  auto &params = model.params();
  for (auto &e : params.entries()) {
    const bool head = IsHeadTensor(e.name);
    if (reinit_head && head) continue;
    auto it = by_name.find(e.name);
    if (it == by_name.end()) Fail(path, ": missing tensor ", e.name);
    if (it->second->shape != e.value.shape) Fail(path, ": shape mismatch for tensor ", e.name);
    e.value.data = it->second->data;
  }
  if (reinit_head) model.ReinitHead(seed);
}

}  // namespace langid
