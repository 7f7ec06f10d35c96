// langid/model_test.cc

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

#include <fstream>

#include "langid/checkpoint.h"
#include "langid/model_config.h"
#include "langid/nn/model.h"
#include "langid/train.h"
#include "test_util.h"

namespace langid {
namespace {

TEST(ParamCount, AnalyticEqualsEnumeratedOnPresets) {
  for (const char *name : {"tiny", "large"}) {
    ModelConfig c = ModelConfig::Preset(name);
    EXPECT_EQ(CountParams(c), static_cast<int64_t>(Model<float>(c).params().NumElements()))
        << name;
  }
}

TEST(ParamCount, AnalyticEqualsEnumeratedOnVariants) {
  ModelConfig c = ModelConfig::Tiny();
  c.emb_bn_relu = false;
  c.blocks = {{1, 3, 16}, {2, 5, 24}};
  c.epilogue_channels = 40;
  c.se_reduction = 32;  // hidden size clamps to 1 for 16 channels
  c.labels = {"a", "b", "c", "d", "e"};
  c.head = HeadType::kCosine;
  EXPECT_EQ(CountParams(c), static_cast<int64_t>(Model<float>(c).params().NumElements()));
}

TEST(ParamCount, LargePresetNearTwentyTwoMillion) {
  const int64_t n = CountParams(ModelConfig::Large());
  EXPECT_GE(n, 21000000);
  EXPECT_LE(n, 23500000);
}

TEST(ParamCount, TinyPresetValue) { EXPECT_EQ(CountParams(ModelConfig::Tiny()), 99914); }

TEST(ModelConfig, KeyValueRoundTrip) {
  ModelConfig c = ModelConfig::Tiny();
  c.se_window = 9;
  c.head = HeadType::kCosine;
  c.labels = {"spk00", "spk01", "spk02"};
  c.emb_bn_relu = false;
  ModelConfig back = ModelConfig::FromKeyValue(KeyValueFile::Parse(c.ToKeyValue().ToString()));
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.Digest(), c.Digest());
  c.dropout = 0.2;
  EXPECT_NE(back.Digest(), c.Digest());
}

TEST(ModelConfig, RejectsInvalid) {
  ModelConfig c = ModelConfig::Tiny();
  c.prologue_kernel = 4;
  EXPECT_THROW(c.Validate(), Error);
  c = ModelConfig::Tiny();
  c.labels = {"en"};
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_THROW(ModelConfig::Preset("huge"), Error);
  EXPECT_THROW(ModelConfig::FromKeyValue(KeyValueFile::Parse("bogus_key = 1\n")), Error);
}

TEST(ModelConfig, LookaheadSumsHalfKernels) {
  // prologue 1 + 3*(3+5+7) + epilogue 0
  EXPECT_EQ(LookaheadFrames(ModelConfig::Tiny()), 46);
}

ModelConfig Small(std::vector<std::string> labels = {"en", "zh"}) {
  ModelConfig c;
  c.prologue_channels = 8;
  c.blocks = {{2, 3, 8}, {1, 5, 8}};
  c.epilogue_channels = 8;
  c.attention_hidden = 4;
  c.embedding = 6;
  c.labels = std::move(labels);
  return c;
}

Batch<float> Input(int seed) {
  Rng rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Batch<float> x;
  for (int n : {7, 12}) {
    Frames<float> f(n, 80);
    for (float &v : f.v) v = g(rng);
    x.push_back(f);
  }
  return x;
}

TEST(Checkpoint, RoundTripPreservesOutputs) {
  const std::string dir = testing::TempDir("ckpt_roundtrip");
  Model<float> m(Small(), 7);
  // Non-trivial running statistics.
  Rng rng(1);
  m.Forward(Input(2), true, &rng);
  SaveCheckpoint(dir + "/m.ckpt", m);
  Model<float> back(Small(), 99);
  LoadCheckpointInto(dir + "/m.ckpt", back);
  auto a = m.Forward(Input(3), false);
  auto b = back.Forward(Input(3), false);
  for (size_t i = 0; i < a.logits.v.size(); ++i)
    EXPECT_NEAR(a.logits.v[i], b.logits.v[i], 1e-7);
  EXPECT_EQ(EncodeCheckpoint(m.config(), m.params()),
            EncodeCheckpoint(back.config(), back.params()));
}

TEST(Checkpoint, DigestMismatchRejectedUnlessHeadReinit) {
  const std::string dir = testing::TempDir("ckpt_digest");
  Model<float> m(Small(), 7);
  SaveCheckpoint(dir + "/m.ckpt", m);
  ModelConfig other = Small();
  other.dropout = 0.3;
  Model<float> o(other, 1);
  EXPECT_THROW(LoadCheckpointInto(dir + "/m.ckpt", o), Error);
  EXPECT_NO_THROW(LoadCheckpointInto(dir + "/m.ckpt", o, true, 5));
}

TEST(Checkpoint, HeadReinitKeepsEncoderBitExact) {
  const std::string dir = testing::TempDir("ckpt_reinit");
  std::vector<std::string> spk;
  for (int i = 0; i < 20; ++i) spk.push_back("spk" + std::to_string(i));
  ModelConfig pre = Small(spk);
  pre.head = HeadType::kCosine;
  Model<float> m(pre, 7);
  Rng rng(1);
  m.Forward(Input(2), true, &rng);
  SaveCheckpoint(dir + "/spk.ckpt", m);

  Model<float> ft = LoadForFinetune(dir + "/spk.ckpt", Small(), true, 11);
  for (const auto &e : ft.params().entries()) {
    if (IsHeadTensor(e.name)) continue;
    EXPECT_EQ(e.value.data, m.params().entry(e.name).value.data) << e.name;
  }
  EXPECT_EQ(ft.params().entry("decoder.head.w").value.shape, (std::vector<int>{6, 2}));
  // The head equals a fresh initialization with the same seed.
  Model<float> fresh(Small(), 0);
  fresh.ReinitHead(11);
  EXPECT_EQ(ft.params().entry("decoder.head.w").value.data,
            fresh.params().entry("decoder.head.w").value.data);
  // Without reinit the class mismatch is an error.
  EXPECT_THROW(LoadForFinetune(dir + "/spk.ckpt", Small(), false), Error);
}

TEST(Checkpoint, NonHeadShapeMismatchFails) {
  const std::string dir = testing::TempDir("ckpt_shape");
  Model<float> m(Small(), 7);
  SaveCheckpoint(dir + "/m.ckpt", m);
  ModelConfig wide = Small();
  wide.embedding = 10;
  EXPECT_THROW(LoadForFinetune(dir + "/m.ckpt", wide, true), Error);
}

TEST(Checkpoint, CorruptFilesRejected) {
  Model<float> m(Small(), 7);
  std::vector<uint8_t> bytes = EncodeCheckpoint(m.config(), m.params());
  CheckpointContents c = DecodeCheckpoint(bytes);
  EXPECT_EQ(c.digest, m.config().Digest());
  EXPECT_EQ(c.tensors.size(), m.params().size());
  std::vector<uint8_t> bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(bad), Error);
  std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 3);
  EXPECT_THROW(DecodeCheckpoint(cut), Error);
  std::vector<uint8_t> extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(DecodeCheckpoint(extra), Error);
  EXPECT_THROW(ReadCheckpoint("/nonexistent/m.ckpt"), Error);
}

TEST(Model, ReinitHeadTouchesOnlyHead) {
  Model<float> m(Small(), 3);
  Model<float> before = m;
  m.ReinitHead(77);
  for (const auto &e : m.params().entries()) {
    if (IsHeadTensor(e.name)) continue;
    EXPECT_EQ(e.value.data, before.params().entry(e.name).value.data) << e.name;
  }
  EXPECT_NE(m.params().entry("decoder.head.w").value.data,
            before.params().entry("decoder.head.w").value.data);
}

TEST(Model, SeededInitIsDeterministic) {
  Model<float> a(Small(), 5), b(Small(), 5), c(Small(), 6);
  EXPECT_EQ(EncodeCheckpoint(a.config(), a.params()), EncodeCheckpoint(b.config(), b.params()));
  EXPECT_NE(EncodeCheckpoint(a.config(), a.params()), EncodeCheckpoint(c.config(), c.params()));
}

}  // namespace
}  // namespace langid
