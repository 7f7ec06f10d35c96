// langid/cli_test.cc

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

#include <filesystem>
#include <sstream>

#include "langid/checkpoint.h"
#include "langid/cli.h"
#include "langid/curate.h"
#include "langid/ensemble.h"
#include "langid/train.h"
#include "test_util.h"

namespace langid {
namespace {

struct CliRun {
  int code;
  std::string out, err;
};

CliRun Call(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = Dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, HelpListsEverySubcommand) {
  CliRun r = Call({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char *name : {"synth", "train", "finetune", "predict", "eval", "ensemble-search",
                           "vad-segment", "mine-errors", "make-split", "class-weights",
                           "count-params", "dump-features"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(Cli, ExitCodes) {
  CliRun bad = Call({"nosuchcmd"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("nosuchcmd"), std::string::npos);
  EXPECT_TRUE(bad.out.empty());
  EXPECT_EQ(Call({}).code, 1);
  EXPECT_EQ(Call({"eval"}).code, 1);
  EXPECT_EQ(Call({"count-params", "--model-config", "huge"}).code, 2);
  CliRun missing = Call({"eval", "--scores", "/nonexistent/s.jsonl"});
  EXPECT_EQ(missing.code, 2);
  EXPECT_TRUE(missing.out.empty());
  EXPECT_FALSE(missing.err.empty());
}

TEST(Cli, CountParams) {
  EXPECT_EQ(Call({"count-params", "--model-config", "large"}).out, "22064325\n");
  CliRun r = Call({"count-params", "--model-config", "tiny", "--enumerate"});
  EXPECT_EQ(r.out, "99914\nenumerated 99914\n");
  EXPECT_EQ(Call({"--json-lines", "count-params"}).out, "{\"params\":99914}\n");
}

TEST(Cli, EvalMatchesLibrary) {
  const std::string dir = testing::TempDir("cli_eval");
  TrialScores s;
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const double p = u(rng);
    s.trials.push_back({"u" + std::to_string(i), {p, 1.0 - p}, i % 2});
  }
  WriteScores(dir + "/s.jsonl", s);
  CliRun r = Call({"eval", "--scores", dir + "/s.jsonl"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, FormatReport(Evaluate(s), false));
  EXPECT_EQ(Call({"--json-lines", "eval", "--scores", dir + "/s.jsonl"}).out,
            FormatReport(Evaluate(s), true));
  std::string labels;
  for (int i = 0; i < 40; ++i) labels += "u" + std::to_string(i) + (i % 3 ? " en\n" : " zh\n");
  WriteTextFile(dir + "/labels.txt", labels);
  TrialScores relabeled = s;
  ApplyLabelFile(relabeled, dir + "/labels.txt");
  EXPECT_EQ(Call({"eval", "--scores", dir + "/s.jsonl", "--labels", dir + "/labels.txt"}).out,
            FormatReport(Evaluate(relabeled), false));
}

TEST(Cli, EnsembleSearchMatchesLibrary) {
  const std::string dir = testing::TempDir("cli_ens");
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  EnsemblePool pool;
  std::vector<std::string> args = {"ensemble-search", "--out", dir + "/fused.jsonl"};
  for (int m = 0; m < 3; ++m) {
    TrialScores s;
    for (int i = 0; i < 30; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(i % 2 ? -0.7 : 0.7) - g(rng)));
      s.trials.push_back({"u" + std::to_string(i), {p, 1.0 - p}, i % 2});
    }
    const std::string path = dir + "/m" + std::to_string(m) + ".jsonl";
    WriteScores(path, s);
    pool.ids.push_back(path);
    pool.members.push_back(s);
    args.push_back("--scores");
    args.push_back(path);
  }
  CliRun r = Call(args);
  EXPECT_EQ(r.code, 0) << r.err;
  SubsetResult want = SubsetSearch(pool);
  EXPECT_EQ(ReadTextFile(dir + "/fused.jsonl"), FormatScores(want.fused));
}

TEST(Cli, SynthCurateAndFeatures) {
  const std::string dir = testing::TempDir("cli_flow");
  CliRun s = Call({"--seed", "3", "synth", "--out-dir", dir + "/d", "--n-per-class", "6"});
  ASSERT_EQ(s.code, 0) << s.err;
  Manifest m = ReadManifest(dir + "/d/manifest.json");
  ASSERT_EQ(m.size(), 12u);

  EXPECT_EQ(Call({"class-weights", "--manifest", dir + "/d/manifest.json"}).out,
            "en\t6\t2.000000\nzh\t6\t2.000000\n");

  CliRun sp = Call({"--seed", "8", "make-split", "--manifest", dir + "/d/manifest.json",
                 "--val-fraction", "0.34", "--train-out", dir + "/tr.json", "--val-out",
                 dir + "/va.json"});
  ASSERT_EQ(sp.code, 0) << sp.err;
  SplitResult want = MakeSplit(m, 0.34, 8);
  EXPECT_EQ(ReadManifest(dir + "/va.json"), want.val);
  EXPECT_EQ(ReadManifest(dir + "/tr.json"), want.train);

  CliRun vad = Call({"vad-segment", m[0].audio_filepath, m[1].audio_filepath, "--label", "en"});
  ASSERT_EQ(vad.code, 0) << vad.err;
  EXPECT_EQ(vad.out,
            FormatManifest(VadSegmentFiles({m[0].audio_filepath, m[1].audio_filepath}, "en",
                                           VadConfig{}, 1)));

  CliRun df = Call({"dump-features", "--wav", m[2].audio_filepath, "--out", dir + "/f.bin"});
  ASSERT_EQ(df.code, 0) << df.err;
  const std::string bytes = ReadTextFile(dir + "/f.bin");
  FeatureMatrix f = DecodeFeatureDump(std::vector<uint8_t>(bytes.begin(), bytes.end()));
  FeatureMatrix ref = NormalizeFeatures(ComputeLogMel(ReadWav(m[2].audio_filepath)));
  EXPECT_EQ(f.values, ref.values);
}

TEST(Cli, PredictAndMineMatchLibrary) {
  const std::string dir = testing::TempDir("cli_predict");
  ASSERT_EQ(Call({"--seed", "4", "synth", "--out-dir", dir + "/d", "--n-per-class", "5"}).code,
            0);
  Manifest m = ReadManifest(dir + "/d/manifest.json");
  Model<float> model(ModelConfig::Tiny(), 12);
  SaveCheckpoint(dir + "/m.ckpt", model);
  ModelConfig::Tiny().Write(dir + "/model.cfg");

  CliRun p = Call({"--jobs", "2", "predict", "--checkpoint", dir + "/m.ckpt", "--manifest",
                dir + "/d/manifest.json", "--out", dir + "/s.jsonl"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(ReadTextFile(dir + "/s.jsonl"),
            FormatScores(PredictManifest(model, m, NormMode::kPerFeature)));

  CliRun mine = Call({"mine-errors", "--manifest", dir + "/d/manifest.json", "--checkpoint",
                   dir + "/m.ckpt"});
  ASSERT_EQ(mine.code, 0) << mine.err;
  MineResult want =
      MineErrors(m, model.config().labels, ModelPredictor(model, NormMode::kPerFeature));
  EXPECT_EQ(mine.out, FormatManifest(want.errors));

  CliRun st = Call({"predict", "--checkpoint", dir + "/m.ckpt", "--wav", m[0].audio_filepath,
                 "--stream", "--chunk-ms", "250"});
  ASSERT_EQ(st.code, 0) << st.err;
  EXPECT_NE(st.out.find("final"), std::string::npos);
}

TEST(Cli, TrainWritesArtifacts) {
  const std::string dir = testing::TempDir("cli_train");
  ASSERT_EQ(Call({"--seed", "5", "synth", "--out-dir", dir + "/tr", "--n-per-class", "6",
                  "--prefix", "tr"}).code, 0);
  ASSERT_EQ(Call({"--seed", "6", "synth", "--out-dir", dir + "/va", "--n-per-class", "3",
                  "--prefix", "va"}).code, 0);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.Write(dir + "/train.cfg");
  CliRun r = Call({"train", "--train", dir + "/tr/manifest.json", "--val", dir + "/va/manifest.json",
                "--config", dir + "/train.cfg", "--out-dir", dir + "/run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir + "/run/final.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/run/metrics.jsonl"));
  CliRun ft = Call({"finetune", "--train", dir + "/tr/manifest.json", "--val",
                 dir + "/va/manifest.json", "--config", dir + "/train.cfg", "--init",
                 dir + "/run/final.ckpt", "--reinit-head", "--out-dir", dir + "/ft"});
  ASSERT_EQ(ft.code, 0) << ft.err;
  EXPECT_TRUE(std::filesystem::exists(dir + "/ft/final.ckpt"));
}

}  // namespace
}  // namespace langid
