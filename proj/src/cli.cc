// langid/cli.cc

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

#include "langid/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "langid/audio.h"
#include "langid/checkpoint.h"
#include "langid/curate.h"
#include "langid/ensemble.h"
#include "langid/frontend.h"
#include "langid/loss.h"
#include "langid/metrics.h"
#include "langid/model_config.h"
#include "langid/stream.h"
#include "langid/train.h"

namespace langid {

namespace {

namespace fs = std::filesystem;

struct Common {
  uint64_t seed = 1;
  bool seed_set = false;
  bool json = false;
  int jobs = 1;
};

ModelConfig ModelConfigFrom(const std::string &spec) {
  if (spec == "tiny" || spec == "large") return ModelConfig::Preset(spec);
  return ModelConfig::Read(spec);
}

// Model config for a checkpoint: explicit, else model.cfg beside it.
ModelConfig ConfigForCheckpoint(const std::string &ckpt, const std::string &model_cfg) {
  if (!model_cfg.empty()) return ModelConfigFrom(model_cfg);
  const fs::path beside = fs::path(ckpt).parent_path() / "model.cfg";
  if (!fs::exists(beside))
    throw UsageError("no --model-config given and no model.cfg next to " + ckpt);
  return ModelConfig::Read(beside.string());
}

Model<float> LoadModel(const std::string &ckpt, const std::string &model_cfg) {
  Model<float> m(ConfigForCheckpoint(ckpt, model_cfg));
  LoadCheckpointInto(ckpt, m);
  return m;
}

std::string Fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string EpochLine(const EpochLog &e, bool json) {
  if (json) return e.ToJson() + "\n";
  std::ostringstream os;
  os << "epoch " << e.epoch << "\ttrain_loss " << Fixed(e.train_loss) << "\tval_loss "
     << Fixed(e.val_loss) << "\tval_acc " << Fixed(e.val_micro_acc) << "\tval_eer "
     << (std::isfinite(e.val_eer) ? Fixed(e.val_eer) : "nan") << "\tlr " << e.lr << "\n";
  return os.str();
}

void PrintFit(const FitResult &r, bool json, std::ostream &out) {
  if (json) {
    nlohmann::ordered_json j;
    j["final_epoch"] = r.final_record.epoch;
    j["final_path"] = r.final_record.path;
    j["epochs_to_bar"] = r.epochs_to_bar;
    out << j.dump() << "\n";
    return;
  }
  out << "retained";
  for (const auto &c : r.retained) out << " " << c.epoch;
  out << "\nfinal epoch " << r.final_record.epoch << " " << r.final_record.path << "\n";
  out << "epochs_to_bar " << r.epochs_to_bar << "\n";
}

std::string ProbsLine(const std::vector<std::string> &labels, const std::vector<double> &p,
                      const std::string &tag, long frames, bool json) {
  std::ostringstream os;
  if (json) {
    nlohmann::ordered_json j;
    j["event"] = tag;
    j["frames"] = frames;
    for (size_t i = 0; i < labels.size(); ++i) j["p_" + labels[i]] = p[i];
    return j.dump() + "\n";
  }
  os << tag << "\tframes " << frames;
  for (size_t i = 0; i < labels.size(); ++i) os << "\tp_" << labels[i] << " " << Fixed(p[i], 6);
  os << "\n";
  return os.str();
}

}  // namespace

int Dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"langid: spoken language identification toolkit", "langid"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Common common;
  app.add_option("--jobs", common.jobs, "Worker threads for per-file work")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json-lines", common.json, "Machine-readable line-delimited JSON output");
  auto *seed_opt = app.add_option("--seed", common.seed, "Random seed");

  std::function<void()> action;

  // synth
  auto *synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  std::string synth_dir, synth_task = "language", synth_prefix = "utt";
  int synth_n = 100, synth_speakers = 20;
  double synth_min = 1.0, synth_max = 2.0;
  synth->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--n-per-class", synth_n, "Utterances per class");
  synth->add_option("--min-duration", synth_min, "Shortest utterance (s)");
  synth->add_option("--max-duration", synth_max, "Longest utterance (s)");
  synth->add_option("--task", synth_task, "language | speaker")
      ->check(CLI::IsMember({"language", "speaker"}));
  synth->add_option("--speakers", synth_speakers, "Speaker count for --task speaker");
  synth->add_option("--prefix", synth_prefix, "File name prefix");
  synth->callback([&] {
    action = [&] {
      SynthCorpusSpec spec;
      spec.n_per_class = synth_n;
      spec.min_duration = synth_min;
      spec.max_duration = synth_max;
      spec.seed = common.seed;
      spec.prefix = synth_prefix;
      spec.classes = synth_task == "language" ? DefaultLanguageProfiles()
                                              : SpeakerProfiles(synth_speakers, common.seed);
      Manifest m = SynthCorpus(spec, synth_dir);
      out << "wrote " << m.size() << " utterances to "
          << (fs::absolute(synth_dir) / "manifest.json").string() << "\n";
    };
  });

  // train / finetune
  struct TrainArgs {
    std::string train, val, model_cfg = "tiny", config, out_dir, init;
    bool reinit_head = false;
  };
  TrainArgs ta;
  auto add_train = [&](CLI::App *sc) {
    sc->add_option("--train", ta.train, "Training manifest")->required();
    sc->add_option("--val", ta.val, "Validation manifest")->required();
    sc->add_option("--model-config", ta.model_cfg, "Model config file or preset (tiny, large)");
    sc->add_option("--config", ta.config, "Training config file");
    sc->add_option("--out-dir", ta.out_dir, "Checkpoint directory")->required();
  };
  auto run_fit = [&](bool finetune) {
    TrainConfig tc = ta.config.empty() ? TrainConfig{} : TrainConfig::Read(ta.config);
    if (common.seed_set) tc.seed = common.seed;
    FitOptions opts;
    opts.out_dir = ta.out_dir;
    opts.jobs = common.jobs;
    opts.on_epoch = [&](const EpochLog &e) { out << EpochLine(e, common.json) << std::flush; };
    const ModelConfig mc = ModelConfigFrom(ta.model_cfg);
    std::optional<Model<float>> init;
    if (finetune) {
      init.emplace(LoadForFinetune(ta.init, mc, ta.reinit_head, tc.seed));
      opts.init = &*init;
    }
    FitResult r = Fit(ReadManifest(ta.train), ReadManifest(ta.val), mc, tc, opts);
    PrintFit(r, common.json, out);
  };
  auto *train = app.add_subcommand("train", "Train a model from scratch");
  add_train(train);
  train->callback([&] { action = [&] { run_fit(false); }; });
  auto *finetune = app.add_subcommand("finetune", "Fine-tune from a checkpoint");
  add_train(finetune);
  finetune->add_option("--init", ta.init, "Checkpoint to start from")->required();
  finetune->add_flag("--reinit-head", ta.reinit_head,
                     "Re-initialize the classifier layer (class count may change)");
  finetune->callback([&] { action = [&] { run_fit(true); }; });

  // predict
  auto *predict = app.add_subcommand("predict", "Score utterances with a trained model");
  std::string pr_ckpt, pr_cfg, pr_manifest, pr_wav, pr_out, pr_norm = "per_feature";
  std::string pr_stream_norm = "running";
  bool pr_stream = false;
  double pr_chunk_ms = 500.0;
  predict->add_option("--checkpoint", pr_ckpt, "Model checkpoint")->required();
  predict->add_option("--model-config", pr_cfg, "Model config (default: model.cfg beside it)");
  predict->add_option("--manifest", pr_manifest, "Manifest to score");
  predict->add_option("--wav", pr_wav, "Single WAV file to score");
  predict->add_option("--out", pr_out, "Score file (default: standard output)");
  predict->add_option("--norm", pr_norm, "per_feature | per_frame");
  predict->add_flag("--stream", pr_stream, "Chunked streaming inference over --wav");
  predict->add_option("--chunk-ms", pr_chunk_ms, "Streaming chunk length (ms)")
      ->check(CLI::PositiveNumber);
  predict->add_option("--stream-norm", pr_stream_norm, "running | per_frame")
      ->check(CLI::IsMember({"running", "per_frame"}));
  predict->callback([&] {
    action = [&] {
      Model<float> model = LoadModel(pr_ckpt, pr_cfg);
      const auto &labels = model.config().labels;
      if (pr_stream) {
        if (pr_wav.empty()) throw UsageError("--stream needs --wav");
        AudioBuffer audio = ReadWav(pr_wav, kSampleRate);
        StreamConfig sc;
        sc.norm = pr_stream_norm == "running" ? StreamNorm::kRunning : StreamNorm::kPerFrame;
        StreamState st = StreamInit(model, sc);
        const size_t chunk =
            std::max<size_t>(1, static_cast<size_t>(std::lround(pr_chunk_ms * kSampleRate / 1000.0)));
        for (size_t pos = 0; pos < audio.samples.size(); pos += chunk) {
          const size_t end = std::min(audio.samples.size(), pos + chunk);
          StreamOutput o = StreamPush(
              st, std::vector<float>(audio.samples.begin() + pos, audio.samples.begin() + end));
          if (o.probs) out << ProbsLine(labels, *o.probs, "interim", o.frames_pooled, common.json);
        }
        const std::vector<double> p = StreamFinalize(st);
        out << ProbsLine(labels, p, "final", st.frames_pooled, common.json);
        return;
      }
      Manifest m;
      if (!pr_manifest.empty()) {
        m = ReadManifest(pr_manifest);
      } else if (!pr_wav.empty()) {
        UtteranceRecord r;
        r.audio_filepath = pr_wav;
        r.duration = ReadWav(pr_wav).Duration();
        m.push_back(r);
      } else {
        throw UsageError("predict needs --manifest or --wav");
      }
      TrialScores s = PredictManifest(model, m, ParseNormMode(pr_norm), common.jobs);
      if (pr_out.empty())
        out << FormatScores(s);
      else
        WriteScores(pr_out, s);
    };
  });

  // eval
  auto *eval = app.add_subcommand("eval", "EER, BAC and micro accuracy of a score file");
  std::string ev_scores, ev_labels;
  eval->add_option("--scores", ev_scores, "Score file")->required();
  eval->add_option("--labels", ev_labels, "Label file (utterance label per line)");
  eval->callback([&] {
    action = [&] {
      TrialScores s = ReadScores(ev_scores);
      if (!ev_labels.empty()) ApplyLabelFile(s, ev_labels);
      out << FormatReport(Evaluate(s), common.json);
    };
  });

  // ensemble-search
  auto *ens = app.add_subcommand("ensemble-search", "Pick the best ensemble subset");
  std::vector<std::string> en_scores;
  std::string en_labels, en_out, en_rule = "sum_softmax";
  bool en_greedy = false;
  ens->add_option("--scores", en_scores, "Member score files")->required();
  ens->add_option("--labels", en_labels, "Label file");
  ens->add_option("--out", en_out, "Fused score file for the chosen subset");
  ens->add_option("--rule", en_rule, "sum_softmax | mean")
      ->check(CLI::IsMember({"sum_softmax", "mean"}));
  ens->add_flag("--greedy", en_greedy, "Greedy selection for pools above 15 members");
  ens->callback([&] {
    action = [&] {
      EnsemblePool pool;
      for (const auto &p : en_scores) {
        TrialScores s = ReadScores(p);
        if (!en_labels.empty()) ApplyLabelFile(s, en_labels);
        pool.ids.push_back(p);
        pool.members.push_back(std::move(s));
      }
      SubsetResult r = SubsetSearch(pool, en_greedy,
                                    en_rule == "mean" ? FusionRule::kMean : FusionRule::kSumSoftmax);
      if (!en_out.empty()) WriteScores(en_out, r.fused);
      if (common.json) {
        nlohmann::ordered_json j;
        j["members"] = nlohmann::json::array();
        for (int i : r.members) j["members"].push_back(pool.ids[i]);
        j["eer"] = r.eer;
        j["bac"] = r.bac;
        out << j.dump() << "\n";
      } else {
        out << "members";
        for (int i : r.members) out << " " << pool.ids[i];
        out << "\nEER " << Fixed(r.eer) << "\nBAC " << Fixed(r.bac) << "\n";
      }
    };
  });

  // vad-segment
  auto *vad = app.add_subcommand("vad-segment", "Energy VAD into <= 8 s segments");
  std::vector<std::string> vad_wavs;
  std::string vad_label, vad_out;
  VadConfig vad_cfg;
  vad->add_option("wavs", vad_wavs, "Input WAV files")->required();
  vad->add_option("--label", vad_label, "Label for every segment")->required();
  vad->add_option("--out", vad_out, "Output manifest (default: standard output)");
  vad->add_option("--percentile", vad_cfg.percentile, "Energy threshold percentile");
  vad->add_option("--min-speech", vad_cfg.min_speech_s, "Shortest kept segment (s)");
  vad->add_option("--min-gap", vad_cfg.min_gap_s, "Shortest kept pause (s)");
  vad->add_option("--max-segment", vad_cfg.max_segment_s, "Longest segment (s)");
  vad->callback([&] {
    action = [&] {
      int skipped = 0;
      Manifest m = VadSegmentFiles(vad_wavs, vad_label, vad_cfg, common.jobs, &skipped);
      if (vad_out.empty())
        out << FormatManifest(m);
      else
        WriteManifest(vad_out, m);
      if (skipped > 0) err << "skipped " << skipped << " unreadable files\n";
    };
  });

  // mine-errors
  auto *mine = app.add_subcommand("mine-errors", "Keep the records a model misclassifies");
  std::string mi_manifest, mi_ckpt, mi_cfg, mi_out, mi_norm = "per_feature";
  mine->add_option("--manifest", mi_manifest, "Input manifest")->required();
  mine->add_option("--checkpoint", mi_ckpt, "Model checkpoint")->required();
  mine->add_option("--model-config", mi_cfg, "Model config (default: model.cfg beside it)");
  mine->add_option("--out", mi_out, "Output manifest (default: standard output)");
  mine->add_option("--norm", mi_norm, "per_feature | per_frame");
  mine->callback([&] {
    action = [&] {
      Model<float> model = LoadModel(mi_ckpt, mi_cfg);
      MineResult r = MineErrors(ReadManifest(mi_manifest), model.config().labels,
                                ModelPredictor(model, ParseNormMode(mi_norm)), common.jobs);
      if (mi_out.empty())
        out << FormatManifest(r.errors);
      else
        WriteManifest(mi_out, r.errors);
    };
  });

  // make-split
  auto *split = app.add_subcommand("make-split", "Recording-disjoint stratified split");
  std::string sp_manifest, sp_train, sp_val, sp_ref;
  double sp_frac = 0.2;
  int sp_candidates = 50;
  split->add_option("--manifest", sp_manifest, "Input manifest")->required();
  split->add_option("--val-fraction", sp_frac, "Validation share");
  split->add_option("--train-out", sp_train, "Training manifest output")->required();
  split->add_option("--val-out", sp_val, "Validation manifest output")->required();
  split->add_option("--reference-scores", sp_ref,
                    "Reference model scores; enables the EER-matching search");
  split->add_option("--candidates", sp_candidates, "Seeds tried with --reference-scores");
  split->callback([&] {
    action = [&] {
      Manifest m = ReadManifest(sp_manifest);
      std::optional<TrialScores> ref;
      if (!sp_ref.empty()) ref = ReadScores(sp_ref);
      SplitResult r = MakeSplit(m, sp_frac, common.seed, ref ? &*ref : nullptr, sp_candidates);
      WriteManifest(sp_train, r.train);
      WriteManifest(sp_val, r.val);
      out << FormatSplitReport(r);
    };
  });

  // class-weights
  auto *cw = app.add_subcommand("class-weights", "Class weights w = N / N_x");
  std::string cw_manifest;
  cw->add_option("--manifest", cw_manifest, "Manifest")->required();
  cw->callback([&] {
    action = [&] {
      Manifest m = ReadManifest(cw_manifest);
      ClassWeights w = ComputeClassWeights(m);
      std::map<std::string, int> counts;
      for (const auto &r : m) ++counts[r.label];
      for (const auto &[label, weight] : w.w) {
        if (common.json) {
          nlohmann::ordered_json j;
          j["label"] = label;
          j["count"] = counts[label];
          j["weight"] = weight;
          out << j.dump() << "\n";
        } else {
          out << label << "\t" << counts[label] << "\t" << Fixed(weight, 6) << "\n";
        }
      }
    };
  });

  // count-params
  auto *cp = app.add_subcommand("count-params", "Parameter count of a model config");
  std::string cp_cfg = "tiny";
  bool cp_enumerate = false;
  cp->add_option("--model-config", cp_cfg, "Model config file or preset (tiny, large)");
  cp->add_flag("--enumerate", cp_enumerate, "Also build the model and count its tensors");
  cp->callback([&] {
    action = [&] {
      const ModelConfig mc = ModelConfigFrom(cp_cfg);
      const int64_t analytic = CountParams(mc);
      int64_t runtime = -1;
      if (cp_enumerate) runtime = static_cast<int64_t>(Model<float>(mc).params().NumElements());
      if (common.json) {
        nlohmann::ordered_json j;
        j["params"] = analytic;
        if (cp_enumerate) j["enumerated"] = runtime;
        out << j.dump() << "\n";
      } else {
        out << analytic << "\n";
        if (cp_enumerate) out << "enumerated " << runtime << "\n";
      }
      if (cp_enumerate && runtime != analytic)
        Fail("analytic count ", analytic, " != enumerated ", runtime);
    };
  });

  // dump-features
  auto *df = app.add_subcommand("dump-features", "Write log-mel features of a WAV file");
  std::string df_wav, df_out, df_norm = "per_feature";
  df->add_option("--wav", df_wav, "Input WAV")->required();
  df->add_option("--out", df_out, "Output feature file")->required();
  df->add_option("--norm", df_norm, "none | per_feature | per_frame")
      ->check(CLI::IsMember({"none", "per_feature", "per_frame"}));
  df->callback([&] {
    action = [&] {
      FeatureMatrix f = ComputeLogMel(ReadWav(df_wav, kSampleRate));
      if (df_norm != "none") f = NormalizeFeatures(f, ParseNormMode(df_norm));
      const std::vector<uint8_t> bytes = EncodeFeatureDump(f);
      WriteTextFile(df_out, std::string(bytes.begin(), bytes.end()));
      out << f.n_bins << " x " << f.n_frames << "\n";
    };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() != 0 && app.get_subcommands().empty() && !app.remaining().empty()) {
      err << "langid: unknown subcommand '" << app.remaining().front()
          << "'\nRun with --help for more information.\n";
      return 1;
    }
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  common.seed_set = seed_opt->count() > 0;
  try {
    if (action) action();
    return 0;
  } catch (const UsageError &e) {
    err << "langid: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "langid: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace langid
