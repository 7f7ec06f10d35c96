// langid/train.cc

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

#include "langid/train.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"

#include "langid/checkpoint.h"
#include "langid/curate.h"
#include "langid/optim.h"

namespace langid {

namespace {

std::string FinalSelectionName(FinalSelection f) {
  return f == FinalSelection::kMinValEer ? "min_val_eer" : "checkpoint_metric";
}

FinalSelection ParseFinalSelection(const std::string &s) {
  if (s == "min_val_eer") return FinalSelection::kMinValEer;
  if (s == "checkpoint_metric") return FinalSelection::kCheckpointMetric;
  Fail("unknown final_selection '", s, "' (expected min_val_eer or checkpoint_metric)");
}

std::string Num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool HigherIsBetter(CheckpointMetric m) { return m == CheckpointMetric::kMicroAcc; }

}  // namespace

std::string CheckpointMetricName(CheckpointMetric m) {
  return m == CheckpointMetric::kValLoss ? "val_loss" : "micro_acc";
}

CheckpointMetric ParseCheckpointMetric(const std::string &s) {
  if (s == "val_loss") return CheckpointMetric::kValLoss;
  if (s == "micro_acc") return CheckpointMetric::kMicroAcc;
  Fail("unknown checkpoint_metric '", s, "' (expected val_loss or micro_acc)");
}

void TrainConfig::Validate() const {
  Check(batch_size >= 2, "batch_size must be at least 2 (batch norm needs two samples)");
  Check(epochs > 0, "epochs must be positive");
  Check(warmup_ratio >= 0.0 && warmup_ratio < 1.0, "warmup_ratio must be in [0, 1)");
  Check(weight_decay >= 0.0, "weight_decay must be non-negative");
  // lr = min_lr = 0 is accepted as a frozen run.
  const bool frozen = lr == 0.0 && min_lr == 0.0;
  Check(frozen || (min_lr > 0.0 && min_lr < lr), "need 0 < min_lr < lr (got min_lr ", min_lr,
        ", lr ", lr, ")");
  Check(min_duration >= 0.0 && max_duration > min_duration,
        "need 0 <= min_duration < max_duration");
  Check(keep_top >= 1, "keep_top must be positive");
  Check(bn_momentum >= 0.0 && bn_momentum <= 1.0, "bn_momentum must be in [0, 1]");
  aam.Validate();
  augment_cfg.Validate();
}

KeyValueFile TrainConfig::ToKeyValue() const {
  KeyValueFile kv;
  kv.Set("batch_size", std::to_string(batch_size));
  kv.Set("lr", Num(lr));
  kv.Set("weight_decay", Num(weight_decay));
  kv.Set("epochs", std::to_string(epochs));
  kv.Set("warmup_ratio", Num(warmup_ratio));
  kv.Set("min_lr", Num(min_lr));
  kv.Set("min_duration", Num(min_duration));
  kv.Set("max_duration", Num(max_duration));
  kv.Set("loss", LossKindName(loss));
  kv.Set("aam_scale", Num(aam.scale));
  kv.Set("aam_margin", Num(aam.margin));
  kv.Set("checkpoint_metric", CheckpointMetricName(checkpoint_metric));
  kv.Set("final_selection", FinalSelectionName(final_selection));
  kv.Set("keep_top", std::to_string(keep_top));
  kv.Set("seed", std::to_string(seed));
  kv.Set("augment", augment ? "true" : "false");
  kv.Set("speed_prob", Num(augment_cfg.speed_prob));
  kv.Set("speed_min", Num(augment_cfg.speed_min));
  kv.Set("speed_max", Num(augment_cfg.speed_max));
  kv.Set("freq_masks", std::to_string(augment_cfg.freq_masks));
  kv.Set("freq_width", std::to_string(augment_cfg.freq_width));
  kv.Set("time_masks", std::to_string(augment_cfg.time_masks));
  kv.Set("time_width", Num(augment_cfg.time_width));
  kv.Set("norm", norm == NormMode::kPerFeature ? "per_feature" : "per_frame");
  kv.Set("bn_momentum", Num(bn_momentum));
  kv.Set("bar_micro_acc", Num(bar_micro_acc));
  return kv;
}

TrainConfig TrainConfig::FromKeyValue(const KeyValueFile &kv) {
  static const char *kKnown[] = {
      "batch_size", "lr", "weight_decay", "epochs", "warmup_ratio", "min_lr",
      "min_duration", "max_duration", "loss", "aam_scale", "aam_margin",
      "checkpoint_metric", "final_selection", "keep_top", "seed", "augment",
      "speed_prob", "speed_min", "speed_max", "freq_masks", "freq_width",
      "time_masks", "time_width", "norm", "bn_momentum", "bar_micro_acc"};
  for (const auto &[k, v] : kv.values()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), k) == std::end(kKnown))
      Fail("unknown train config key '", k, "'");
  }
  TrainConfig c;
  c.batch_size = static_cast<int>(kv.GetInt("batch_size", c.batch_size));
  c.lr = kv.GetDouble("lr", c.lr);
  c.weight_decay = kv.GetDouble("weight_decay", c.weight_decay);
  c.epochs = static_cast<int>(kv.GetInt("epochs", c.epochs));
  c.warmup_ratio = kv.GetDouble("warmup_ratio", c.warmup_ratio);
  c.min_lr = kv.GetDouble("min_lr", c.min_lr);
  c.min_duration = kv.GetDouble("min_duration", c.min_duration);
  c.max_duration = kv.GetDouble("max_duration", c.max_duration);
  c.loss = ParseLossKind(kv.GetOr("loss", LossKindName(c.loss)));
  c.aam.scale = kv.GetDouble("aam_scale", c.aam.scale);
  c.aam.margin = kv.GetDouble("aam_margin", c.aam.margin);
  c.checkpoint_metric =
      ParseCheckpointMetric(kv.GetOr("checkpoint_metric", CheckpointMetricName(c.checkpoint_metric)));
  c.final_selection =
      ParseFinalSelection(kv.GetOr("final_selection", FinalSelectionName(c.final_selection)));
  c.keep_top = static_cast<int>(kv.GetInt("keep_top", c.keep_top));
  c.seed = static_cast<uint64_t>(kv.GetInt("seed", static_cast<int64_t>(c.seed)));
  c.augment = kv.GetBool("augment", c.augment);
  c.augment_cfg.speed_prob = kv.GetDouble("speed_prob", c.augment_cfg.speed_prob);
  c.augment_cfg.speed_min = kv.GetDouble("speed_min", c.augment_cfg.speed_min);
  c.augment_cfg.speed_max = kv.GetDouble("speed_max", c.augment_cfg.speed_max);
  c.augment_cfg.freq_masks = static_cast<int>(kv.GetInt("freq_masks", c.augment_cfg.freq_masks));
  c.augment_cfg.freq_width = static_cast<int>(kv.GetInt("freq_width", c.augment_cfg.freq_width));
  c.augment_cfg.time_masks = static_cast<int>(kv.GetInt("time_masks", c.augment_cfg.time_masks));
  c.augment_cfg.time_width = kv.GetDouble("time_width", c.augment_cfg.time_width);
  c.norm = ParseNormMode(kv.GetOr("norm", "per_feature"));
  c.bn_momentum = kv.GetDouble("bn_momentum", c.bn_momentum);
  c.bar_micro_acc = kv.GetDouble("bar_micro_acc", c.bar_micro_acc);
  c.Validate();
  return c;
}

TrainConfig TrainConfig::Read(const std::string &path) {
  try {
    return FromKeyValue(KeyValueFile::Read(path));
  } catch (const Error &e) {
    Fail(path, ": ", e.what());
  }
}

void TrainConfig::Write(const std::string &path) const { ToKeyValue().Write(path); }

std::string EpochLog::ToJson() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["val_metric"] = val_metric;
  j["lr"] = lr;
  j["val_loss"] = val_loss;
  j["val_micro_acc"] = val_micro_acc;
  if (std::isfinite(val_eer))
    j["val_eer"] = val_eer;
  else
    j["val_eer"] = nullptr;
  return j.dump();
}

std::vector<Example> LoadExamples(const Manifest &m, const std::vector<std::string> &labels,
                                  bool require_labels, int jobs) {
  std::vector<std::string> paths;
  std::map<std::string, size_t> path_index;
  for (const auto &r : m) {
    if (path_index.emplace(r.audio_filepath, paths.size()).second)
      paths.push_back(r.audio_filepath);
  }
  std::vector<AudioBuffer> audio(paths.size());
  ParallelFor(paths.size(), jobs,
              [&](size_t i) { audio[i] = ReadWav(paths[i], kSampleRate); });
  std::vector<Example> out;
  out.reserve(m.size());
  for (const auto &r : m) {
    Example ex;
    ex.id = r.Id();
    const AudioBuffer &full = audio[path_index.at(r.audio_filepath)];
    if (r.offset == 0.0 && std::abs(r.duration - full.Duration()) <= 1.0 / kSampleRate)
      ex.audio = full;
    else
      ex.audio = SliceSegment(full, r.offset, r.duration);
    auto it = std::find(labels.begin(), labels.end(), r.label);
    if (it != labels.end()) {
      ex.label = static_cast<int>(it - labels.begin());
    } else if (require_labels) {
      Fail(r.Id(), ": label '", r.label, "' is not one of the model's classes");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

Frames<float> Featurize(const AudioBuffer &audio, NormMode mode) {
  FeatureMatrix f = ComputeLogMel(audio);
  Check(f.n_frames > 0, "audio shorter than one analysis window (", audio.samples.size(),
        " samples)");
  return FramesFromFeatures<float>(NormalizeFeatures(f, mode));
}

namespace {

constexpr int kEvalChunk = 16;

// Eval-mode forward over precomputed features; outputs in input order.
typename Model<float>::Output EvalForward(Model<float> &model, const Batch<float> &feats,
                                          int jobs) {
  const ModelConfig &cfg = model.config();
  typename Model<float>::Output out;
  out.logits = Frames<float>(static_cast<int>(feats.size()), cfg.n_classes());
  out.embedding = Frames<float>(static_cast<int>(feats.size()), cfg.embedding);
  const size_t chunks = (feats.size() + kEvalChunk - 1) / kEvalChunk;
  ParallelFor(chunks, jobs, [&](size_t ci) {
    const size_t lo = ci * kEvalChunk, hi = std::min(feats.size(), lo + kEvalChunk);
    Batch<float> b(feats.begin() + lo, feats.begin() + hi);
    auto o = model.Forward(b, false);
    std::copy(o.logits.v.begin(), o.logits.v.end(), out.logits.row(static_cast<int>(lo)));
    std::copy(o.embedding.v.begin(), o.embedding.v.end(),
              out.embedding.row(static_cast<int>(lo)));
  });
  return out;
}

TrialScores ToScores(const Frames<float> &logits, const std::vector<Example> &examples,
                     const std::vector<std::string> &labels) {
  TrialScores s;
  s.labels = labels;
  Frames<float> p = SoftmaxRows(logits);
  for (int i = 0; i < p.n; ++i) {
    Trial t;
    t.id = examples[i].id;
    t.label = examples[i].label;
    t.probs.assign(p.row(i), p.row(i) + p.c);
    s.trials.push_back(std::move(t));
  }
  return s;
}

struct Retained {
  CheckpointRecord rec;
  std::vector<uint8_t> bytes;
};

void RestoreBytes(Model<float> &model, const std::vector<uint8_t> &bytes) {
  CheckpointContents c = DecodeCheckpoint(bytes);
  std::map<std::string, const CheckpointTensor *> by_name;
  for (const auto &t : c.tensors) by_name[t.name] = &t;
  for (auto &e : model.params().entries()) e.value.data = by_name.at(e.name)->data;
}

}  // namespace

TrialScores PredictExamples(Model<float> &model, const std::vector<Example> &examples,
                            NormMode mode, int jobs) {
  Batch<float> feats(examples.size());
  ParallelFor(examples.size(), jobs, [&](size_t i) {
    try {
      feats[i] = Featurize(examples[i].audio, mode);
    } catch (const Error &e) {
      Fail(examples[i].id, ": ", e.what());
    }
  });
  auto out = EvalForward(model, feats, jobs);
  return ToScores(out.logits, examples, model.config().labels);
}

TrialScores PredictManifest(Model<float> &model, const Manifest &m, NormMode mode, int jobs) {
  return PredictExamples(model, LoadExamples(m, model.config().labels, false, jobs), mode,
                         jobs);
}

Model<float> LoadForFinetune(const std::string &checkpoint, const ModelConfig &model_cfg,
                             bool reinit_head, uint64_t seed) {
  Model<float> model(model_cfg, seed);
  LoadCheckpointInto(checkpoint, model, reinit_head, seed);
  return model;
}

FitResult Fit(const Manifest &train_in, const Manifest &val_in, const ModelConfig &model_cfg,
              const TrainConfig &cfg, const FitOptions &opts) {
  cfg.Validate();
  const ModelConfig mcfg = opts.init ? opts.init->config() : model_cfg;
  mcfg.Validate();
  if (cfg.loss == LossKind::kAam)
    Check(mcfg.head == HeadType::kCosine, "loss aam requires head = cosine in the model config");

  const Manifest train_m = DurationFilter(train_in, cfg.min_duration, cfg.max_duration);
  const Manifest val_m = DurationFilter(val_in, cfg.min_duration, cfg.max_duration);
  Check(!train_m.empty(), "training manifest is empty after duration filtering [",
        cfg.min_duration, ", ", cfg.max_duration, "] s");
  Check(!val_m.empty(), "validation manifest is empty after duration filtering");
  Check(train_m.size() >= 2, "need at least two training utterances");
  const int skipped =
      static_cast<int>(train_in.size() - train_m.size() + val_in.size() - val_m.size());
  if (skipped > 0) LogInfo("duration filter dropped " + std::to_string(skipped) + " records");

  const std::vector<std::string> &labels = mcfg.labels;
  const std::vector<Example> train = LoadExamples(train_m, labels, true, opts.jobs);
  const std::vector<Example> val = LoadExamples(val_m, labels, true, opts.jobs);

  const ClassWeights weights = cfg.loss == LossKind::kCeWeighted
                                   ? ComputeClassWeights(train_m, labels)
                                   : EqualClassWeights(labels);
  const std::vector<double> w = weights.Aligned(labels);

  Batch<float> val_feats(val.size());
  ParallelFor(val.size(), opts.jobs,
              [&](size_t i) { val_feats[i] = Featurize(val[i].audio, cfg.norm); });
  Batch<float> train_feats;
  if (!cfg.augment) {
    train_feats.resize(train.size());
    ParallelFor(train.size(), opts.jobs,
                [&](size_t i) { train_feats[i] = Featurize(train[i].audio, cfg.norm); });
  }

  Model<float> model = opts.init ? *opts.init : Model<float>(mcfg, cfg.seed);
  model.set_bn_momentum(cfg.bn_momentum);
  AdamState<float> adam;

  // Batches of one are merged into the previous batch.
  const size_t n = train.size();
  std::vector<std::pair<size_t, size_t>> spans;
  for (size_t lo = 0; lo < n; lo += cfg.batch_size)
    spans.emplace_back(lo, std::min(n, lo + cfg.batch_size));
  if (spans.size() > 1 && spans.back().second - spans.back().first < 2) {
    spans[spans.size() - 2].second = spans.back().second;
    spans.pop_back();
  }
  const long total_steps = static_cast<long>(spans.size()) * cfg.epochs;

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    mcfg.Write(opts.out_dir + "/model.cfg");
    cfg.Write(opts.out_dir + "/train.cfg");
    WriteTextFile(opts.out_dir + "/metrics.jsonl", "");
  }

  std::vector<Retained> retained;
  std::vector<EpochLog> log;
  int epochs_to_bar = -1;
  long step = 0;
  const int head_w = model.params().IndexOf("decoder.head.w");

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffle_rng(MixSeed(cfg.seed, 0x5401, static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Rng drop_rng(MixSeed(cfg.seed, 0xd20b, static_cast<uint64_t>(epoch)));

    double loss_sum = 0.0;
    double lr = 0.0;
    for (const auto &[lo, hi] : spans) {
      Batch<float> x(hi - lo);
      std::vector<int> y(hi - lo);
      if (cfg.augment) {
        ParallelFor(hi - lo, opts.jobs, [&](size_t k) {
          const size_t idx = order[lo + k];
          Rng aug(MixSeed(cfg.seed, static_cast<uint64_t>(epoch) << 20 | 0xa, idx));
          AudioBuffer a = SpeedPerturb(train[idx].audio, cfg.augment_cfg, aug);
          FeatureMatrix f = ComputeLogMel(a);
          Check(f.n_frames > 0, train[idx].id, ": too short after speed perturbation");
          f = SpecAugment(NormalizeFeatures(f, cfg.norm), cfg.augment_cfg, aug);
          x[k] = FramesFromFeatures<float>(f);
        });
      } else {
        for (size_t k = 0; k < hi - lo; ++k) x[k] = train_feats[order[lo + k]];
      }
      for (size_t k = 0; k < hi - lo; ++k) y[k] = train[order[lo + k]].label;

      ++step;
      lr = CosineLr(step, total_steps, cfg.lr, cfg.min_lr, cfg.warmup_ratio);
      Activations<float> acts;
      auto out = model.Forward(x, true, &drop_rng, &acts);
      model.params().ZeroGrad();
      float loss;
      if (cfg.loss == LossKind::kAam) {
        Frames<float> demb;
        std::vector<float> dw;
        loss = AamLoss<float>(out.embedding, y, model.params().value(head_w), mcfg.n_classes(),
                              cfg.aam, &demb, &dw);
        model.BackwardFromEmbedding(acts, demb);
        float *g = model.params().grad(head_w);
        for (size_t i = 0; i < dw.size(); ++i) g[i] += dw[i];
      } else {
        Frames<float> dlogits;
        loss = WeightedCrossEntropy<float>(out.logits, y, w, &dlogits);
        model.Backward(acts, dlogits);
      }
      if (!std::isfinite(loss)) Fail("divergence: non-finite training loss at step ", step);
      AdamStep(model.params(), adam, lr, cfg.weight_decay);
      if (!model.params().AllFinite())
        Fail("divergence: non-finite parameters after step ", step);
      loss_sum += static_cast<double>(loss) * static_cast<double>(hi - lo);
    }

    // Validation.
    auto vo = EvalForward(model, val_feats, opts.jobs);
    std::vector<int> vy(val.size());
    for (size_t i = 0; i < val.size(); ++i) vy[i] = val[i].label;
    EpochLog el;
    el.epoch = epoch;
    el.train_loss = loss_sum / static_cast<double>(n);
    el.lr = lr;
    if (cfg.loss == LossKind::kAam)
      el.val_loss = AamLoss<float>(vo.embedding, vy, model.params().value(head_w),
                                   mcfg.n_classes(), cfg.aam);
    else
      el.val_loss = WeightedCrossEntropy<float>(vo.logits, vy, w);
    TrialScores vs = ToScores(vo.logits, val, labels);
    el.val_micro_acc = MicroAccuracy(vs);
    el.val_eer = std::numeric_limits<double>::quiet_NaN();
    if (labels.size() == 2 && std::count(vy.begin(), vy.end(), 0) > 0 &&
        std::count(vy.begin(), vy.end(), 1) > 0)
      el.val_eer = Eer(vs, 0);
    el.val_metric =
        cfg.checkpoint_metric == CheckpointMetric::kValLoss ? el.val_loss : el.val_micro_acc;
    if (epochs_to_bar < 0 && el.val_micro_acc >= cfg.bar_micro_acc) epochs_to_bar = epoch;
    log.push_back(el);
    if (!opts.out_dir.empty()) {
      std::ofstream f(opts.out_dir + "/metrics.jsonl", std::ios::app);
      f << el.ToJson() << "\n";
    }
    if (opts.on_epoch) opts.on_epoch(el);

    // Top-k retention: better metric first, earlier epoch on ties.
    auto better = [&](const CheckpointRecord &a, const CheckpointRecord &b) {
      if (a.metric != b.metric)
        return HigherIsBetter(cfg.checkpoint_metric) ? a.metric > b.metric : a.metric < b.metric;
      return a.epoch < b.epoch;
    };
    Retained r;
    r.rec.epoch = epoch;
    r.rec.metric = el.val_metric;
    r.rec.val_eer = el.val_eer;
    r.rec.digest = mcfg.Digest();
    const bool admit = static_cast<int>(retained.size()) < cfg.keep_top ||
                       better(r.rec, retained.back().rec);
    if (admit) {
      r.bytes = EncodeCheckpoint(mcfg, model.params());
      if (!opts.out_dir.empty()) {
        char name[32];
        std::snprintf(name, sizeof(name), "epoch%03d.ckpt", epoch);
        r.rec.path = opts.out_dir + "/" + name;
        std::ofstream f(r.rec.path, std::ios::binary);
        f.write(reinterpret_cast<const char *>(r.bytes.data()),
                static_cast<std::streamsize>(r.bytes.size()));
        Check(f.good(), "cannot write ", r.rec.path);
      }
      retained.push_back(std::move(r));
      std::stable_sort(retained.begin(), retained.end(),
                       [&](const Retained &a, const Retained &b) { return better(a.rec, b.rec); });
      while (static_cast<int>(retained.size()) > cfg.keep_top) {
        if (!retained.back().rec.path.empty()) std::filesystem::remove(retained.back().rec.path);
        retained.pop_back();
      }
    }
  }

  // Final selection among the retained checkpoints.
  size_t pick = 0;
  if (cfg.final_selection == FinalSelection::kMinValEer) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < retained.size(); ++i) {
      const double e = retained[i].rec.val_eer;
      if (std::isfinite(e) && e < best) {
        best = e;
        pick = i;
      }
    }
  }
  RestoreBytes(model, retained[pick].bytes);
  CheckpointRecord final_record = retained[pick].rec;
  if (!opts.out_dir.empty()) {
    final_record.path = opts.out_dir + "/final.ckpt";
    SaveCheckpoint(final_record.path, model);
    nlohmann::ordered_json j;
    j["event"] = "summary";
    j["final_epoch"] = final_record.epoch;
    j["epochs_to_bar"] = epochs_to_bar;
    j["retained_epochs"] = nlohmann::json::array();
    for (const auto &r : retained) j["retained_epochs"].push_back(r.rec.epoch);
    std::ofstream f(opts.out_dir + "/metrics.jsonl", std::ios::app);
    f << j.dump() << "\n";
  }
  std::vector<CheckpointRecord> recs;
  for (const auto &r : retained) recs.push_back(r.rec);
  return FitResult{std::move(recs), final_record, std::move(model), std::move(log),
                   epochs_to_bar, skipped};
}

}  // namespace langid
