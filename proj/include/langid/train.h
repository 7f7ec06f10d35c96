// langid/train.h

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

#ifndef LANGID_TRAIN_H_
#define LANGID_TRAIN_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "langid/audio.h"
#include "langid/frontend.h"
#include "langid/loss.h"
#include "langid/manifest.h"
#include "langid/metrics.h"
#include "langid/model_config.h"
#include "langid/nn/model.h"

namespace langid {

enum class CheckpointMetric { kValLoss, kMicroAcc };
enum class FinalSelection { kMinValEer, kCheckpointMetric };

struct TrainConfig {
  int batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-5;
  int epochs = 100;
  double warmup_ratio = 0.1;
  double min_lr = 1e-7;
  double min_duration = 0.3;
  double max_duration = 16.0;
  LossKind loss = LossKind::kCeWeighted;
  AamConfig aam;
  CheckpointMetric checkpoint_metric = CheckpointMetric::kValLoss;
  FinalSelection final_selection = FinalSelection::kMinValEer;
  int keep_top = 3;
  uint64_t seed = 1;
  bool augment = true;
  AugmentConfig augment_cfg;
  NormMode norm = NormMode::kPerFeature;
  double bn_momentum = 0.1;
  /// Validation micro accuracy that counts as reaching the bar; the first
  /// epoch at or above it is logged as epochs_to_bar.
  double bar_micro_acc = 0.95;

  void Validate() const;
  KeyValueFile ToKeyValue() const;
  static TrainConfig FromKeyValue(const KeyValueFile &kv);
  static TrainConfig Read(const std::string &path);
  void Write(const std::string &path) const;
};

std::string CheckpointMetricName(CheckpointMetric m);
CheckpointMetric ParseCheckpointMetric(const std::string &s);

struct CheckpointRecord {
  std::string path;  // empty when training without an output directory
  int epoch = 0;
  double metric = 0.0;
  double val_eer = 0.0;
  uint64_t digest = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_micro_acc = 0.0;
  double val_eer = 0.0;  // NaN for more than two classes
  double val_metric = 0.0;
  double lr = 0.0;       // learning rate of the last step in the epoch
  std::string ToJson() const;
};

struct FitResult {
  std::vector<CheckpointRecord> retained;  // best first
  CheckpointRecord final_record;
  Model<float> model;
  std::vector<EpochLog> log;
  int epochs_to_bar = -1;  // -1 when the bar was never reached
  int skipped_records = 0;
};

/// A loaded utterance ready for feature extraction.
struct Example {
  std::string id;
  AudioBuffer audio;
  int label = -1;
};

/// Reads the audio of every record (resampled to 16 kHz, sliced to the
/// record's segment). Labels are mapped through `labels`; records with an
/// unknown label are an error when `require_labels` is set.
std::vector<Example> LoadExamples(const Manifest &m, const std::vector<std::string> &labels,
                                  bool require_labels = true, int jobs = 1);

/// Deterministic evaluation features: log-mel then normalization.
Frames<float> Featurize(const AudioBuffer &audio, NormMode mode);

/// Eval-mode class probabilities for each example, in order.
TrialScores PredictExamples(Model<float> &model, const std::vector<Example> &examples,
                            NormMode mode, int jobs = 1);
TrialScores PredictManifest(Model<float> &model, const Manifest &m, NormMode mode,
                            int jobs = 1);

struct FitOptions {
  std::string out_dir;  // checkpoints, model.cfg, metrics.jsonl; empty keeps all in memory
  const Model<float> *init = nullptr;  // start from these weights (fine-tuning)
  int jobs = 1;
  /// Called after every epoch, for progress reporting.
  std::function<void(const EpochLog &)> on_epoch;
};

/// Trains `model_cfg` on `train` with validation on `val`.
FitResult Fit(const Manifest &train, const Manifest &val, const ModelConfig &model_cfg,
              const TrainConfig &cfg, const FitOptions &opts = {});

/// Model for `model_cfg` initialized from a checkpoint. With reinit_head the
/// classifier layer is freshly initialized and may differ in class count.
Model<float> LoadForFinetune(const std::string &checkpoint, const ModelConfig &model_cfg,
                             bool reinit_head, uint64_t seed = 0);

}  // namespace langid

#endif  // LANGID_TRAIN_H_
