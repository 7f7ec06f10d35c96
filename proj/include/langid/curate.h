// langid/curate.h

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

#ifndef LANGID_CURATE_H_
#define LANGID_CURATE_H_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "langid/audio.h"
#include "langid/frontend.h"
#include "langid/manifest.h"
#include "langid/metrics.h"
#include "langid/nn/model.h"

namespace langid {

struct VadConfig {
  double frame_s = 0.025;
  double hop_s = 0.010;
  double percentile = 30.0;  // of frame RMS; frames strictly above are speech
  double min_speech_s = 0.2;
  double min_gap_s = 0.3;
  double max_segment_s = 8.0;

  void Validate() const;
};

struct Segment {
  double offset = 0.0;
  double duration = 0.0;
};

/// Frame RMS thresholding, gap merging, short-island removal, and recursive
/// splitting of long segments at the quietest interior frame. Frame k covers
/// the hop-wide interval centered on its window center. Silence yields no
/// segments.
std::vector<Segment> EnergyVad(const AudioBuffer &buf, const VadConfig &cfg = {});

/// Manifest records for the VAD segments of each file, in input order.
/// Files that cannot be read are skipped and counted.
Manifest VadSegmentFiles(const std::vector<std::string> &paths, const std::string &label,
                         const VadConfig &cfg, int jobs, int *skipped = nullptr);

/// Class probabilities (aligned with the label list) for one utterance.
using Predictor = std::function<std::vector<double>(const AudioBuffer &)>;

Predictor ModelPredictor(Model<float> &model, NormMode mode);

struct MineResult {
  Manifest errors;
  int skipped = 0;  // unreadable records
};

/// Records whose argmax prediction differs from the labeled class.
MineResult MineErrors(const Manifest &m, const std::vector<std::string> &labels,
                      const Predictor &predict, int jobs = 1);

Manifest DurationFilter(const Manifest &m, double min_s, double max_s);

struct SplitResult {
  Manifest train;
  Manifest val;
  uint64_t seed = 0;       // candidate seed that produced the split
  double eer_gap = 0.0;    // |EER(full) - EER(val)|; NaN without reference scores
  std::vector<double> candidate_gaps;
  std::map<std::string, std::pair<int, int>> per_label;  // label -> (train, val) records
};

/// Recording-disjoint, label-stratified split. Records without a
/// recording_id form their own recording. With reference scores (covering
/// every record id) `candidates` seeds are tried and the split whose
/// validation EER is closest to the full-set EER is returned; ties keep
/// the earliest candidate.
SplitResult MakeSplit(const Manifest &m, double val_fraction, uint64_t seed,
                      const TrialScores *reference = nullptr, int candidates = 50);

std::string FormatSplitReport(const SplitResult &r);

}  // namespace langid

#endif  // LANGID_CURATE_H_
