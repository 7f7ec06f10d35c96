// langid/metrics.h

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

#ifndef LANGID_METRICS_H_
#define LANGID_METRICS_H_

#include <string>
#include <vector>

#include "langid/common.h"

namespace langid {

struct Trial {
  std::string id;
  std::vector<double> probs;  // aligned with TrialScores::labels
  int label = -1;             // index into labels; -1 when unknown
};

/// Per-utterance class probabilities with ground truth.
struct TrialScores {
  std::vector<std::string> labels = {"en", "zh"};
  std::vector<Trial> trials;

  int LabelIndex(const std::string &label) const;
  /// Probabilities in [0,1] summing to 1 within 1e-6; labels known.
  void Validate() const;
};

/// Argmax with ties broken toward the lowest class index.
int ArgMax(const std::vector<double> &p);

/// Equal error rate for detection scores. FAR(t) is the fraction of
/// negatives scoring >= t, FRR(t) the fraction of positives scoring < t;
/// the result is the FAR = FRR crossing of the piecewise-linear curve
/// through the operating points at every distinct score.
double ComputeEer(std::vector<double> positives, std::vector<double> negatives);

/// EER with p(positive_class) as the detection score.
double Eer(const TrialScores &s, int positive_class = 0);

/// (FAR, FRR) operating points, in order of increasing threshold.
std::vector<std::pair<double, double>> DetPoints(std::vector<double> positives,
                                                 std::vector<double> negatives);

/// Mean per-class recall under argmax decisions.
double BalancedAccuracy(const TrialScores &s);
double MicroAccuracy(const TrialScores &s);

// Score file: one JSON object per line with "utt_id", one "p_<label>" field
// per class, and "label" (empty when unknown).
std::string FormatScores(const TrialScores &s);
TrialScores ParseScores(const std::string &text, const std::vector<std::string> &labels = {});
TrialScores ReadScores(const std::string &path, const std::vector<std::string> &labels = {});
void WriteScores(const std::string &path, const TrialScores &s);

/// Label file: "<utt_id> <label>" per line. Overwrites trial labels by id;
/// every trial must be covered.
void ApplyLabelFile(TrialScores &s, const std::string &path);

struct EvalReport {
  double eer = 0.0;
  double bac = 0.0;
  double micro_acc = 0.0;
};

EvalReport Evaluate(const TrialScores &s);
/// "EER 0.1234\nBAC 0.5678\nmicro_acc 0.9000\n", or one JSON line.
std::string FormatReport(const EvalReport &r, bool json_lines);

}  // namespace langid

#endif  // LANGID_METRICS_H_
