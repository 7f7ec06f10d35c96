// langid/ensemble.h

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

#ifndef LANGID_ENSEMBLE_H_
#define LANGID_ENSEMBLE_H_

#include <string>
#include <vector>

#include "langid/metrics.h"

namespace langid {

enum class FusionRule {
  kSumSoftmax,  // softmax of the summed member probabilities (default)
  kMean,        // plain mean of probabilities; comparison only
};

/// Per utterance: s = sum over members of p, output softmax(s). Members
/// must cover the same utterance ids in the same order and agree on labels.
TrialScores EnsembleProbs(const std::vector<TrialScores> &members,
                          FusionRule rule = FusionRule::kSumSoftmax);

/// Fuses a single utterance's member probability vectors.
std::vector<double> FuseProbs(const std::vector<std::vector<double>> &member_probs,
                              FusionRule rule = FusionRule::kSumSoftmax);

struct EnsemblePool {
  std::vector<std::string> ids;
  std::vector<TrialScores> members;
};

struct SubsetResult {
  std::vector<int> members;  // indices into the pool, ascending
  double eer = 0.0;
  double bac = 0.0;
  TrialScores fused;
};

constexpr size_t kMaxExhaustivePool = 15;

/// Evaluates every non-empty subset and returns the one with minimum
/// validation EER. Ties go to the smaller subset, then to the
/// lexicographically smaller list of member ids. Pools above
/// kMaxExhaustivePool fail unless `greedy_fallback`, which runs forward
/// selection instead.
SubsetResult SubsetSearch(const EnsemblePool &pool, bool greedy_fallback = false,
                          FusionRule rule = FusionRule::kSumSoftmax);

/// Fuses and scores one subset.
SubsetResult EvaluateSubset(const EnsemblePool &pool, const std::vector<int> &members,
                            FusionRule rule = FusionRule::kSumSoftmax);

}  // namespace langid

#endif  // LANGID_ENSEMBLE_H_
