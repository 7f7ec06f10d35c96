// langid/ensemble.cc

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

#include "langid/ensemble.h"

#include <algorithm>
#include <cmath>

namespace langid {

std::vector<double> FuseProbs(const std::vector<std::vector<double>> &member_probs,
                              FusionRule rule) {
  Check(!member_probs.empty(), "fusion needs at least one member");
  const size_t n = member_probs[0].size();
  std::vector<double> s(n, 0.0);
  for (const auto &p : member_probs) {
    Check(p.size() == n, "members disagree on the number of classes");
    for (size_t j = 0; j < n; ++j) s[j] += p[j];
  }
  if (rule == FusionRule::kMean) {
    for (double &v : s) v /= static_cast<double>(member_probs.size());
    return s;
  }
  const double m = *std::max_element(s.begin(), s.end());
  double z = 0.0;
  for (double &v : s) z += (v = std::exp(v - m));
  for (double &v : s) v /= z;
  return s;
}

TrialScores EnsembleProbs(const std::vector<TrialScores> &members, FusionRule rule) {
  Check(!members.empty(), "ensemble needs at least one member");
  const TrialScores &first = members[0];
  for (const auto &m : members) {
    Check(m.labels == first.labels, "ensemble members disagree on class labels");
    Check(m.trials.size() == first.trials.size(), "misaligned utterance sets: ",
          m.trials.size(), " vs ", first.trials.size(), " trials");
    for (size_t i = 0; i < m.trials.size(); ++i) {
      if (m.trials[i].id != first.trials[i].id)
        Fail("misaligned utterance sets at position ", i, ": ", m.trials[i].id, " vs ",
             first.trials[i].id);
      const int a = m.trials[i].label, b = first.trials[i].label;
      if (a >= 0 && b >= 0 && a != b)
        Fail("ensemble members disagree on the label of ", m.trials[i].id);
    }
  }
  TrialScores out;
  out.labels = first.labels;
  out.trials.resize(first.trials.size());
  std::vector<std::vector<double>> probs(members.size());
  for (size_t i = 0; i < first.trials.size(); ++i) {
    for (size_t k = 0; k < members.size(); ++k) probs[k] = members[k].trials[i].probs;
    out.trials[i].id = first.trials[i].id;
    out.trials[i].label = -1;
    for (const auto &m : members)
      out.trials[i].label = std::max(out.trials[i].label, m.trials[i].label);
    out.trials[i].probs = FuseProbs(probs, rule);
  }
  return out;
}

SubsetResult EvaluateSubset(const EnsemblePool &pool, const std::vector<int> &members,
                            FusionRule rule) {
  std::vector<TrialScores> chosen;
  for (int i : members) chosen.push_back(pool.members.at(i));
  SubsetResult r;
  r.members = members;
  r.fused = EnsembleProbs(chosen, rule);
  r.eer = Eer(r.fused, 0);
  r.bac = BalancedAccuracy(r.fused);
  return r;
}

namespace {

std::vector<std::string> IdsOf(const EnsemblePool &pool, const std::vector<int> &members) {
  std::vector<std::string> ids;
  for (int i : members) ids.push_back(pool.ids[i]);
  return ids;
}

// True when `a` should be preferred over `b`.
bool Better(const EnsemblePool &pool, const SubsetResult &a, const SubsetResult &b) {
  if (a.eer != b.eer) return a.eer < b.eer;
  if (a.members.size() != b.members.size()) return a.members.size() < b.members.size();
  return IdsOf(pool, a.members) < IdsOf(pool, b.members);
}

}  // namespace

SubsetResult SubsetSearch(const EnsemblePool &pool, bool greedy_fallback, FusionRule rule) {
  const size_t n = pool.members.size();
  Check(n >= 1, "empty ensemble pool");
  Check(pool.ids.size() == n, "pool ids and members differ in size");
  if (n <= kMaxExhaustivePool) {
    SubsetResult best;
    bool have = false;
    for (uint32_t mask = 1; mask < (1u << n); ++mask) {
      std::vector<int> members;
      for (size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) members.push_back(static_cast<int>(i));
      SubsetResult r = EvaluateSubset(pool, members, rule);
      if (!have || Better(pool, r, best)) {
        best = std::move(r);
        have = true;
      }
    }
    return best;
  }
  if (!greedy_fallback)
    Fail("pool of ", n, " members exceeds the exhaustive limit of ", kMaxExhaustivePool,
         " (enable greedy fallback)");
  // Forward selection: start from the best singleton, add the member that
  // improves EER most, stop when nothing improves.
  SubsetResult best;
  bool have = false;
  for (size_t i = 0; i < n; ++i) {
    SubsetResult r = EvaluateSubset(pool, {static_cast<int>(i)}, rule);
    if (!have || Better(pool, r, best)) {
      best = std::move(r);
      have = true;
    }
  }
  for (;;) {
    SubsetResult step;
    bool improved = false;
    for (size_t i = 0; i < n; ++i) {
      if (std::find(best.members.begin(), best.members.end(), static_cast<int>(i)) !=
          best.members.end())
        continue;
      std::vector<int> members = best.members;
      members.push_back(static_cast<int>(i));
      std::sort(members.begin(), members.end());
      SubsetResult r = EvaluateSubset(pool, members, rule);
      if (r.eer < best.eer && (!improved || Better(pool, r, step))) {
        step = std::move(r);
        improved = true;
      }
    }
    if (!improved) break;
    best = std::move(step);
  }
  return best;
}

}  // namespace langid
