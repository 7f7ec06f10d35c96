// langid/loss.cc

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

#include "langid/loss.h"

namespace langid {

std::vector<double> ClassWeights::Aligned(const std::vector<std::string> &labels) const {
  std::vector<double> out;
  for (const auto &l : labels) {
    auto it = w.find(l);
    if (it == w.end()) Fail("no class weight for label '", l, "'");
    out.push_back(it->second);
  }
  return out;
}

ClassWeights ComputeClassWeights(const Manifest &m, const std::vector<std::string> &labels) {
  if (m.empty()) Fail("cannot compute class weights of an empty manifest");
  std::vector<std::string> classes = labels.empty() ? ManifestLabels(m) : labels;
  std::map<std::string, long> counts;
  for (const auto &c : classes) counts[c] = 0;
  for (const auto &r : m) {
    auto it = counts.find(r.label);
    if (it == counts.end()) Fail("manifest label '", r.label, "' not in class list");
    ++it->second;
  }
  if (classes.size() < 2) Fail("class absent: manifest contains a single class");
  ClassWeights cw;
  const double n = static_cast<double>(m.size());
  for (const auto &[label, count] : counts) {
    if (count == 0) Fail("class absent: no samples of '", label, "'");
    cw.w[label] = n / static_cast<double>(count);
  }
  return cw;
}

ClassWeights EqualClassWeights(const std::vector<std::string> &labels) {
  ClassWeights cw;
  for (const auto &l : labels) cw.w[l] = 1.0;
  return cw;
}

LossKind ParseLossKind(const std::string &s) {
  if (s == "ce_equal") return LossKind::kCeEqual;
  if (s == "ce_weighted") return LossKind::kCeWeighted;
  if (s == "aam") return LossKind::kAam;
  Fail("unknown loss '", s, "' (ce_equal | ce_weighted | aam)");
}

std::string LossKindName(LossKind k) {
  switch (k) {
    case LossKind::kCeEqual: return "ce_equal";
    case LossKind::kCeWeighted: return "ce_weighted";
    case LossKind::kAam: return "aam";
  }
  return "?";
}

}  // namespace langid
