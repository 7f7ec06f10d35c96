// langid/metrics.cc

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

#include "langid/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "json.hpp"

namespace langid {

int TrialScores::LabelIndex(const std::string &label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) Fail("unknown label '", label, "'");
  return static_cast<int>(it - labels.begin());
}

void TrialScores::Validate() const {
  for (const auto &t : trials) {
    Check(t.probs.size() == labels.size(), "trial ", t.id, ": expected ", labels.size(),
          " probabilities");
    double sum = 0.0;
    for (double p : t.probs) {
      Check(p >= 0.0 && p <= 1.0, "trial ", t.id, ": probability out of [0,1]");
      sum += p;
    }
    Check(std::abs(sum - 1.0) <= 1e-6, "trial ", t.id, ": probabilities sum to ", sum);
    Check(t.label >= -1 && t.label < static_cast<int>(labels.size()), "trial ", t.id,
          ": bad label index");
  }
}

int ArgMax(const std::vector<double> &p) {
  Check(!p.empty(), "argmax of empty vector");
  int best = 0;
  for (int j = 1; j < static_cast<int>(p.size()); ++j)
    if (p[j] > p[best]) best = j;
  return best;
}

std::vector<std::pair<double, double>> DetPoints(std::vector<double> positives,
                                                 std::vector<double> negatives) {
  Check(!positives.empty() && !negatives.empty(),
        "EER needs at least one positive and one negative trial");
  std::sort(positives.begin(), positives.end());
  std::sort(negatives.begin(), negatives.end());
  std::vector<double> thresholds;
  thresholds.reserve(positives.size() + negatives.size());
  thresholds.insert(thresholds.end(), positives.begin(), positives.end());
  thresholds.insert(thresholds.end(), negatives.begin(), negatives.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double np = static_cast<double>(positives.size());
  const double nn = static_cast<double>(negatives.size());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(thresholds.size() + 1);
  size_t ip = 0, in = 0;  // counts of positives / negatives below threshold
  for (double t : thresholds) {
    while (ip < positives.size() && positives[ip] < t) ++ip;
    while (in < negatives.size() && negatives[in] < t) ++in;
    pts.emplace_back((nn - in) / nn, ip / np);
  }
  pts.emplace_back(0.0, 1.0);  // threshold above every score
  return pts;
}

double ComputeEer(std::vector<double> positives, std::vector<double> negatives) {
  auto pts = DetPoints(std::move(positives), std::move(negatives));
  // FRR - FAR is non-decreasing along the points; it starts <= 0 (FRR = 0)
  // and ends > 0.
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    const auto [fa1, fr1] = pts[k];
    const auto [fa2, fr2] = pts[k + 1];
    const double d1 = fr1 - fa1, d2 = fr2 - fa2;
    if (d1 == 0.0) return fa1;
    if (d1 < 0.0 && d2 >= 0.0) {
      const double lambda = d1 / (d1 - d2);
      return fa1 + lambda * (fa2 - fa1);
    }
  }
  return pts.back().first;
}

double Eer(const TrialScores &s, int positive_class) {
  std::vector<double> pos, neg;
  for (const auto &t : s.trials) {
    Check(t.label >= 0, "trial ", t.id, " has no label");
    (t.label == positive_class ? pos : neg).push_back(t.probs[positive_class]);
  }
  if (pos.empty() || neg.empty()) Fail("EER needs both classes; trial set has a single class");
  return ComputeEer(std::move(pos), std::move(neg));
}

double BalancedAccuracy(const TrialScores &s) {
  const size_t n = s.labels.size();
  std::vector<long> total(n, 0), correct(n, 0);
  for (const auto &t : s.trials) {
    Check(t.label >= 0, "trial ", t.id, " has no label");
    ++total[t.label];
    if (ArgMax(t.probs) == t.label) ++correct[t.label];
  }
  double sum = 0.0;
  for (size_t c = 0; c < n; ++c) {
    if (total[c] == 0) Fail("balanced accuracy: class '", s.labels[c], "' absent");
    sum += static_cast<double>(correct[c]) / total[c];
  }
  return sum / n;
}

double MicroAccuracy(const TrialScores &s) {
  Check(!s.trials.empty(), "micro accuracy of an empty trial set");
  long correct = 0;
  for (const auto &t : s.trials) {
    Check(t.label >= 0, "trial ", t.id, " has no label");
    if (ArgMax(t.probs) == t.label) ++correct;
  }
  return static_cast<double>(correct) / s.trials.size();
}

std::string FormatScores(const TrialScores &s) {
  std::string out;
  for (const auto &t : s.trials) {
    nlohmann::ordered_json j;
    j["utt_id"] = t.id;
    for (size_t c = 0; c < s.labels.size(); ++c) j["p_" + s.labels[c]] = t.probs[c];
    j["label"] = t.label >= 0 ? s.labels[t.label] : std::string();
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrialScores ParseScores(const std::string &text, const std::vector<std::string> &labels) {
  TrialScores s;
  if (!labels.empty()) s.labels = labels;
  bool labels_known = !labels.empty();
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (Trim(line).empty()) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      Fail("bad score line: ", e.what());
    }
    if (!labels_known) {
      s.labels.clear();
      for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key().rfind("p_", 0) == 0) s.labels.push_back(it.key().substr(2));
      Check(s.labels.size() >= 2, "score line needs at least two p_<label> fields");
      labels_known = true;
    }
    Trial t;
    try {
      t.id = j.at("utt_id").get<std::string>();
      for (const auto &l : s.labels) t.probs.push_back(j.at("p_" + l).get<double>());
      std::string lab = j.value("label", std::string());
      t.label = lab.empty() ? -1 : s.LabelIndex(lab);
    } catch (const nlohmann::json::exception &e) {
      Fail("bad score record '", line, "': ", e.what());
    }
    s.trials.push_back(std::move(t));
  }
  s.Validate();
  return s;
}

TrialScores ReadScores(const std::string &path, const std::vector<std::string> &labels) {
  return ParseScores(ReadTextFile(path), labels);
}

void WriteScores(const std::string &path, const TrialScores &s) {
  WriteTextFile(path, FormatScores(s));
}

void ApplyLabelFile(TrialScores &s, const std::string &path) {
  std::map<std::string, std::string> by_id;
  std::istringstream is(ReadTextFile(path));
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string id, label;
    if (!(ls >> id)) continue;
    if (!(ls >> label)) Fail(path, ": line without a label: '", line, "'");
    by_id[id] = label;
  }
  for (auto &t : s.trials) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) Fail(path, ": no label for utterance ", t.id);
    t.label = s.LabelIndex(it->second);
  }
}

EvalReport Evaluate(const TrialScores &s) {
  EvalReport r;
  r.eer = Eer(s, 0);
  r.bac = BalancedAccuracy(s);
  r.micro_acc = MicroAccuracy(s);
  return r;
}

std::string FormatReport(const EvalReport &r, bool json_lines) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  if (json_lines) {
    os << "{\"eer\":" << r.eer << ",\"bac\":" << r.bac << ",\"micro_acc\":" << r.micro_acc
       << "}\n";
  } else {
    os << "EER " << r.eer << "\nBAC " << r.bac << "\nmicro_acc " << r.micro_acc << '\n';
  }
  return os.str();
}

}  // namespace langid
