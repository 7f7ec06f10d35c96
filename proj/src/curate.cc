// langid/curate.cc

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

#include "langid/curate.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "langid/train.h"

namespace langid {

void VadConfig::Validate() const {
  Check(frame_s > 0.0 && hop_s > 0.0 && hop_s <= frame_s, "VAD needs 0 < hop <= frame");
  Check(percentile >= 0.0 && percentile <= 100.0, "VAD percentile must be in [0, 100]");
  Check(min_speech_s >= 0.0 && min_gap_s >= 0.0, "VAD durations must be non-negative");
  Check(max_segment_s > hop_s, "VAD max segment must exceed one hop");
}

namespace {

double Percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Splits frames [a, b) into pieces of at most max_frames.
void SplitLong(const std::vector<double> &rms, int a, int b, int max_frames, int min_frames,
               std::vector<std::pair<int, int>> *out) {
  if (b - a <= max_frames) {
    out->emplace_back(a, b);
    return;
  }
  // Prefer cut points that leave both sides within the limit, then ones
  // that leave both sides at least min_frames long.
  int lo = std::max(a + 1, b - max_frames), hi = std::min(b - 1, a + max_frames);
  if (lo > hi) {
    lo = a + 1;
    hi = a + max_frames;
  }
  if (std::max(lo, a + min_frames) <= std::min(hi, b - min_frames)) {
    lo = std::max(lo, a + min_frames);
    hi = std::min(hi, b - min_frames);
  }
  int cut = lo;
  for (int k = lo; k <= hi; ++k)
    if (rms[k] < rms[cut]) cut = k;
  SplitLong(rms, a, cut, max_frames, min_frames, out);
  SplitLong(rms, cut, b, max_frames, min_frames, out);
}

}  // namespace

std::vector<Segment> EnergyVad(const AudioBuffer &buf, const VadConfig &cfg) {
  cfg.Validate();
  const double sr = buf.sample_rate;
  const size_t win = static_cast<size_t>(std::lround(cfg.frame_s * sr));
  const size_t hop = static_cast<size_t>(std::lround(cfg.hop_s * sr));
  const size_t n = buf.samples.size();
  if (n < win || win == 0) return {};
  const int frames = static_cast<int>(1 + (n - win) / hop);
  std::vector<double> rms(frames);
  for (int k = 0; k < frames; ++k) {
    double s = 0.0;
    const float *x = buf.samples.data() + static_cast<size_t>(k) * hop;
    for (size_t i = 0; i < win; ++i) s += static_cast<double>(x[i]) * x[i];
    rms[k] = std::sqrt(s / static_cast<double>(win));
  }
  const double thr = Percentile(rms, cfg.percentile);
  std::vector<char> active(frames);
  for (int k = 0; k < frames; ++k) active[k] = rms[k] > thr;

  auto runs = [&](char value) {
    std::vector<std::pair<int, int>> r;
    for (int k = 0; k < frames;) {
      if (active[k] != value) {
        ++k;
        continue;
      }
      int e = k;
      while (e < frames && active[e] == value) ++e;
      r.emplace_back(k, e);
      k = e;
    }
    return r;
  };
  const double frame_dur = hop / sr;
  // Fill interior gaps shorter than min_gap.
  for (auto [a, b] : runs(0)) {
    if (a == 0 || b == frames) continue;
    if ((b - a) * frame_dur < cfg.min_gap_s) std::fill(active.begin() + a, active.begin() + b, 1);
  }
  const int max_frames = static_cast<int>(std::floor(cfg.max_segment_s / frame_dur + 1e-9));
  const int min_frames = static_cast<int>(std::ceil(cfg.min_speech_s / frame_dur - 1e-9));
  std::vector<std::pair<int, int>> pieces;
  for (auto [a, b] : runs(1)) {
    if ((b - a) * frame_dur < cfg.min_speech_s) continue;
    SplitLong(rms, a, b, max_frames, min_frames, &pieces);
  }
  std::vector<Segment> out;
  const double first_edge = (static_cast<double>(win) - static_cast<double>(hop)) / 2.0;
  for (auto [a, b] : pieces) {
    Segment s;
    const double start = first_edge + static_cast<double>(a) * hop;
    s.offset = start / sr;
    s.duration = static_cast<double>(b - a) * hop / sr;
    out.push_back(s);
  }
  return out;
}

Manifest VadSegmentFiles(const std::vector<std::string> &paths, const std::string &label,
                         const VadConfig &cfg, int jobs, int *skipped) {
  std::vector<std::vector<Segment>> segs(paths.size());
  std::vector<char> ok(paths.size(), 0);
  ParallelFor(paths.size(), jobs, [&](size_t i) {
    try {
      segs[i] = EnergyVad(ReadWav(paths[i], kSampleRate), cfg);
      ok[i] = 1;
    } catch (const Error &e) {
      LogWarning(std::string("skipping ") + e.what());
    }
  });
  Manifest m;
  int bad = 0;
  for (size_t i = 0; i < paths.size(); ++i) {
    if (!ok[i]) {
      ++bad;
      continue;
    }
    const std::string rec = std::filesystem::path(paths[i]).stem().string();
    for (const auto &s : segs[i]) {
      UtteranceRecord r;
      r.audio_filepath = paths[i];
      r.offset = s.offset;
      r.duration = s.duration;
      r.label = label;
      r.recording_id = rec;
      m.push_back(r);
    }
  }
  if (skipped) *skipped = bad;
  return m;
}

Predictor ModelPredictor(Model<float> &model, NormMode mode) {
  return [&model, mode](const AudioBuffer &audio) {
    Batch<float> x{Featurize(audio, mode)};
    Frames<float> p = model.Predict(x);
    return std::vector<double>(p.row(0), p.row(0) + p.c);
  };
}

MineResult MineErrors(const Manifest &m, const std::vector<std::string> &labels,
                      const Predictor &predict, int jobs) {
  std::vector<int> wrong(m.size(), 0);  // 1 wrong, -1 unreadable
  ParallelFor(m.size(), jobs, [&](size_t i) {
    const UtteranceRecord &r = m[i];
    auto it = std::find(labels.begin(), labels.end(), r.label);
    if (it == labels.end()) Fail(r.Id(), ": label '", r.label, "' is not a model class");
    AudioBuffer audio;
    try {
      audio = SliceSegment(ReadWav(r.audio_filepath, kSampleRate), r.offset, r.duration);
    } catch (const Error &e) {
      LogWarning(std::string("skipping ") + e.what());
      wrong[i] = -1;
      return;
    }
    const std::vector<double> p = predict(audio);
    Check(p.size() == labels.size(), "predictor returned ", p.size(), " probabilities for ",
          labels.size(), " labels");
    wrong[i] = ArgMax(p) != static_cast<int>(it - labels.begin()) ? 1 : 0;
  });
  MineResult res;
  for (size_t i = 0; i < m.size(); ++i) {
    if (wrong[i] == 1) res.errors.push_back(m[i]);
    if (wrong[i] == -1) ++res.skipped;
  }
  if (res.skipped > 0) LogWarning("mine-errors skipped " + std::to_string(res.skipped) +
                                  " unreadable records");
  return res;
}

Manifest DurationFilter(const Manifest &m, double min_s, double max_s) {
  Manifest out;
  for (const auto &r : m)
    if (r.duration >= min_s && r.duration <= max_s) out.push_back(r);
  return out;
}

namespace {

struct Recording {
  std::string id;
  std::string label;
  std::vector<size_t> records;
};

std::vector<char> StratifiedDraw(const Manifest &m, const std::vector<Recording> &recs,
                                 double val_fraction, uint64_t seed) {
  std::map<std::string, std::vector<size_t>> by_label;
  for (size_t i = 0; i < recs.size(); ++i) by_label[recs[i].label].push_back(i);
  std::vector<char> in_val(m.size(), 0);
  Rng rng(seed);
  for (auto &[label, idx] : by_label) {
    std::shuffle(idx.begin(), idx.end(), rng);
    size_t total = 0;
    for (size_t i : idx) total += recs[i].records.size();
    const double target = val_fraction * static_cast<double>(total);
    double got = 0.0;
    size_t taken = 0;
    for (size_t i : idx) {
      const double c = static_cast<double>(recs[i].records.size());
      const bool need_one = taken == 0;
      const bool last_left = taken + 1 == idx.size();
      if (last_left) break;
      if (need_one || std::abs(got + c - target) < std::abs(got - target)) {
        for (size_t r : recs[i].records) in_val[r] = 1;
        got += c;
        ++taken;
      }
    }
  }
  return in_val;
}

double SubsetEer(const TrialScores &ref, const std::map<std::string, size_t> &by_id,
                 const Manifest &m, const std::vector<char> &pick, char want) {
  TrialScores s;
  s.labels = ref.labels;
  for (size_t i = 0; i < m.size(); ++i)
    if (pick[i] == want) s.trials.push_back(ref.trials[by_id.at(m[i].Id())]);
  return Eer(s, 0);
}

}  // namespace

SplitResult MakeSplit(const Manifest &m, double val_fraction, uint64_t seed,
                      const TrialScores *reference, int candidates) {
  Check(val_fraction > 0.0 && val_fraction < 1.0, "val_fraction must be in (0, 1)");
  Check(!m.empty(), "cannot split an empty manifest");
  std::vector<Recording> recs;
  std::map<std::string, size_t> rec_index;
  for (size_t i = 0; i < m.size(); ++i) {
    const std::string id = m[i].recording_id.empty() ? "utt:" + m[i].Id() : m[i].recording_id;
    auto [it, fresh] = rec_index.emplace(id, recs.size());
    if (fresh) recs.push_back({id, m[i].label, {}});
    Recording &r = recs[it->second];
    if (r.label != m[i].label)
      Fail("recording ", id, " mixes labels ", r.label, " and ", m[i].label);
    r.records.push_back(i);
  }
  std::map<std::string, int> rec_count;
  for (const auto &r : recs) ++rec_count[r.label];
  for (const auto &[label, c] : rec_count)
    Check(c >= 2, "too few recordings of label '", label, "' to stratify (", c, ", need 2)");

  std::map<std::string, size_t> by_id;
  double full_eer = 0.0;
  if (reference) {
    for (size_t i = 0; i < reference->trials.size(); ++i) by_id[reference->trials[i].id] = i;
    for (const auto &r : m)
      Check(by_id.count(r.Id()) != 0, "reference scores lack utterance ", r.Id());
    TrialScores full;
    full.labels = reference->labels;
    for (const auto &r : m) full.trials.push_back(reference->trials[by_id.at(r.Id())]);
    full_eer = Eer(full, 0);
    Check(candidates >= 1, "need at least one split candidate");
  }

  SplitResult res;
  std::vector<char> best;
  const int n_cand = reference ? candidates : 1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int c = 0; c < n_cand; ++c) {
    const uint64_t s = reference ? MixSeed(seed, 0x5b17, static_cast<uint64_t>(c)) : seed;
    std::vector<char> pick = StratifiedDraw(m, recs, val_fraction, s);
    double gap = std::numeric_limits<double>::quiet_NaN();
    if (reference) gap = std::abs(full_eer - SubsetEer(*reference, by_id, m, pick, 1));
    res.candidate_gaps.push_back(gap);
    if (!reference || gap < best_gap) {
      best_gap = gap;
      best = std::move(pick);
      res.seed = s;
    }
  }
  res.eer_gap = reference ? best_gap : std::numeric_limits<double>::quiet_NaN();
  for (size_t i = 0; i < m.size(); ++i) {
    auto &pl = res.per_label[m[i].label];
    if (best[i]) {
      res.val.push_back(m[i]);
      ++pl.second;
    } else {
      res.train.push_back(m[i]);
      ++pl.first;
    }
  }
  return res;
}

std::string FormatSplitReport(const SplitResult &r) {
  std::ostringstream os;
  os << "label\ttrain\tval\tval_fraction\n";
  for (const auto &[label, c] : r.per_label) {
    const double total = c.first + c.second;
    os << label << "\t" << c.first << "\t" << c.second << "\t"
       << (total > 0 ? c.second / total : 0.0) << "\n";
  }
  if (std::isfinite(r.eer_gap)) os << "eer_gap\t" << r.eer_gap << "\n";
  return os.str();
}

}  // namespace langid
