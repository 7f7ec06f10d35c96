// langid/frontend.cc

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

#include "langid/frontend.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace langid {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// kMelBins + 2 edge frequencies, equally spaced on the mel scale.
std::vector<double> MelEdgesHz() {
  const double lo = HzToMel(0.0), hi = HzToMel(kSampleRate / 2.0);
  std::vector<double> edges(kMelBins + 2);
  for (int i = 0; i < kMelBins + 2; ++i)
    edges[i] = MelToHz(lo + (hi - lo) * i / (kMelBins + 1));
  return edges;
}

}  // namespace

double MelCenterHz(int m) { return MelEdgesHz()[m + 1]; }

const std::vector<std::vector<double>> &MelFilterbank() {
  static const std::vector<std::vector<double>> fb = [] {
    const int nbins = kFftSize / 2 + 1;
    const std::vector<double> edges = MelEdgesHz();
    std::vector<std::vector<double>> w(kMelBins, std::vector<double>(nbins));
    for (int m = 0; m < kMelBins; ++m) {
      const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
      for (int k = 0; k < nbins; ++k) {
        const double f = static_cast<double>(k) * kSampleRate / kFftSize;
        if (f > l && f <= c)
          w[m][k] = (f - l) / (c - l);
        else if (f > c && f < r)
          w[m][k] = (r - f) / (r - c);
      }
    }
    return w;
  }();
  return fb;
}

LogMelExtractor::LogMelExtractor() : plan_(kFftSize), window_(kWindowSamples) {
  for (int n = 0; n < kWindowSamples; ++n)
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n /
                                      (kWindowSamples - 1));
  const auto &fb = MelFilterbank();
  for (const auto &row : fb) {
    int first = 0;
    while (first < static_cast<int>(row.size()) && row[first] == 0.0) ++first;
    int last = static_cast<int>(row.size()) - 1;
    while (last >= first && row[last] == 0.0) --last;
    first_bin_.push_back(first);
    weights_.emplace_back(row.begin() + first, row.begin() + last + 1);
  }
}

void LogMelExtractor::ComputeFrame(std::span<const float> frame,
                                   std::span<float> out) const {
  Check(frame.size() == static_cast<size_t>(kWindowSamples),
        "frame must have ", kWindowSamples, " samples");
  Check(out.size() == static_cast<size_t>(kMelBins), "output must have ",
        kMelBins, " bins");
  std::vector<std::complex<double>> buf(kFftSize);
  for (int n = 0; n < kWindowSamples; ++n) buf[n] = frame[n] * window_[n];
  plan_.Transform(buf, false);
  std::array<double, kFftSize / 2 + 1> power;
  for (int k = 0; k <= kFftSize / 2; ++k) power[k] = std::norm(buf[k]);
  for (int m = 0; m < kMelBins; ++m) {
    double e = 0.0;
    const auto &w = weights_[m];
    for (size_t j = 0; j < w.size(); ++j) e += w[j] * power[first_bin_[m] + j];
    out[m] = static_cast<float>(std::log(e + kLogEps));
  }
}

FeatureMatrix LogMelExtractor::Compute(const AudioBuffer &buf) const {
  Check(buf.sample_rate == kSampleRate, "log-mel needs ", kSampleRate,
        " Hz audio, got ", buf.sample_rate, " (resample first)");
  const int frames = NumFrames(buf.samples.size());
  if (frames == 0)
    Fail("audio shorter than one analysis window (", buf.samples.size(),
         " < ", kWindowSamples, " samples)");
  FeatureMatrix f(kMelBins, frames);
  std::array<float, kMelBins> col;
  for (int t = 0; t < frames; ++t) {
    ComputeFrame(std::span<const float>(buf.samples.data() + size_t(t) * kHopSamples,
                                        kWindowSamples),
                 col);
    for (int m = 0; m < kMelBins; ++m) f.at(m, t) = col[m];
  }
  return f;
}

FeatureMatrix ComputeLogMel(const AudioBuffer &buf) {
  static const LogMelExtractor extractor;
  return extractor.Compute(buf);
}

NormMode ParseNormMode(const std::string &s) {
  if (s == "per_feature") return NormMode::kPerFeature;
  if (s == "per_frame") return NormMode::kPerFrame;
  Fail("unknown normalization mode '", s, "' (per_feature | per_frame)");
}

NormStats ComputeNormStats(const FeatureMatrix &f) {
  Check(f.n_frames >= 1, "cannot normalize an empty feature matrix");
  NormStats s;
  s.mean.resize(f.n_bins);
  s.std.resize(f.n_bins);
  for (int b = 0; b < f.n_bins; ++b) {
    double sum = 0.0;
    for (int t = 0; t < f.n_frames; ++t) sum += f.at(b, t);
    const double mean = sum / f.n_frames;
    double var = 0.0;
    for (int t = 0; t < f.n_frames; ++t) {
      double d = f.at(b, t) - mean;
      var += d * d;
    }
    s.mean[b] = mean;
    s.std[b] = std::sqrt(var / f.n_frames);
  }
  return s;
}

FeatureMatrix ApplyNormStats(const FeatureMatrix &f, const NormStats &stats) {
  Check(stats.mean.size() == static_cast<size_t>(f.n_bins) &&
            stats.std.size() == static_cast<size_t>(f.n_bins),
        "normalization statistics do not match bin count");
  FeatureMatrix out(f.n_bins, f.n_frames);
  for (int b = 0; b < f.n_bins; ++b) {
    const double inv = 1.0 / std::max(stats.std[b], kStdFloor);
    for (int t = 0; t < f.n_frames; ++t)
      out.at(b, t) = static_cast<float>((f.at(b, t) - stats.mean[b]) * inv);
  }
  return out;
}

FeatureMatrix NormalizeFeatures(const FeatureMatrix &f, NormMode mode) {
  if (mode == NormMode::kPerFeature) return ApplyNormStats(f, ComputeNormStats(f));
  Check(f.n_frames >= 1, "cannot normalize an empty feature matrix");
  FeatureMatrix out(f.n_bins, f.n_frames);
  for (int t = 0; t < f.n_frames; ++t) {
    double sum = 0.0;
    for (int b = 0; b < f.n_bins; ++b) sum += f.at(b, t);
    const double mean = sum / f.n_bins;
    double var = 0.0;
    for (int b = 0; b < f.n_bins; ++b) {
      double d = f.at(b, t) - mean;
      var += d * d;
    }
    const double inv = 1.0 / std::max(std::sqrt(var / f.n_bins), kStdFloor);
    for (int b = 0; b < f.n_bins; ++b)
      out.at(b, t) = static_cast<float>((f.at(b, t) - mean) * inv);
  }
  return out;
}

void AugmentConfig::Validate() const {
  Check(speed_prob >= 0.0 && speed_prob <= 1.0, "speed_prob must be in [0,1]");
  Check(speed_min > 0.0 && speed_min <= speed_max, "invalid speed range");
  Check(freq_masks >= 0 && freq_width >= 0 && time_masks >= 0 &&
            time_width >= 0.0,
        "mask counts and widths must be non-negative");
}

AudioBuffer SpeedPerturbWithRate(const AudioBuffer &buf, double rate) {
  Check(rate > 0.0, "speed rate must be positive");
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  const size_t len = static_cast<size_t>(
      std::llround(static_cast<double>(buf.samples.size()) / rate));
  out.samples = StretchToLength(buf.samples, len);
  return out;
}

AudioBuffer SpeedPerturb(const AudioBuffer &buf, const AugmentConfig &cfg,
                         Rng &rng, double *applied_rate) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (applied_rate) *applied_rate = 1.0;
  if (!(unit(rng) < cfg.speed_prob)) return buf;
  std::uniform_real_distribution<double> rate_dist(cfg.speed_min, cfg.speed_max);
  const double r = rate_dist(rng);
  if (applied_rate) *applied_rate = r;
  return SpeedPerturbWithRate(buf, r);
}

FeatureMatrix SpecAugment(const FeatureMatrix &f, const AugmentConfig &cfg,
                          Rng &rng, std::vector<MaskRect> *masks) {
  FeatureMatrix out = f;
  if (masks) masks->clear();
  for (int i = 0; i < cfg.freq_masks; ++i) {
    const int width = std::uniform_int_distribution<int>(
        0, std::min(cfg.freq_width, f.n_bins))(rng);
    const int start =
        std::uniform_int_distribution<int>(0, f.n_bins - width)(rng);
    for (int b = start; b < start + width; ++b)
      for (int t = 0; t < f.n_frames; ++t) out.at(b, t) = 0.0f;
    if (masks) masks->push_back({true, start, width});
  }
  const int max_time =
      std::min(f.n_frames,
               static_cast<int>(std::ceil(cfg.time_width * f.n_frames - 1e-9)));
  for (int i = 0; i < cfg.time_masks; ++i) {
    const int width = std::uniform_int_distribution<int>(0, max_time)(rng);
    const int start =
        std::uniform_int_distribution<int>(0, f.n_frames - width)(rng);
    for (int b = 0; b < f.n_bins; ++b)
      for (int t = start; t < start + width; ++t) out.at(b, t) = 0.0f;
    if (masks) masks->push_back({false, start, width});
  }
  return out;
}

std::vector<uint8_t> EncodeFeatureDump(const FeatureMatrix &f) {
  std::vector<uint8_t> out(8 + f.values.size() * 4);
  std::memcpy(out.data(), "LMEL", 4);
  const uint32_t t = static_cast<uint32_t>(f.n_frames);
  for (int i = 0; i < 4; ++i) out[4 + i] = uint8_t(t >> (8 * i));
  for (size_t i = 0; i < f.values.size(); ++i) {
    uint32_t u;
    std::memcpy(&u, &f.values[i], 4);
    for (int k = 0; k < 4; ++k) out[8 + 4 * i + k] = uint8_t(u >> (8 * k));
  }
  return out;
}

FeatureMatrix DecodeFeatureDump(const std::vector<uint8_t> &bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), "LMEL", 4) != 0)
    Fail("not a feature dump");
  uint32_t t = 0;
  for (int i = 0; i < 4; ++i) t |= uint32_t(bytes[4 + i]) << (8 * i);
  FeatureMatrix f(kMelBins, static_cast<int>(t));
  if (bytes.size() != 8 + f.values.size() * 4) Fail("truncated feature dump");
  for (size_t i = 0; i < f.values.size(); ++i) {
    uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= uint32_t(bytes[8 + 4 * i + k]) << (8 * k);
    std::memcpy(&f.values[i], &u, 4);
  }
  return f;
}

}  // namespace langid
