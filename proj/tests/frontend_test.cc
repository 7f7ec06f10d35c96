// langid/frontend_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "langid/frontend.h"
#include "test_util.h"

namespace langid {
namespace {

AudioBuffer Tone(double hz, size_t n) {
  AudioBuffer b;
  b.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    b.samples[i] = static_cast<float>(0.5 * std::sin(2.0 * M_PI * hz * i / kSampleRate));
  return b;
}

AudioBuffer Noise(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<float> g(0.0f, 0.2f);
  AudioBuffer b;
  b.samples.resize(n);
  for (float &v : b.samples) v = g(rng);
  return b;
}

FeatureMatrix RandomMatrix(int bins, int frames, uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<float> g(1.0f, 3.0f);
  FeatureMatrix f(bins, frames);
  for (float &v : f.values) v = g(rng);
  return f;
}

TEST(LogMel, FrameCount) {
  EXPECT_EQ(ComputeLogMel(Tone(300, 16000)).n_frames, 98);
  EXPECT_EQ(ComputeLogMel(Tone(300, 16000)).n_bins, 80);
  for (size_t n : {400u, 401u, 559u, 560u, 12345u})
    EXPECT_EQ(ComputeLogMel(Tone(300, n)).n_frames, 1 + static_cast<int>((n - 400) / 160));
  EXPECT_THROW(ComputeLogMel(Tone(300, 399)), Error);
}

TEST(LogMel, SilenceIsConstant) {
  AudioBuffer z;
  z.samples.assign(4000, 0.0f);
  FeatureMatrix f = ComputeLogMel(z);
  for (float v : f.values) EXPECT_FLOAT_EQ(v, static_cast<float>(std::log(kLogEps)));
}

TEST(LogMel, ToneLandsInNearestFilter) {
  int nearest = 0;
  for (int m = 1; m < kMelBins; ++m)
    if (std::abs(MelCenterHz(m) - 1000.0) < std::abs(MelCenterHz(nearest) - 1000.0)) nearest = m;
  FeatureMatrix f = ComputeLogMel(Tone(1000.0, 8000));
  for (int t = 0; t < f.n_frames; ++t) {
    int best = 0;
    for (int m = 1; m < kMelBins; ++m)
      if (f.at(m, t) > f.at(best, t)) best = m;
    EXPECT_EQ(best, nearest) << t;
  }
}

TEST(LogMel, MatchesDirectComputation) {
  AudioBuffer a = Noise(2000, 4);
  FeatureMatrix f = ComputeLogMel(a);
  const auto &fb = MelFilterbank();
  for (int t : {0, 3, f.n_frames - 1}) {
    std::vector<double> power(kFftSize / 2 + 1);
    for (int k = 0; k <= kFftSize / 2; ++k) {
      std::complex<double> s = 0;
      for (int n = 0; n < kWindowSamples; ++n) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / (kWindowSamples - 1));
        s += w * a.samples[t * kHopSamples + n] * std::polar(1.0, -2.0 * M_PI * k * n / kFftSize);
      }
      power[k] = std::norm(s);
    }
    for (int m = 0; m < kMelBins; ++m) {
      double e = 0.0;
      for (int k = 0; k <= kFftSize / 2; ++k) e += fb[m][k] * power[k];
      EXPECT_NEAR(f.at(m, t), std::log(e + kLogEps), 1e-4) << m << " " << t;
    }
  }
}

TEST(MelFilterbank, TriangularPartition) {
  const auto &fb = MelFilterbank();
  ASSERT_EQ(fb.size(), static_cast<size_t>(kMelBins));
  for (int k = 0; k <= kFftSize / 2; ++k) {
    int users = 0;
    for (int m = 0; m < kMelBins; ++m) {
      EXPECT_GE(fb[m][k], 0.0);
      EXPECT_LE(fb[m][k], 1.0);
      users += fb[m][k] > 0.0;
    }
    EXPECT_LE(users, 2) << k;
  }
  for (int m = 0; m < kMelBins; ++m) {
    double s = 0;
    for (double w : fb[m]) s += w;
    EXPECT_GT(s, 0.0) << m;
  }
  for (int m = 1; m < kMelBins; ++m) EXPECT_GT(MelCenterHz(m), MelCenterHz(m - 1));
}

TEST(Normalize, PerFeatureStatistics) {
  FeatureMatrix f = NormalizeFeatures(RandomMatrix(80, 200, 1));
  for (int b = 0; b < 80; ++b) {
    double mean = 0, var = 0;
    for (int t = 0; t < 200; ++t) mean += f.at(b, t) / 200.0;
    for (int t = 0; t < 200; ++t) var += (f.at(b, t) - mean) * (f.at(b, t) - mean) / 200.0;
    EXPECT_NEAR(mean, 0.0, 1e-6);
    EXPECT_NEAR(std::sqrt(var), 1.0, 1e-4);
  }
}

TEST(Normalize, ConstantRowsBecomeZero) {
  FeatureMatrix f(80, 30);
  for (int b = 0; b < 80; ++b)
    for (int t = 0; t < 30; ++t) f.at(b, t) = static_cast<float>(b) - 7.0f;
  for (float v : NormalizeFeatures(f).values) EXPECT_EQ(v, 0.0f);
  for (float v : NormalizeFeatures(FeatureMatrix(80, 1)).values) EXPECT_EQ(v, 0.0f);
}

TEST(Normalize, Idempotent) {
  for (NormMode mode : {NormMode::kPerFeature, NormMode::kPerFrame}) {
    FeatureMatrix once = NormalizeFeatures(RandomMatrix(80, 50, 2), mode);
    FeatureMatrix twice = NormalizeFeatures(once, mode);
    for (size_t i = 0; i < once.values.size(); ++i)
      EXPECT_NEAR(twice.values[i], once.values[i], 1e-5);
  }
}

TEST(Normalize, PerFrameAndPrecomputedStatistics) {
  FeatureMatrix raw = RandomMatrix(80, 40, 3);
  FeatureMatrix f = NormalizeFeatures(raw, NormMode::kPerFrame);
  for (int t = 0; t < 40; ++t) {
    double mean = 0;
    for (int b = 0; b < 80; ++b) mean += f.at(b, t) / 80.0;
    EXPECT_NEAR(mean, 0.0, 1e-6);
  }
  NormStats st = ComputeNormStats(raw);
  FeatureMatrix a = ApplyNormStats(raw, st), b = NormalizeFeatures(raw);
  for (size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-6);
}

TEST(SpeedPerturb, LengthFormula) {
  AudioBuffer a = Noise(16000, 5);
  EXPECT_EQ(SpeedPerturbWithRate(a, 1.05).samples.size(), 15238u);
  EXPECT_EQ(SpeedPerturbWithRate(a, 0.95).samples.size(), 16842u);
  EXPECT_EQ(SpeedPerturbWithRate(a, 1.05).sample_rate, kSampleRate);
  Rng rng(1);
  std::uniform_real_distribution<double> r(0.95, 1.05);
  for (int i = 0; i < 200; ++i) {
    const double rate = r(rng);
    const size_t n = 400 + i * 37;
    AudioBuffer x = Noise(n, i);
    EXPECT_EQ(SpeedPerturbWithRate(x, rate).samples.size(),
              static_cast<size_t>(std::llround(n / rate)));
  }
}

TEST(SpeedPerturb, ZeroProbabilityIsIdentity) {
  AudioBuffer a = Noise(5000, 6);
  AugmentConfig cfg;
  cfg.speed_prob = 0.0;
  Rng rng(2);
  double rate = 0;
  EXPECT_EQ(SpeedPerturb(a, cfg, rng, &rate).samples, a.samples);
  EXPECT_EQ(rate, 1.0);
}

TEST(SpeedPerturb, FrequencyWithinBinomialBounds) {
  AudioBuffer a = Noise(800, 7);
  AugmentConfig cfg;
  Rng rng(3);
  int applied = 0;
  for (int i = 0; i < 10000; ++i) {
    double rate = 1.0;
    AudioBuffer out = SpeedPerturb(a, cfg, rng, &rate);
    if (rate != 1.0) {
      ++applied;
      EXPECT_GE(rate, 0.95);
      EXPECT_LE(rate, 1.05);
      EXPECT_EQ(out.samples.size(), static_cast<size_t>(std::llround(800 / rate)));
    }
  }
  EXPECT_GE(applied, 4700);
  EXPECT_LE(applied, 5300);
}

TEST(SpecAugment, ZeroMasksIsIdentity) {
  FeatureMatrix f = RandomMatrix(80, 100, 4);
  AugmentConfig cfg;
  cfg.freq_masks = 0;
  cfg.time_masks = 0;
  Rng rng(1);
  EXPECT_EQ(SpecAugment(f, cfg, rng).values, f.values);
}

TEST(SpecAugment, MaskBoundsAndUntouchedCells) {
  AugmentConfig cfg;  // 3 x 4 bins, 5 x 0.03 of frames
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    FeatureMatrix f = RandomMatrix(80, 100, 100 + trial);
    std::vector<MaskRect> masks;
    FeatureMatrix g = SpecAugment(f, cfg, rng, &masks);
    ASSERT_EQ(masks.size(), 8u);
    std::vector<bool> bin_masked(80, false), frame_masked(100, false);
    int nf = 0, nt = 0;
    for (const auto &m : masks) {
      if (m.frequency) {
        ++nf;
        EXPECT_GE(m.width, 0);
        EXPECT_LE(m.width, 4);
        EXPECT_LE(m.start + m.width, 80);
        for (int b = m.start; b < m.start + m.width; ++b) bin_masked[b] = true;
      } else {
        ++nt;
        EXPECT_GE(m.width, 0);
        EXPECT_LE(m.width, 3);
        EXPECT_LE(m.start + m.width, 100);
        for (int t = m.start; t < m.start + m.width; ++t) frame_masked[t] = true;
      }
    }
    EXPECT_EQ(nf, 3);
    EXPECT_EQ(nt, 5);
    int zero_rows = 0, zero_cols = 0;
    for (int b = 0; b < 80; ++b) {
      bool all = true;
      for (int t = 0; t < 100; ++t) all = all && g.at(b, t) == 0.0f;
      zero_rows += all;
    }
    for (int t = 0; t < 100; ++t) {
      bool all = true;
      for (int b = 0; b < 80; ++b) all = all && g.at(b, t) == 0.0f;
      zero_cols += all;
    }
    EXPECT_LE(zero_rows, 12);
    EXPECT_LE(zero_cols, 15);
    for (int b = 0; b < 80; ++b)
      for (int t = 0; t < 100; ++t)
        EXPECT_EQ(g.at(b, t), (bin_masked[b] || frame_masked[t]) ? 0.0f : f.at(b, t));
  }
}

TEST(SpecAugment, WidthsCoverTheirRange) {
  AugmentConfig cfg;
  Rng rng(6);
  std::vector<int> fw(5, 0), tw(4, 0);
  FeatureMatrix f = RandomMatrix(80, 100, 9);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<MaskRect> masks;
    SpecAugment(f, cfg, rng, &masks);
    for (const auto &m : masks) (m.frequency ? fw : tw)[m.width]++;
  }
  for (int c : fw) EXPECT_GT(c, 0);
  for (int c : tw) EXPECT_GT(c, 0);
}

TEST(FeatureDump, RoundTrip) {
  FeatureMatrix f = RandomMatrix(80, 17, 10);
  std::vector<uint8_t> bytes = EncodeFeatureDump(f);
  ASSERT_EQ(bytes.size(), 8u + 80u * 17u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LMEL");
  EXPECT_EQ(bytes[4], 17);
  FeatureMatrix g = DecodeFeatureDump(bytes);
  EXPECT_EQ(g.n_frames, 17);
  EXPECT_EQ(g.values, f.values);
  bytes.pop_back();
  EXPECT_THROW(DecodeFeatureDump(bytes), Error);
}

TEST(AugmentConfig, Validation) {
  AugmentConfig c;
  c.speed_prob = 1.5;
  EXPECT_THROW(c.Validate(), Error);
  c = AugmentConfig{};
  c.speed_min = 1.2;
  EXPECT_THROW(c.Validate(), Error);
  c = AugmentConfig{};
  c.freq_width = -1;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace langid
