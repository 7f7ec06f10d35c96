// langid/frontend.h

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

#ifndef LANGID_FRONTEND_H_
#define LANGID_FRONTEND_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "langid/audio.h"
#include "langid/common.h"
#include "langid/fft.h"

namespace langid {

constexpr int kMelBins = 80;
constexpr int kWindowSamples = 400;  // 25 ms at 16 kHz
constexpr int kHopSamples = 160;     // 10 ms at 16 kHz
constexpr int kFftSize = 512;
constexpr double kLogEps = 1.0 / 16777216.0;  // 2^-24
constexpr double kStdFloor = 1e-5;

/// Log-mel features, n_bins x n_frames, row-major (one row per mel bin).
struct FeatureMatrix {
  int n_bins = kMelBins;
  int n_frames = 0;
  std::vector<float> values;

  FeatureMatrix() = default;
  FeatureMatrix(int bins, int frames)
      : n_bins(bins), n_frames(frames),
        values(static_cast<size_t>(bins) * frames, 0.0f) {}

  float &at(int bin, int t) { return values[size_t(bin) * n_frames + t]; }
  float at(int bin, int t) const { return values[size_t(bin) * n_frames + t]; }
};

/// Number of frames for L samples: 1 + floor((L - 400) / 160).
inline int NumFrames(size_t num_samples) {
  if (num_samples < static_cast<size_t>(kWindowSamples)) return 0;
  return 1 + static_cast<int>((num_samples - kWindowSamples) / kHopSamples);
}

/// Center frequency in Hz of the HTK-scale mel filter `m` (0-based).
double MelCenterHz(int m);

/// Triangular mel filterbank over the 257 non-negative FFT bins, 0 to 8 kHz.
/// Stored dense, kMelBins x (kFftSize / 2 + 1).
const std::vector<std::vector<double>> &MelFilterbank();

/// Stateless-per-call extractor holding the FFT plan and window.
class LogMelExtractor {
 public:
  LogMelExtractor();

  /// One frame of kWindowSamples samples -> kMelBins log-mel energies.
  void ComputeFrame(std::span<const float> frame,
                    std::span<float> out) const;

  FeatureMatrix Compute(const AudioBuffer &buf) const;

 private:
  FftPlan plan_;
  std::vector<double> window_;
  // Sparse filterbank: first FFT bin and weights for each filter.
  std::vector<int> first_bin_;
  std::vector<std::vector<double>> weights_;
};

/// 16 kHz audio of at least one window -> un-normalized log-mel features.
FeatureMatrix ComputeLogMel(const AudioBuffer &buf);

enum class NormMode {
  kPerFeature,  // each mel bin over time (default)
  kPerFrame,    // each frame over mel bins
};

NormMode ParseNormMode(const std::string &s);

/// Per-bin mean and standard deviation (population) over time.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;
};

NormStats ComputeNormStats(const FeatureMatrix &f);

/// (x - mean) / max(std, 1e-5), per bin, with supplied statistics.
FeatureMatrix ApplyNormStats(const FeatureMatrix &f, const NormStats &stats);

FeatureMatrix NormalizeFeatures(const FeatureMatrix &f,
                                NormMode mode = NormMode::kPerFeature);

struct AugmentConfig {
  double speed_prob = 0.5;
  double speed_min = 0.95;
  double speed_max = 1.05;
  int freq_masks = 3;
  int freq_width = 4;
  int time_masks = 5;
  double time_width = 0.03;  // fraction of the utterance's frames

  void Validate() const;
};

/// Resamples to round(L / rate) samples at the unchanged nominal rate.
AudioBuffer SpeedPerturbWithRate(const AudioBuffer &buf, double rate);

/// With probability speed_prob, perturbs by a rate uniform in
/// [speed_min, speed_max]; otherwise returns the input. `applied_rate`
/// receives the rate used (1.0 when skipped).
AudioBuffer SpeedPerturb(const AudioBuffer &buf, const AugmentConfig &cfg,
                         Rng &rng, double *applied_rate = nullptr);

struct MaskRect {
  bool frequency = false;  // true: bins [start, start+width); else frames
  int start = 0;
  int width = 0;
};

FeatureMatrix SpecAugment(const FeatureMatrix &f, const AugmentConfig &cfg,
                          Rng &rng, std::vector<MaskRect> *masks = nullptr);

/// Little-endian dump: "LMEL" magic, uint32 n_frames, then float32 row-major
/// 80 x T values.
std::vector<uint8_t> EncodeFeatureDump(const FeatureMatrix &f);
FeatureMatrix DecodeFeatureDump(const std::vector<uint8_t> &bytes);

}  // namespace langid

#endif  // LANGID_FRONTEND_H_
