// langid/audio.h

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

#ifndef LANGID_AUDIO_H_
#define LANGID_AUDIO_H_

#include <cstdint>
#include <string>
#include <vector>

#include "langid/common.h"
#include "langid/manifest.h"

namespace langid {

constexpr int kSampleRate = 16000;

/// Mono waveform with amplitudes in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kSampleRate;

  double Duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads a RIFF WAV file (PCM 16-bit or IEEE float 32-bit). Multi-channel
/// input is downmixed by the per-sample channel mean.
AudioBuffer ReadWav(const std::string &path);

/// Like ReadWav, then resamples to `target_rate` when it differs.
AudioBuffer ReadWav(const std::string &path, int target_rate);

void WriteWav(const std::string &path, const AudioBuffer &buf,
              WavEncoding enc = WavEncoding::kPcm16);

/// Serialized WAV bytes; WriteWav writes exactly these.
std::vector<uint8_t> EncodeWav(const AudioBuffer &buf, WavEncoding enc);
AudioBuffer DecodeWav(const std::vector<uint8_t> &bytes,
                      const std::string &what = "<memory>");

/// Linear-interpolation resampling. Output length is
/// round(len * target_rate / source_rate).
AudioBuffer Resample(const AudioBuffer &buf, int target_rate);

/// Resamples to exactly `out_len` samples over the same time span, keeping the
/// nominal sample rate. Shared by Resample and speed perturbation.
std::vector<float> StretchToLength(const std::vector<float> &x,
                                   size_t out_len);

/// Exactly round(duration * rate) samples starting at round(offset * rate).
AudioBuffer SliceSegment(const AudioBuffer &buf, double offset,
                         double duration);

/// Spectral profile of one synthetic class.
struct ClassProfile {
  std::string label;
  std::vector<double> resonances_hz;
  double modulation_hz = 4.0;
};

struct SynthCorpusSpec {
  int n_per_class = 10;
  double min_duration = 1.0;
  double max_duration = 2.0;
  uint64_t seed = 1;
  std::vector<ClassProfile> classes;
  /// Number of distinct recording ids per class; utterances are assigned
  /// round-robin so that splitting can be recording-disjoint.
  int recordings_per_class = 5;
  std::string prefix = "utt";

  void Validate() const;
};

/// Two-class default profiles tagged "en" and "zh".
std::vector<ClassProfile> DefaultLanguageProfiles();

/// `n` speaker-like profiles drawn deterministically from `seed`, used for the
/// synthetic pretraining task.
std::vector<ClassProfile> SpeakerProfiles(int n, uint64_t seed);

/// Smallest gap in Hz between corresponding (sorted) resonances of two
/// profiles.
double ResonanceGap(const ClassProfile &a, const ClassProfile &b);

/// Generates one utterance of band-limited noise with the profile's
/// resonances and amplitude modulation.
AudioBuffer SynthUtterance(const ClassProfile &profile, double duration,
                           Rng &rng);

/// Writes WAVs plus `manifest.json` into out_dir and returns the manifest.
Manifest SynthCorpus(const SynthCorpusSpec &spec, const std::string &out_dir);

}  // namespace langid

#endif  // LANGID_AUDIO_H_
