// langid/audio.cc

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

#include "langid/audio.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "langid/fft.h"

namespace langid {

namespace {

uint32_t ReadU32(const uint8_t *p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t ReadU16(const uint8_t *p) { return uint16_t(p[0] | p[1] << 8); }

void PutU32(std::vector<uint8_t> &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}
void PutU16(std::vector<uint8_t> &out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}
void PutTag(std::vector<uint8_t> &out, const char *tag) {
  out.insert(out.end(), tag, tag + 4);
}

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

// Linear interpolation at positions i * step, clamped to the last sample.
std::vector<float> Interpolate(const std::vector<float> &x, size_t out_len,
                               double step) {
  std::vector<float> y(out_len);
  if (x.empty()) return y;
  const size_t last = x.size() - 1;
  for (size_t i = 0; i < out_len; ++i) {
    double pos = static_cast<double>(i) * step;
    size_t i0 = static_cast<size_t>(pos);
    if (i0 >= last) {
      y[i] = x[last];
      continue;
    }
    double frac = pos - static_cast<double>(i0);
    y[i] = static_cast<float>((1.0 - frac) * x[i0] + frac * x[i0 + 1]);
  }
  return y;
}

}  // namespace

AudioBuffer DecodeWav(const std::vector<uint8_t> &bytes,
                      const std::string &what) {
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(what, ": not a RIFF/WAVE file");
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t *data = nullptr;
  size_t data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= n) {
    const uint8_t *hdr = bytes.data() + pos;
    uint32_t len = ReadU32(hdr + 4);
    size_t body = pos + 8;
    size_t avail = std::min<size_t>(len, n - body);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (avail < 16) Fail(what, ": truncated fmt chunk");
      const uint8_t *f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) Fail(what, ": truncated extensible fmt chunk");
        format = ReadU16(f + 24);
      }
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = avail;
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0 || rate == 0) Fail(what, ": missing or invalid fmt chunk");
  if (data == nullptr) Fail(what, ": missing data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    Fail(what, ": unsupported encoding (format ", format, ", ", bits,
         " bits); need PCM16 or float32");
  const size_t frame_bytes = size_t(channels) * (bits / 8);
  const size_t frames = data_len / frame_bytes;
  if (frames == 0) Fail(what, ": zero-length audio payload");

  AudioBuffer buf;
  buf.sample_rate = static_cast<int>(rate);
  buf.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      const uint8_t *p = data + i * frame_bytes + c * (bits / 8);
      if (pcm16) {
        acc += static_cast<int16_t>(ReadU16(p)) / 32768.0;
      } else {
        uint32_t u = ReadU32(p);
        float v;
        std::memcpy(&v, &u, 4);
        if (!std::isfinite(v)) Fail(what, ": non-finite float sample");
        acc += std::clamp(v, -1.0f, 1.0f);
      }
    }
    buf.samples[i] = static_cast<float>(acc / channels);
  }
  return buf;
}

AudioBuffer ReadWav(const std::string &path) {
  if (!std::filesystem::exists(path)) Fail("no such file: ", path);
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open ", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DecodeWav(bytes, path);
}

AudioBuffer ReadWav(const std::string &path, int target_rate) {
  AudioBuffer buf = ReadWav(path);
  if (buf.sample_rate != target_rate) return Resample(buf, target_rate);
  return buf;
}

std::vector<uint8_t> EncodeWav(const AudioBuffer &buf, WavEncoding enc) {
  const uint16_t bits = enc == WavEncoding::kPcm16 ? 16 : 32;
  const uint16_t fmt = enc == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  const uint32_t data_len = static_cast<uint32_t>(buf.samples.size() * bits / 8);
  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_len);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, fmt);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(buf.sample_rate));
  PutU32(out, static_cast<uint32_t>(buf.sample_rate) * bits / 8);
  PutU16(out, bits / 8);
  PutU16(out, bits);
  PutTag(out, "data");
  PutU32(out, data_len);
  for (float s : buf.samples) {
    float v = std::clamp(s, -1.0f, 1.0f);
    if (enc == WavEncoding::kPcm16) {
      long q = std::lround(static_cast<double>(v) * 32768.0);
      q = std::clamp(q, -32768L, 32767L);
      PutU16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    } else {
      uint32_t u;
      std::memcpy(&u, &v, 4);
      PutU32(out, u);
    }
  }
  return out;
}

void WriteWav(const std::string &path, const AudioBuffer &buf,
              WavEncoding enc) {
  std::vector<uint8_t> bytes = EncodeWav(buf, enc);
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot write ", path);
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail("write failed: ", path);
}

AudioBuffer Resample(const AudioBuffer &buf, int target_rate) {
  Check(target_rate > 0, "target sample rate must be positive");
  Check(buf.sample_rate > 0, "source sample rate must be positive");
  if (target_rate == buf.sample_rate) return buf;
  const size_t out_len = static_cast<size_t>(std::llround(
      static_cast<double>(buf.samples.size()) * target_rate / buf.sample_rate));
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples = Interpolate(
      buf.samples, out_len,
      static_cast<double>(buf.sample_rate) / static_cast<double>(target_rate));
  return out;
}

std::vector<float> StretchToLength(const std::vector<float> &x,
                                   size_t out_len) {
  if (out_len == x.size()) return x;
  if (out_len == 0) return {};
  return Interpolate(x, out_len,
                     static_cast<double>(x.size()) / static_cast<double>(out_len));
}

AudioBuffer SliceSegment(const AudioBuffer &buf, double offset,
                         double duration) {
  const double rate = buf.sample_rate;
  if (offset < 0.0 || duration < 0.0)
    Fail("slice out of range: offset ", offset, " duration ", duration);
  const long start = std::lround(offset * rate);
  const long count = std::lround(duration * rate);
  const long total = static_cast<long>(buf.samples.size());
  if (start + count > total + 1)
    Fail("slice out of range: [", offset, ", ", offset + duration,
         "] s exceeds buffer of ", buf.Duration(), " s");
  // One sample of tolerance at the end.
  const long end = std::min(start + count, total);
  AudioBuffer out;
  out.sample_rate = buf.sample_rate;
  out.samples.assign(buf.samples.begin() + start, buf.samples.begin() + end);
  if (end - start < count) out.samples.resize(count, 0.0f);
  return out;
}

void SynthCorpusSpec::Validate() const {
  Check(n_per_class > 0, "n_per_class must be positive");
  Check(min_duration >= 0.3 && max_duration <= 16.0 &&
            min_duration <= max_duration,
        "synthetic durations must lie within [0.3, 16.0] s");
  Check(classes.size() >= 2, "need at least two class profiles");
  Check(recordings_per_class > 0, "recordings_per_class must be positive");
  for (size_t i = 0; i < classes.size(); ++i)
    for (size_t j = i + 1; j < classes.size(); ++j) {
      Check(classes[i].label != classes[j].label, "duplicate class label ",
            classes[i].label);
      Check(classes[i].resonances_hz != classes[j].resonances_hz ||
                classes[i].modulation_hz != classes[j].modulation_hz,
            "class profiles ", classes[i].label, " and ", classes[j].label,
            " are identical");
    }
}

std::vector<ClassProfile> DefaultLanguageProfiles() {
  return {{"en", {500.0, 1500.0, 2500.0}, 4.0},
          {"zh", {900.0, 2000.0, 3200.0}, 6.5}};
}

std::vector<ClassProfile> SpeakerProfiles(int n, uint64_t seed) {
  Rng rng(MixSeed(seed, 0x5eed));
  std::uniform_real_distribution<double> f1(300.0, 1000.0), f2(1000.0, 2200.0),
      f3(2200.0, 3800.0), mod(3.0, 8.0);
  std::vector<ClassProfile> out;
  for (int i = 0; i < n; ++i) {
    std::ostringstream name;
    name << "spk" << std::setw(2) << std::setfill('0') << i;
    double a = f1(rng), b = f2(rng), c = f3(rng);
    out.push_back({name.str(), {a, b, c}, mod(rng)});
  }
  return out;
}

double ResonanceGap(const ClassProfile &a, const ClassProfile &b) {
  std::vector<double> ra = a.resonances_hz, rb = b.resonances_hz;
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  Check(ra.size() == rb.size() && !ra.empty(),
        "profiles must have the same number of resonances");
  double gap = std::abs(ra[0] - rb[0]);
  for (size_t i = 1; i < ra.size(); ++i)
    gap = std::min(gap, std::abs(ra[i] - rb[i]));
  return gap;
}

AudioBuffer SynthUtterance(const ClassProfile &profile, double duration,
                           Rng &rng) {
  constexpr double kBumpWidthHz = 80.0;
  constexpr double kJitter = 0.03;
  constexpr double kFloor = 0.01;  // amplitude of the white noise floor
  const size_t len =
      static_cast<size_t>(std::llround(duration * kSampleRate));
  const size_t nfft = NextPowerOfTwo(len);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> centers;
  for (double f : profile.resonances_hz)
    centers.push_back(f * (1.0 + kJitter * (2.0 * unit(rng) - 1.0)));
  const double mod_rate =
      profile.modulation_hz * (1.0 + 0.1 * (2.0 * unit(rng) - 1.0));
  const double mod_phase = 2.0 * std::numbers::pi * unit(rng);
  const double gain = 0.5 + 0.5 * unit(rng);

  // Shape white Gaussian noise in the frequency domain with one Gaussian
  // bump per resonance.
  std::vector<std::complex<double>> spec(nfft);
  for (auto &v : spec) v = {gauss(rng), 0.0};
  FftPlan plan(nfft);
  plan.Transform(spec, false);
  for (size_t k = 0; k <= nfft / 2; ++k) {
    const double f = static_cast<double>(k) * kSampleRate / nfft;
    double g = 0.0;
    for (double c : centers) {
      double z = (f - c) / kBumpWidthHz;
      g += std::exp(-0.5 * z * z);
    }
    spec[k] *= g;
    if (k != 0 && k != nfft / 2) spec[nfft - k] = std::conj(spec[k]);
  }
  plan.Transform(spec, true);

  std::vector<double> y(len);
  double energy = 0.0;
  for (size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    const double env =
        1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * mod_rate * t + mod_phase);
    y[i] = spec[i].real() * env;
    energy += y[i] * y[i];
  }
  const double rms = std::sqrt(energy / std::max<size_t>(len, 1));
  AudioBuffer buf;
  buf.samples.resize(len);
  for (size_t i = 0; i < len; ++i) {
    double v = (rms > 0 ? 0.1 * y[i] / rms : 0.0) + kFloor * 0.1 * gauss(rng);
    buf.samples[i] = static_cast<float>(std::clamp(gain * v, -1.0, 1.0));
  }
  return buf;
}

Manifest SynthCorpus(const SynthCorpusSpec &spec, const std::string &out_dir) {
  spec.Validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail("cannot create ", out_dir, ": ", ec.message());
  const fs::path dir = fs::absolute(out_dir);

  Manifest manifest;
  for (int i = 0; i < spec.n_per_class; ++i) {
    for (size_t c = 0; c < spec.classes.size(); ++c) {
      const ClassProfile &prof = spec.classes[c];
      Rng rng(MixSeed(spec.seed, c + 1, static_cast<uint64_t>(i)));
      std::uniform_real_distribution<double> dur(spec.min_duration,
                                                 spec.max_duration);
      const double d = dur(rng);
      AudioBuffer buf = SynthUtterance(prof, d, rng);
      std::ostringstream name;
      name << spec.prefix << "_" << prof.label << "_" << std::setw(5)
           << std::setfill('0') << i << ".wav";
      const fs::path path = dir / name.str();
      WriteWav(path.string(), buf);
      UtteranceRecord rec;
      rec.audio_filepath = path.string();
      rec.offset = 0.0;
      rec.duration = buf.Duration();
      rec.label = prof.label;
      rec.recording_id =
          prof.label + "_rec" + std::to_string(i % spec.recordings_per_class);
      manifest.push_back(rec);
    }
  }
  WriteManifest((dir / "manifest.json").string(), manifest);
  return manifest;
}

}  // namespace langid
