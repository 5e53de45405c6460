// Copyright 2026 The voicesan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only signal generators and independent oracles. Nothing in here may
// call back into the code paths it is used to check: quadrature here is
// trapezoidal (the library integrates with Simpson), and the bilinear phase
// oracle uses the closed tangent form rather than the complex logarithm.

#ifndef VOICESAN_TESTS_SYNTH_HPP
#define VOICESAN_TESTS_SYNTH_HPP

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

#include "voicesan/audio.hpp"
#include "voicesan/common.hpp"
#include "voicesan/dsp.hpp"
#include "voicesan/keyword.hpp"
#include "voicesan/warp.hpp"

namespace testsupport {

using voicesan::AudioClip;
using voicesan::kPi;

inline AudioClip make_clip(std::vector<double> samples, int rate = 16000) {
  AudioClip c;
  c.samples = std::move(samples);
  c.sample_rate_hz = rate;
  return c;
}

inline AudioClip sine(double freq_hz, double duration_s, int rate = 16000,
                      double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(duration_s * rate);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = amplitude * std::sin(2.0 * kPi * freq_hz * i / rate);
  }
  return make_clip(std::move(s), rate);
}

inline AudioClip sawtooth(double freq_hz, double duration_s, int rate = 16000,
                          double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(duration_s * rate);
  std::vector<double> s(n);
  const double period = rate / freq_hz;
  for (std::size_t i = 0; i < n; ++i) {
    const double phase = std::fmod(static_cast<double>(i), period) / period;
    s[i] = amplitude * (2.0 * phase - 1.0);
  }
  return make_clip(std::move(s), rate);
}

// Linear sweep f0 -> f1 over the clip.
inline AudioClip chirp(double f0, double f1, double duration_s, int rate = 16000,
                       double amplitude = 0.5) {
  const auto n = static_cast<std::size_t>(duration_s * rate);
  std::vector<double> s(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double f = f0 + (f1 - f0) * t / duration_s;
    phase += 2.0 * kPi * f / rate;
    s[i] = amplitude * std::sin(phase);
  }
  return make_clip(std::move(s), rate);
}

inline double gauss(voicesan::Rng& rng) {
  // Box-Muller; deterministic through the library Rng.
  const double u1 = std::max(rng.uniform(), 1e-300);
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

inline AudioClip white_noise(double duration_s, voicesan::Rng& rng,
                             int rate = 16000, double amplitude = 0.2) {
  const auto n = static_cast<std::size_t>(duration_s * rate);
  std::vector<double> s(n);
  for (auto& x : s) x = std::clamp(amplitude * gauss(rng) * 0.33, -0.95, 0.95);
  return make_clip(std::move(s), rate);
}

// Harmonic vowel: stack of f0 harmonics shaped by three formant resonances.
inline AudioClip vowel(double duration_s, int rate = 16000, double f0 = 120.0) {
  const auto n = static_cast<std::size_t>(duration_s * rate);
  const double formants[3] = {500.0, 1500.0, 2500.0};
  const double widths[3] = {120.0, 180.0, 240.0};
  std::vector<double> s(n, 0.0);
  for (int k = 1; k * f0 < rate / 2.0 * 0.9; ++k) {
    const double f = k * f0;
    double amp = 0.0;
    for (int m = 0; m < 3; ++m) {
      const double d = (f - formants[m]) / widths[m];
      amp += std::exp(-0.5 * d * d);
    }
    amp *= 1.0 / (1.0 + f / 1000.0);  // gentle rolloff
    for (std::size_t i = 0; i < n; ++i) {
      s[i] += amp * std::sin(2.0 * kPi * f * i / rate + 0.7 * k);
    }
  }
  double peak = 1e-9;
  for (double x : s) peak = std::max(peak, std::abs(x));
  for (double& x : s) x *= 0.4 / peak;
  return make_clip(std::move(s), rate);
}

// A synthetic "word": a few tonal segments with random partials and an
// attack/decay envelope. Keeping the generating spec around lets a corpus
// re-render the same word at a different speaking rate: durations stretch,
// frequencies stay put, exactly the variation DTW is meant to absorb.
struct WordSpec {
  struct Segment {
    double freqs[3];
    double amps[3];
    double dur_s;
  };
  std::vector<Segment> segments;
};

inline WordSpec word_spec(voicesan::Rng& rng) {
  WordSpec spec;
  const int num_segments = 2 + static_cast<int>(rng.index(3));
  for (int seg = 0; seg < num_segments; ++seg) {
    WordSpec::Segment s{};
    for (int k = 0; k < 3; ++k) {
      s.freqs[k] = rng.uniform(250.0, 3200.0);
      s.amps[k] = rng.uniform(0.2, 1.0);
    }
    s.dur_s = rng.uniform(0.12, 0.20);
    spec.segments.push_back(s);
  }
  return spec;
}

// stretch > 1 renders a slower (longer) utterance of the same word.
inline AudioClip render_word(const WordSpec& spec, double stretch = 1.0,
                             int rate = 16000) {
  std::vector<double> s;
  for (const WordSpec::Segment& seg : spec.segments) {
    const auto n = static_cast<std::size_t>(seg.dur_s * stretch * rate);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n);
      const double env = std::sin(kPi * t);  // attack/decay
      double x = 0.0;
      for (int k = 0; k < 3; ++k) {
        x += seg.amps[k] * std::sin(2.0 * kPi * seg.freqs[k] * i / rate);
      }
      s.push_back(0.25 * env * x / 3.0);
    }
  }
  return make_clip(std::move(s), rate);
}

inline AudioClip word(voicesan::Rng& rng, int rate = 16000) {
  return render_word(word_spec(rng), 1.0, rate);
}

inline AudioClip add_noise_snr(const AudioClip& clip, double snr_db,
                               voicesan::Rng& rng) {
  double power = 0.0;
  for (double x : clip.samples) power += x * x;
  power /= static_cast<double>(clip.samples.size());
  const double noise_rms = std::sqrt(power) / std::pow(10.0, snr_db / 20.0);
  AudioClip out = clip;
  for (double& x : out.samples) {
    x = std::clamp(x + noise_rms * gauss(rng), -1.0, 1.0);
  }
  return out;
}

inline AudioClip concat(const std::vector<AudioClip>& clips) {
  AudioClip out;
  out.sample_rate_hz = clips.front().sample_rate_hz;
  for (const AudioClip& c : clips) {
    out.samples.insert(out.samples.end(), c.samples.begin(), c.samples.end());
  }
  return out;
}

inline AudioClip silence(double duration_s, int rate = 16000) {
  return make_clip(std::vector<double>(static_cast<std::size_t>(duration_s * rate), 0.0),
                   rate);
}

inline double snr_db(const AudioClip& ref, const AudioClip& test,
                     double skip_edges_s = 0.025) {
  const auto skip = static_cast<std::size_t>(skip_edges_s * ref.sample_rate_hz);
  const std::size_t n = std::min(ref.samples.size(), test.samples.size());
  double sig = 0.0, err = 0.0;
  for (std::size_t i = skip; i + skip < n; ++i) {
    sig += ref.samples[i] * ref.samples[i];
    const double d = ref.samples[i] - test.samples[i];
    err += d * d;
  }
  if (err == 0.0) return 300.0;
  return 10.0 * std::log10(sig / err);
}

// Magnitude-weighted mean frequency over the whole clip.
inline double spectral_centroid_hz(const AudioClip& clip) {
  const voicesan::FeatureMatrix fm = voicesan::stft(clip);
  const double bin_hz = static_cast<double>(clip.sample_rate_hz) / fm.fft_size;
  double num = 0.0, den = 0.0;
  for (const auto& row : fm.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double mag = std::pow(10.0, row[k] / 20.0);
      num += mag * bin_hz * static_cast<double>(k);
      den += mag;
    }
  }
  return num / den;
}

// Independent quadrature for distortion strength: trapezoid at 8192 steps.
inline double trapezoid_distortion(const voicesan::WarpKind& kind,
                                   std::size_t intervals = 8192) {
  const double h = kPi / static_cast<double>(intervals);
  double acc = 0.5 * (std::abs(voicesan::warp_apply(kind, 0.0) - 0.0) +
                      std::abs(voicesan::warp_apply(kind, kPi) - kPi));
  for (std::size_t i = 1; i < intervals; ++i) {
    const double w = h * static_cast<double>(i);
    acc += std::abs(voicesan::warp_apply(kind, w) - w);
  }
  return acc * h;
}

// Closed-form bilinear phase, independent of the complex-log implementation.
inline double bilinear_phase_oracle(double omega, double alpha) {
  return 2.0 * std::atan((1.0 + alpha) / (1.0 - alpha) * std::tan(omega / 2.0));
}

// Applies keyword -> safeword substitutions textually, mimicking what the
// recognizer would hear after audio-level substitution.
inline std::string apply_records_to_text(
    const std::string& transcript,
    const std::vector<voicesan::SubstitutionRecord>& records) {
  std::string text = transcript;
  std::size_t cursor = 0;
  for (const auto& rec : records) {
    const std::size_t pos = text.find(rec.keyword, cursor);
    if (pos == std::string::npos) continue;
    text = text.substr(0, pos) + rec.safeword + text.substr(pos + rec.keyword.size());
    cursor = pos + rec.safeword.size();
  }
  return text;
}

// Scratch directory under TMPDIR (or /tmp), unique per call.
inline std::string scratch_dir(const std::string& tag) {
  const char* base = std::getenv("TMPDIR");
  std::string tmpl = std::string(base ? base : "/tmp") + "/voicesan_" + tag + "_XXXXXX";
  std::vector<char> buf(tmpl.begin(), tmpl.end());
  buf.push_back('\0');
  if (mkdtemp(buf.data()) == nullptr) {
    throw voicesan::IoError("mkdtemp failed");
  }
  return std::string(buf.data());
}

}  // namespace testsupport

#endif  // VOICESAN_TESTS_SYNTH_HPP
