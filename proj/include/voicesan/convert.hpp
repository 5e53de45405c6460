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

#ifndef VOICESAN_CONVERT_HPP
#define VOICESAN_CONVERT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voicesan/audio.hpp"
#include "voicesan/common.hpp"
#include "voicesan/dsp.hpp"
#include "voicesan/pitch.hpp"
#include "voicesan/warp.hpp"

namespace voicesan {

struct ConversionConfig {
  DistortionBand band;
  KindPolicy policy = KindPolicy::CompoundOnly;
  std::uint64_t rng_seed = 0;
  int fft_size = 1024;
  bool segment_randomization = false;
  double segment_len_min_ms = 1000.0;
  double segment_len_max_ms = 3000.0;

  void validate() const {
    band.validate();
    if (fft_size < 256 || !detail::is_power_of_two(static_cast<std::size_t>(fft_size))) {
      throw ConfigError("fft_size must be a power of two >= 256");
    }
    if (!(segment_len_min_ms < segment_len_max_ms)) {
      throw ConfigError("segment_len_range_ms: need min < max");
    }
  }
};

inline nlohmann::json to_json(const ConversionConfig& c) {
  return nlohmann::json{
      {"band_lo", c.band.lo},
      {"band_hi", c.band.hi},
      {"direction", c.band.direction == Direction::Deepen ? "deepen" : "sharpen"},
      {"policy", c.policy == KindPolicy::BilinearOnly ? "bilinear" : "compound"},
      {"seed", c.rng_seed},
      {"fft_size", c.fft_size},
      {"segment_randomization", c.segment_randomization},
      {"segment_len_range_ms",
       nlohmann::json::array({c.segment_len_min_ms, c.segment_len_max_ms})}};
}

inline ConversionConfig conversion_config_from_json(const nlohmann::json& j) {
  ConversionConfig c;
  try {
    if (j.contains("band_lo")) c.band.lo = j.at("band_lo").get<double>();
    if (j.contains("band_hi")) c.band.hi = j.at("band_hi").get<double>();
    if (j.contains("direction")) {
      const std::string d = j.at("direction").get<std::string>();
      if (d == "deepen") c.band.direction = Direction::Deepen;
      else if (d == "sharpen") c.band.direction = Direction::Sharpen;
      else throw ConfigError("direction must be deepen or sharpen");
    }
    if (j.contains("policy")) {
      const std::string p = j.at("policy").get<std::string>();
      if (p == "bilinear") c.policy = KindPolicy::BilinearOnly;
      else if (p == "compound") c.policy = KindPolicy::CompoundOnly;
      else throw ConfigError("policy must be bilinear or compound");
    }
    if (j.contains("seed")) c.rng_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fft_size")) c.fft_size = j.at("fft_size").get<int>();
    if (j.contains("segment_randomization")) {
      c.segment_randomization = j.at("segment_randomization").get<bool>();
    }
    if (j.contains("segment_len_range_ms")) {
      const auto& r = j.at("segment_len_range_ms");
      c.segment_len_min_ms = r.at(0).get<double>();
      c.segment_len_max_ms = r.at(1).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("conversion config: ") + e.what());
  }
  c.validate();
  return c;
}

// Stretch/compress the half spectrum along the frequency axis. The output
// bin at omega' takes the input interpolated at inverse(omega'), real and
// imaginary parts independently; DC and Nyquist are copied through.
inline Spectrum warp_spectrum(const Spectrum& spec, const WarpKind& kind) {
  if (kind.is_identity()) return spec;
  const std::size_t half = spec.bins.size() - 1;  // fft_size/2
  Spectrum out;
  out.fft_size = spec.fft_size;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.bins.resize(spec.bins.size());
  out.bins.front() = spec.bins.front();
  out.bins.back() = spec.bins.back();
  for (std::size_t j = 1; j < half; ++j) {
    const double omega_out = kPi * static_cast<double>(j) / static_cast<double>(half);
    const double omega_in = inverse_warp(kind, omega_out);
    double pos = omega_in / kPi * static_cast<double>(half);
    pos = std::clamp(pos, 0.0, static_cast<double>(half));
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), half - 1);
    const double t = pos - static_cast<double>(i0);
    out.bins[j] = spec.bins[i0] * (1.0 - t) + spec.bins[i0 + 1] * t;
  }
  return out;
}

// Full conversion: pitch marking, pitch-synchronous segmentation, per-frame
// FFT, spectral warp, IFFT, then PSOLA. Duration is preserved.
inline AudioClip convert_voice(const AudioClip& clip, const WarpKind& kind,
                               int fft_size = 1024) {
  validate_warp(kind);
  if (fft_size < 64 || !detail::is_power_of_two(static_cast<std::size_t>(fft_size))) {
    throw ArgumentError("convert_voice: fft_size must be a power of two >= 64");
  }
  const PitchMarks marks = mark_pitch(clip);
  std::vector<AnalysisFrame> frames = segment_frames(clip, marks);
  for (AnalysisFrame& frame : frames) {
    const std::size_t len = frame.samples.size();
    // Low-pitched frames can outgrow the configured transform; pad further.
    const std::size_t n = std::max(static_cast<std::size_t>(fft_size),
                                   detail::next_power_of_two(len));
    std::vector<double> padded(n, 0.0);
    std::copy(frame.samples.begin(), frame.samples.end(), padded.begin());
    Spectrum spec = fft_frame(padded, clip.sample_rate_hz);
    spec = warp_spectrum(spec, kind);
    std::vector<double> time = ifft_frame(spec);
    frame.samples.assign(time.begin(), time.begin() + static_cast<long>(len));
  }
  return psola_resynthesize(frames, marks, clip.samples.size(),
                            clip.sample_rate_hz);
}

// Undo a known fixed bilinear warp by converting again with -alpha.
inline AudioClip attack_reverse(const AudioClip& clip_converted, double alpha,
                                int fft_size = 1024) {
  return convert_voice(clip_converted, WarpKind::bilinear(-alpha), fft_size);
}

struct SegmentLogEntry {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;
  WarpKind kind;
};

namespace detail {

inline constexpr double kSegGapFrameMs = 10.0;
inline constexpr double kSegGapThresholdDb = -40.0;
inline constexpr double kSegGapMinMs = 100.0;
inline constexpr double kSegCrossfadeMs = 5.0;

// Linear fade-in / fade-out ramps applied at a splice boundary. The regions
// abut rather than overlap, so total duration is untouched.
inline void ramp_splice(std::vector<double>& samples, std::size_t junction,
                        std::size_t ramp_len) {
  const std::size_t n = samples.size();
  for (std::size_t k = 0; k < ramp_len; ++k) {
    const double g = static_cast<double>(k + 1) / static_cast<double>(ramp_len + 1);
    if (junction >= k + 1) samples[junction - k - 1] *= g;        // fade out
    if (junction + k < n) samples[junction + k] *= g;             // fade in
  }
}

}  // namespace detail

// Splits the clip at silence-gap midpoints into segments of roughly
// randomized length and converts each with independently sampled warp
// parameters, so no single inverse can undo the whole utterance.
inline AudioClip convert_voice_segmented(const AudioClip& clip,
                                         const ConversionConfig& config,
                                         std::vector<SegmentLogEntry>* log = nullptr) {
  config.validate();
  if (!config.segment_randomization) {
    throw ArgumentError("convert_voice_segmented: segment_randomization disabled");
  }
  clip.validate();
  const int rate = clip.sample_rate_hz;
  const auto gaps = detect_silence_gaps(clip, detail::kSegGapFrameMs,
                                        detail::kSegGapThresholdDb,
                                        detail::kSegGapMinMs);
  std::vector<std::size_t> midpoints;
  for (const SilenceGap& g : gaps) {
    const std::size_t mid = (g.start_sample + g.end_sample) / 2;
    if (mid > 0 && mid < clip.samples.size()) midpoints.push_back(mid);
  }
  if (midpoints.empty()) {
    std::cerr << "convert_voice_segmented: no silence gaps found, converting "
                 "the clip as one segment\n";
  }

  Rng rng(config.rng_seed);
  const auto min_len = static_cast<std::size_t>(config.segment_len_min_ms / 1000.0 * rate);
  const auto max_len = static_cast<std::size_t>(config.segment_len_max_ms / 1000.0 * rate);
  const std::size_t floor_len = static_cast<std::size_t>(0.050 * rate) + 1;

  // Choose split points: aim for a random target length per segment and take
  // the gap midpoint nearest the target; fall back to the first midpoint past
  // the minimum when none lands inside the range.
  std::vector<std::size_t> bounds{0};
  std::size_t cur = 0;
  for (;;) {
    const std::size_t target =
        cur + std::max(floor_len,
                       static_cast<std::size_t>(rng.uniform(
                           static_cast<double>(min_len), static_cast<double>(max_len))));
    std::size_t chosen = 0;
    double chosen_err = 0.0;
    for (std::size_t mid : midpoints) {
      if (mid <= cur + std::max(floor_len, min_len)) continue;
      if (mid + floor_len >= clip.samples.size()) continue;
      if (mid - cur > max_len && chosen != 0) break;  // sorted; nothing closer ahead
      const double err = std::abs(static_cast<double>(mid) - static_cast<double>(target));
      if (chosen == 0 || err < chosen_err) {
        chosen = mid;
        chosen_err = err;
      }
    }
    if (chosen == 0) break;
    bounds.push_back(chosen);
    cur = chosen;
  }
  bounds.push_back(clip.samples.size());

  AudioClip out;
  out.sample_rate_hz = rate;
  out.samples.reserve(clip.samples.size());
  const std::size_t ramp = static_cast<std::size_t>(detail::kSegCrossfadeMs / 1000.0 * rate);
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    AudioClip seg;
    seg.sample_rate_hz = rate;
    seg.samples.assign(clip.samples.begin() + static_cast<long>(bounds[s]),
                       clip.samples.begin() + static_cast<long>(bounds[s + 1]));
    const WarpKind kind = sample_warp_params(config.band, config.policy, rng);
    AudioClip converted = convert_voice(seg, kind, config.fft_size);
    if (log != nullptr) log->push_back({bounds[s], bounds[s + 1], kind});
    out.samples.insert(out.samples.end(), converted.samples.begin(),
                       converted.samples.end());
  }
  for (std::size_t s = 1; s + 1 < bounds.size(); ++s) {
    detail::ramp_splice(out.samples, bounds[s], ramp);
  }
  return out;
}

}  // namespace voicesan

#endif  // VOICESAN_CONVERT_HPP
