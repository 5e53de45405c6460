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

#ifndef VOICESAN_PITCH_HPP
#define VOICESAN_PITCH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "voicesan/audio.hpp"
#include "voicesan/common.hpp"
#include "voicesan/dsp.hpp"

namespace voicesan {

// Time anchors for pitch-synchronous processing. Voiced marks track the
// local glottal period; unvoiced marks fall on a fixed 10 ms grid.
struct PitchMarks {
  std::vector<std::size_t> positions;  // strictly increasing sample indices
  std::vector<bool> voiced;
  std::vector<double> f0_track;  // Hz, 0 for unvoiced marks
};

// One Hann-weighted analysis frame centered on a pitch mark. Voiced frames
// span two local periods; unvoiced frames are a fixed 20 ms.
struct AnalysisFrame {
  std::size_t center_mark_index = 0;
  std::vector<double> samples;  // even length, already analysis-windowed
};

inline constexpr double kF0MinHz = 60.0;
inline constexpr double kF0MaxHz = 400.0;
inline constexpr double kVoicingThreshold = 0.3;
inline constexpr double kPitchAnalysisWindowMs = 40.0;
inline constexpr double kUnvoicedHopMs = 10.0;
inline constexpr double kUnvoicedFrameMs = 20.0;
inline constexpr double kPsolaEnergyFloor = 1e-6;

namespace detail {

struct PeriodEstimate {
  bool voiced = false;
  std::size_t period = 0;  // samples
};

// Normalized autocorrelation peak search over the F0 range, centered at
// `center`. Window is clamped to the clip, so estimates near the edges use
// whatever context exists.
inline PeriodEstimate estimate_period(const AudioClip& clip, std::size_t center) {
  const int rate = clip.sample_rate_hz;
  const std::size_t n = clip.samples.size();
  const std::size_t half = static_cast<std::size_t>(
      std::lround(kPitchAnalysisWindowMs / 2.0 / 1000.0 * rate));
  const std::size_t beg = center > half ? center - half : 0;
  const std::size_t end = std::min(n, center + half);
  const std::size_t len = end - beg;

  const std::size_t lag_min = static_cast<std::size_t>(std::ceil(rate / kF0MaxHz));
  const std::size_t lag_max = static_cast<std::size_t>(std::floor(rate / kF0MinHz));
  if (len < lag_min + 8) return {};

  const double* x = clip.samples.data() + beg;
  const std::size_t hi = std::min(lag_max, len - 1);
  std::vector<double> r(hi + 1, -2.0);
  double best_r = 0.0;
  for (std::size_t lag = lag_min; lag <= hi; ++lag) {
    const std::size_t m = len - lag;
    double dot = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      dot += x[i] * x[i + lag];
      e0 += x[i] * x[i];
      e1 += x[i + lag] * x[i + lag];
    }
    double denom = std::sqrt(e0 * e1);
    if (denom < 1e-12) continue;
    r[lag] = dot / denom;
    best_r = std::max(best_r, r[lag]);
  }
  if (best_r < kVoicingThreshold) return {};
  // Periodic signals peak at every multiple of the period; take the smallest
  // local peak close to the global best to avoid octave-down errors.
  for (std::size_t lag = lag_min; lag <= hi; ++lag) {
    if (r[lag] < 0.9 * best_r || r[lag] < kVoicingThreshold) continue;
    const double left = lag > lag_min ? r[lag - 1] : -2.0;
    const double right = lag < hi ? r[lag + 1] : -2.0;
    if (r[lag] >= left && r[lag] >= right) return {true, lag};
  }
  return {};
}

inline std::size_t argmax_in(const std::vector<double>& x, std::size_t beg,
                             std::size_t end) {
  std::size_t best = beg;
  for (std::size_t i = beg; i < end; ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

}  // namespace detail

inline PitchMarks mark_pitch(const AudioClip& clip) {
  clip.validate();
  const int rate = clip.sample_rate_hz;
  const std::size_t n = clip.samples.size();
  if (clip.duration_s() < 0.050) {
    throw ArgumentError("mark_pitch: clip shorter than 50 ms");
  }
  const std::size_t unvoiced_hop = static_cast<std::size_t>(
      std::lround(kUnvoicedHopMs / 1000.0 * rate));

  PitchMarks marks;
  std::size_t pos = 0;
  // Seed the first mark: snap to the first local maximum if the start is
  // voiced, otherwise start the 10 ms grid at zero.
  {
    detail::PeriodEstimate est = detail::estimate_period(clip, 0);
    if (est.voiced) {
      pos = detail::argmax_in(clip.samples, 0, std::min(n, est.period));
    }
  }
  while (pos < n) {
    detail::PeriodEstimate est = detail::estimate_period(clip, pos);
    marks.positions.push_back(pos);
    marks.voiced.push_back(est.voiced);
    marks.f0_track.push_back(
        est.voiced ? static_cast<double>(rate) / static_cast<double>(est.period)
                   : 0.0);
    std::size_t next;
    if (est.voiced) {
      // Predict one period ahead, then snap to the waveform maximum within
      // +-20% of the period so spacing stays inside the tolerance band.
      const std::size_t period = est.period;
      const std::size_t predicted = pos + period;
      const std::size_t radius = std::max<std::size_t>(1, period / 5);
      const std::size_t lo = predicted - radius;
      const std::size_t hi = std::min(n, predicted + radius + 1);
      if (lo >= n) break;
      next = detail::argmax_in(clip.samples, lo, hi);
      if (next <= pos) next = predicted;  // flat signal fallback
    } else {
      next = pos + unvoiced_hop;
    }
    if (next <= pos || next >= n) break;
    pos = next;
  }
  return marks;
}

inline std::vector<AnalysisFrame> segment_frames(const AudioClip& clip,
                                                 const PitchMarks& marks) {
  clip.validate();
  const int rate = clip.sample_rate_hz;
  const std::size_t n = clip.samples.size();
  const std::size_t unvoiced_half = static_cast<std::size_t>(
      std::lround(kUnvoicedFrameMs / 2.0 / 1000.0 * rate));

  std::vector<AnalysisFrame> frames;
  frames.reserve(marks.positions.size());
  for (std::size_t i = 0; i < marks.positions.size(); ++i) {
    const std::size_t mark = marks.positions[i];
    if (mark >= n) throw ArgumentError("segment_frames: mark outside clip");
    std::size_t half;
    if (marks.voiced[i] && marks.f0_track[i] > 0.0) {
      half = static_cast<std::size_t>(
          std::lround(static_cast<double>(rate) / marks.f0_track[i]));
    } else {
      half = unvoiced_half;
    }
    const std::size_t len = 2 * half;  // even by construction
    const std::vector<double> window = hann_window(len);
    AnalysisFrame frame;
    frame.center_mark_index = i;
    frame.samples.resize(len, 0.0);
    // Frame covers [mark - half, mark + half); out-of-bounds parts stay zero.
    for (std::size_t k = 0; k < len; ++k) {
      const long src = static_cast<long>(mark) - static_cast<long>(half) +
                       static_cast<long>(k);
      if (src >= 0 && static_cast<std::size_t>(src) < n) {
        frame.samples[k] = clip.samples[static_cast<std::size_t>(src)] * window[k];
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

// Weighted overlap-add at the original mark positions. Each frame is
// multiplied by its synthesis window (same Hann) and the sum is divided by
// the accumulated squared-window envelope, so an unmodified
// segment/resynthesize round trip reproduces the source wherever the
// envelope is nonzero.
inline AudioClip psola_resynthesize(const std::vector<AnalysisFrame>& frames,
                                    const PitchMarks& marks,
                                    std::size_t out_len, int sample_rate_hz) {
  if (frames.size() != marks.positions.size()) {
    throw ArgumentError("psola_resynthesize: frames/marks size mismatch");
  }
  std::vector<double> acc(out_len, 0.0);
  std::vector<double> env(out_len, 0.0);
  for (const AnalysisFrame& frame : frames) {
    if (frame.center_mark_index >= marks.positions.size()) {
      throw ArgumentError("psola_resynthesize: bad mark index");
    }
    const std::size_t len = frame.samples.size();
    if (len == 0 || (len & 1) != 0) {
      throw ArgumentError("psola_resynthesize: frame length must be even");
    }
    const std::size_t mark = marks.positions[frame.center_mark_index];
    const std::vector<double> window = hann_window(len);
    const long start = static_cast<long>(mark) - static_cast<long>(len / 2);
    for (std::size_t k = 0; k < len; ++k) {
      const long dst = start + static_cast<long>(k);
      if (dst < 0 || static_cast<std::size_t>(dst) >= out_len) continue;
      acc[static_cast<std::size_t>(dst)] += frame.samples[k] * window[k];
      env[static_cast<std::size_t>(dst)] += window[k] * window[k];
    }
  }
  AudioClip out;
  out.sample_rate_hz = sample_rate_hz;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    double v = acc[i] / std::max(env[i], kPsolaEnergyFloor);
    out.samples[i] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

}  // namespace voicesan

#endif  // VOICESAN_PITCH_HPP
