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

#ifndef VOICESAN_DSP_HPP
#define VOICESAN_DSP_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "voicesan/audio.hpp"
#include "voicesan/common.hpp"

namespace voicesan {

// Half spectrum of one real frame: fft_size/2 + 1 bins, DC and Nyquist real.
struct Spectrum {
  std::vector<std::complex<double>> bins;
  int fft_size = 0;
  int sample_rate_hz = 16000;

  double bin_hz() const {
    return static_cast<double>(sample_rate_hz) / fft_size;
  }
};

// Log-magnitude STFT, one row per analysis frame. Values are dB relative to
// full scale, floored at -80.
struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int sample_rate_hz = 16000;
  int fft_size = 0;
};

struct SilenceGap {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;  // exclusive
};

inline constexpr double kLogFloorDb = -80.0;

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative radix-2 Cooley-Tukey, in place. inverse=true includes the 1/N
// scaling so fft followed by ifft is the identity.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

}  // namespace detail

// Periodic Hann window; sums to a constant under 50% overlap-add.
inline std::vector<double> hann_window(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(n) /
                                static_cast<double>(len));
  }
  return w;
}

inline Spectrum fft_frame(const std::vector<double>& frame,
                          int sample_rate_hz = 16000) {
  const std::size_t n = frame.size();
  if (!detail::is_power_of_two(n) || n < 64) {
    throw ArgumentError("fft_frame: length must be a power of two >= 64");
  }
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = frame[i];
  detail::fft_inplace(buf, false);
  Spectrum spec;
  spec.fft_size = static_cast<int>(n);
  spec.sample_rate_hz = sample_rate_hz;
  spec.bins.assign(buf.begin(), buf.begin() + static_cast<long>(n / 2 + 1));
  spec.bins.front() = {spec.bins.front().real(), 0.0};
  spec.bins.back() = {spec.bins.back().real(), 0.0};
  return spec;
}

inline std::vector<double> ifft_frame(const Spectrum& spec) {
  const std::size_t n = static_cast<std::size_t>(spec.fft_size);
  if (!detail::is_power_of_two(n) || spec.bins.size() != n / 2 + 1) {
    throw ArgumentError("ifft_frame: inconsistent spectrum");
  }
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k <= n / 2; ++k) buf[k] = spec.bins[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) {
    buf[k] = std::conj(spec.bins[n - k]);  // Hermitian half rebuilt
  }
  detail::fft_inplace(buf, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

// mean_normalize subtracts the per-utterance mean of each coefficient;
// default keeps raw log magnitude.
inline FeatureMatrix stft(const AudioClip& clip, double window_ms = 25.0,
                          double hop_ms = 10.0, bool mean_normalize = false) {
  clip.validate();
  if (!(hop_ms > 0.0) || window_ms < hop_ms) {
    throw ArgumentError("stft: need window_ms >= hop_ms > 0");
  }
  const std::size_t win =
      static_cast<std::size_t>(std::lround(window_ms * clip.sample_rate_hz / 1000.0));
  const std::size_t hop =
      static_cast<std::size_t>(std::lround(hop_ms * clip.sample_rate_hz / 1000.0));
  if (win == 0 || hop == 0) throw ArgumentError("stft: window too small");
  if (clip.samples.size() < win) {
    throw ArgumentError("stft: clip shorter than one window");
  }

  const std::size_t fft_size = std::max<std::size_t>(64, detail::next_power_of_two(win));
  const std::size_t num_rows = 1 + (clip.samples.size() - win) / hop;
  const std::vector<double> window = hann_window(win);
  double wsum = 0.0;
  for (double w : window) wsum += w;
  const double full_scale = wsum / 2.0;  // peak-bin magnitude of a 0 dBFS sine

  FeatureMatrix fm;
  fm.window_ms = window_ms;
  fm.hop_ms = hop_ms;
  fm.sample_rate_hz = clip.sample_rate_hz;
  fm.fft_size = static_cast<int>(fft_size);
  fm.rows.reserve(num_rows);

  std::vector<double> frame(fft_size);
  for (std::size_t r = 0; r < num_rows; ++r) {
    const std::size_t off = r * hop;
    std::fill(frame.begin(), frame.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) {
      frame[i] = clip.samples[off + i] * window[i];
    }
    Spectrum spec = fft_frame(frame, clip.sample_rate_hz);
    std::vector<double> row(spec.bins.size());
    for (std::size_t k = 0; k < spec.bins.size(); ++k) {
      double mag = std::abs(spec.bins[k]);
      double db = mag > 0.0 ? 20.0 * std::log10(mag / full_scale) : kLogFloorDb;
      row[k] = std::max(db, kLogFloorDb);
    }
    fm.rows.push_back(std::move(row));
  }

  if (mean_normalize) {
    const std::size_t dim = fm.rows.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& row : fm.rows)
      for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    for (double& m : mean) m /= static_cast<double>(fm.rows.size());
    for (auto& row : fm.rows)
      for (std::size_t d = 0; d < dim; ++d) row[d] -= mean[d];
  }
  return fm;
}

// Maximal runs of frames whose RMS sits below energy_threshold_db (dBFS) and
// that last at least min_gap_ms. Frames are non-overlapping.
inline std::vector<SilenceGap> detect_silence_gaps(const AudioClip& clip,
                                                   double frame_ms,
                                                   double energy_threshold_db,
                                                   double min_gap_ms) {
  clip.validate();
  if (!(frame_ms > 0.0)) throw ArgumentError("detect_silence_gaps: frame_ms <= 0");
  if (!(min_gap_ms >= 0.0)) throw ArgumentError("detect_silence_gaps: min_gap_ms < 0");
  const std::size_t flen =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(
                                   frame_ms * clip.sample_rate_hz / 1000.0)));
  const std::size_t n = clip.samples.size();
  const std::size_t num_frames = (n + flen - 1) / flen;
  const std::size_t min_gap_samples = static_cast<std::size_t>(
      std::lround(min_gap_ms * clip.sample_rate_hz / 1000.0));

  std::vector<SilenceGap> gaps;
  std::size_t run_start = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end_sample) {
    if (in_run && end_sample - run_start >= min_gap_samples) {
      gaps.push_back({run_start, end_sample});
    }
    in_run = false;
  };
  for (std::size_t f = 0; f < num_frames; ++f) {
    const std::size_t beg = f * flen;
    const std::size_t end = std::min(beg + flen, n);
    double e = 0.0;
    for (std::size_t i = beg; i < end; ++i) e += clip.samples[i] * clip.samples[i];
    double rms = std::sqrt(e / static_cast<double>(end - beg));
    double db = 20.0 * std::log10(rms + 1e-12);
    if (db < energy_threshold_db) {
      if (!in_run) {
        run_start = beg;
        in_run = true;
      }
    } else {
      close_run(beg);
    }
  }
  close_run(n);
  return gaps;
}

// Mean over frames of the L2 distance between log-magnitude rows. Clips are
// framed with the same parameters; the shorter row count bounds the sum.
inline double spectral_log_distance(const AudioClip& a, const AudioClip& b,
                                    double window_ms = 25.0,
                                    double hop_ms = 10.0) {
  FeatureMatrix fa = stft(a, window_ms, hop_ms);
  FeatureMatrix fb = stft(b, window_ms, hop_ms);
  const std::size_t rows = std::min(fa.rows.size(), fb.rows.size());
  if (rows == 0) throw ArgumentError("spectral_log_distance: empty features");
  double acc = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < fa.rows[r].size(); ++k) {
      double d = fa.rows[r][k] - fb.rows[r][k];
      d2 += d * d;
    }
    acc += std::sqrt(d2);
  }
  return acc / static_cast<double>(rows);
}

}  // namespace voicesan

#endif  // VOICESAN_DSP_HPP
