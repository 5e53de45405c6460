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

#ifndef VOICESAN_BENCH_HPP
#define VOICESAN_BENCH_HPP

#include <ctime>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voicesan/audio.hpp"
#include "voicesan/convert.hpp"
#include "voicesan/keyword.hpp"

namespace voicesan {

// Per-stage CPU cost of sanitization, expressed as the realtime coefficient
// (CPU seconds per second of audio). Stages follow the pipeline split:
// pitch marking, the remaining conversion steps, keyword spotting, and
// substitution.
struct BenchReport {
  double audio_duration_s = 0.0;
  std::map<std::string, double> cpu_time_s;              // per stage
  std::map<std::string, double> realtime_coefficient;    // per stage
  double total_cpu_time_s = 0.0;
  double total_realtime_coefficient = 0.0;
};

namespace detail {

inline double cpu_now_s() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// Runs fn repeatedly until at least min_measure_s of CPU time accumulates,
// then returns the mean per-run cost. Keeps sub-millisecond stages out of
// clock-resolution noise.
inline double measure_stage(const std::function<void()>& fn,
                            double min_measure_s = 0.2) {
  int reps = 0;
  const double start = cpu_now_s();
  double elapsed = 0.0;
  do {
    fn();
    ++reps;
    elapsed = cpu_now_s() - start;
  } while (elapsed < min_measure_s);
  return elapsed / reps;
}

inline double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace detail

inline constexpr int kBenchRepeats = 5;

// Times the four sanitization stages on one clip. Each stage is measured
// kBenchRepeats times and the median is reported. Spotting and substitution
// need a template and a safeword; when the caller has none, pass a template
// enrolled from the head of the clip and any placeholder safeword clip.
inline BenchReport run_bench(const AudioClip& clip,
                             const ConversionConfig& config,
                             const std::vector<KeywordTemplate>& templates,
                             const SafewordBank& bank,
                             const std::map<std::string, WordCategory>& categories) {
  clip.validate();
  config.validate();
  if (templates.empty()) throw ArgumentError("run_bench: need a keyword template");

  Rng rng(config.rng_seed);
  const WarpKind kind = sample_warp_params(config.band, config.policy, rng);

  // Precompute stage inputs once so each measurement times one stage only.
  const PitchMarks marks = mark_pitch(clip);
  const FeatureMatrix features = stft(clip);
  std::vector<Detection> detections =
      spot_keywords(features, templates, SpotterConfig{});
  if (detections.empty()) {
    // Keep the substitution stage non-trivial: splice over the template span
    // at the clip head.
    const double dur = std::min(0.5, clip.duration_s() / 2.0);
    detections.push_back({templates.front().keyword_id, 0.0, dur, 0.0});
  }

  auto stage_pitch = [&]() { mark_pitch(clip); };
  auto stage_other_vc = [&]() {
    std::vector<AnalysisFrame> frames = segment_frames(clip, marks);
    for (AnalysisFrame& frame : frames) {
      const std::size_t len = frame.samples.size();
      const std::size_t n = std::max(static_cast<std::size_t>(config.fft_size),
                                     detail::next_power_of_two(len));
      std::vector<double> padded(n, 0.0);
      std::copy(frame.samples.begin(), frame.samples.end(), padded.begin());
      Spectrum spec = fft_frame(padded, clip.sample_rate_hz);
      spec = warp_spectrum(spec, kind);
      std::vector<double> time = ifft_frame(spec);
      frame.samples.assign(time.begin(), time.begin() + static_cast<long>(len));
    }
    psola_resynthesize(frames, marks, clip.samples.size(), clip.sample_rate_hz);
  };
  auto stage_spot = [&]() {
    FeatureMatrix f = stft(clip);
    spot_keywords(f, templates, SpotterConfig{});
  };
  auto stage_subst = [&]() {
    Rng r(config.rng_seed);
    substitute_keywords(clip, detections, categories, bank, r);
  };

  BenchReport report;
  report.audio_duration_s = clip.duration_s();
  const std::vector<std::pair<std::string, std::function<void()>>> stages = {
      {"pitch_marking", stage_pitch},
      {"other_vc_steps", stage_other_vc},
      {"keyword_spotting", stage_spot},
      {"substitution", stage_subst},
  };
  for (const auto& [name, fn] : stages) {
    fn();  // warm caches and page in the working set before timing
    std::vector<double> runs;
    runs.reserve(kBenchRepeats);
    for (int r = 0; r < kBenchRepeats; ++r) {
      runs.push_back(detail::measure_stage(fn));
    }
    const double t = detail::median5(runs);
    report.cpu_time_s[name] = t;
    report.realtime_coefficient[name] = t / report.audio_duration_s;
    report.total_cpu_time_s += t;
  }
  report.total_realtime_coefficient =
      report.total_cpu_time_s / report.audio_duration_s;
  return report;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json stages;
  for (const auto& [name, t] : r.cpu_time_s) {
    stages[name] = {{"cpu_time_s", t},
                    {"realtime_coefficient", r.realtime_coefficient.at(name)}};
  }
  return nlohmann::json{
      {"audio_duration_s", r.audio_duration_s},
      {"stages", stages},
      {"total",
       {{"cpu_time_s", r.total_cpu_time_s},
        {"realtime_coefficient", r.total_realtime_coefficient}}}};
}

}  // namespace voicesan

#endif  // VOICESAN_BENCH_HPP
