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

#ifndef VOICESAN_PIPELINE_HPP
#define VOICESAN_PIPELINE_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "voicesan/audio.hpp"
#include "voicesan/bench.hpp"
#include "voicesan/common.hpp"
#include "voicesan/convert.hpp"
#include "voicesan/keyword.hpp"

namespace voicesan {

// File-level glue: keyword/safeword configuration loading, substitution-log
// serialization, and the sanitize pipeline that the CLI exposes.

struct SanitizeManifest {
  std::string input_path;
  std::string output_path;
  ConversionConfig config;
  std::string keywords_path;   // optional; empty disables spotting
  std::string safewords_path;  // safeword bank index JSON
  std::string log_path;        // substitution log (JSON lines)
  bool bench = false;
  bool confirm_hits = false;   // apply evolution updates for this run's hits
  std::string utterance_id;
};

struct KeywordConfigEntry {
  std::string label;
  WordCategory category;
  std::string clip_path;
};

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

inline std::string dirname_of(const std::string& path) {
  const std::size_t slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

inline std::string join_path(const std::string& dir, const std::string& leaf) {
  if (leaf.empty() || leaf.front() == '/') return leaf;
  return dir + "/" + leaf;
}

}  // namespace detail

// Keyword config: JSON array of {label, category, clip}. Relative clip paths
// resolve against the config file's directory.
inline std::vector<KeywordConfigEntry> load_keyword_config(const std::string& path) {
  const nlohmann::json j = detail::load_json_file(path);
  if (!j.is_array()) throw ConfigError(path + ": expected a JSON array");
  const std::string base = detail::dirname_of(path);
  std::vector<KeywordConfigEntry> entries;
  for (const auto& item : j) {
    try {
      KeywordConfigEntry e;
      e.label = item.at("label").get<std::string>();
      e.category = word_category_from_string(item.at("category").get<std::string>());
      e.clip_path = detail::join_path(base, item.at("clip").get<std::string>());
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(path + ": " + ex.what());
    }
  }
  return entries;
}

// Safeword bank index: JSON array of {word, category, file}, audio stored as
// WAV files next to the index.
inline SafewordBank load_safeword_bank(const std::string& index_path) {
  const nlohmann::json j = detail::load_json_file(index_path);
  if (!j.is_array()) throw ConfigError(index_path + ": expected a JSON array");
  const std::string base = detail::dirname_of(index_path);
  SafewordBank bank;
  for (const auto& item : j) {
    try {
      const std::string word = item.at("word").get<std::string>();
      const WordCategory cat =
          word_category_from_string(item.at("category").get<std::string>());
      const std::string file =
          detail::join_path(base, item.at("file").get<std::string>());
      bank.buckets[cat].push_back({word, read_wav(file)});
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(index_path + ": " + ex.what());
    }
  }
  if (bank.buckets.empty()) throw ConfigError(index_path + ": empty safeword bank");
  return bank;
}

inline nlohmann::json to_json(const SubstitutionRecord& r) {
  return nlohmann::json{{"utterance_id", r.utterance_id},
                        {"order_index", r.order_index},
                        {"keyword", r.keyword},
                        {"safeword", r.safeword},
                        {"start_s", r.start_s},
                        {"end_s", r.end_s}};
}

inline SubstitutionRecord substitution_record_from_json(const nlohmann::json& j) {
  SubstitutionRecord r;
  try {
    r.utterance_id = j.value("utterance_id", std::string());
    r.order_index = j.at("order_index").get<int>();
    r.keyword = j.at("keyword").get<std::string>();
    r.safeword = j.at("safeword").get<std::string>();
    r.start_s = j.value("start_s", 0.0);
    r.end_s = j.value("end_s", 0.0);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("substitution record: ") + ex.what());
  }
  return r;
}

inline void write_substitution_log(const std::vector<SubstitutionRecord>& records,
                                   const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (const SubstitutionRecord& r : records) {
    f << to_json(r).dump() << "\n";
  }
}

inline std::vector<SubstitutionRecord> read_substitution_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::vector<SubstitutionRecord> records;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(substitution_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw FormatError(path + ": " + ex.what());
    }
  }
  std::sort(records.begin(), records.end(),
            [](const SubstitutionRecord& a, const SubstitutionRecord& b) {
              return a.order_index < b.order_index;
            });
  return records;
}

struct SanitizeResult {
  std::vector<SubstitutionRecord> records;
  std::vector<SegmentLogEntry> segments;
  BenchReport bench;
  bool bench_valid = false;
};

// The full sanitize pass: spot keywords on the input features, splice in
// safewords, voice-convert the spliced audio, write the output WAV and the
// substitution log.
inline SanitizeResult run_sanitize(const SanitizeManifest& m) {
  m.config.validate();
  if (m.input_path == m.output_path) {
    throw ConfigError("input and output paths must differ");
  }
  const AudioClip clip = read_wav(m.input_path);

  KeywordStore store;
  std::map<std::string, WordCategory> categories;
  if (!m.keywords_path.empty()) {
    for (const KeywordConfigEntry& e : load_keyword_config(m.keywords_path)) {
      store.enroll(e.label, read_wav(e.clip_path));
      categories[e.label] = e.category;
    }
  }

  SanitizeResult result;
  Rng rng(m.config.rng_seed);
  AudioClip working = clip;
  if (!store.templates().empty()) {
    const SafewordBank bank = load_safeword_bank(m.safewords_path);
    const FeatureMatrix features = stft(clip);
    const std::vector<Detection> detections =
        spot_keywords(features, store.templates(), SpotterConfig{});
    if (m.confirm_hits) {
      const double hop_s = features.hop_ms / 1000.0;
      const double win_s = features.window_ms / 1000.0;
      for (const Detection& det : detections) {
        auto it = std::find_if(store.templates().begin(), store.templates().end(),
                               [&](const KeywordTemplate& t) {
                                 return t.keyword_id == det.keyword_id;
                               });
        if (it == store.templates().end()) continue;
        const std::size_t row0 =
            static_cast<std::size_t>(std::lround(det.start_s / hop_s));
        const std::size_t row1 = std::min(
            features.rows.size(),
            static_cast<std::size_t>(std::lround((det.end_s - win_s) / hop_s)) + 1);
        if (row1 <= row0) continue;
        FeatureMatrix span = features;
        span.rows.assign(features.rows.begin() + static_cast<long>(row0),
                         features.rows.begin() + static_cast<long>(row1));
        const DtwResult d = dtw_distance(it->x, span);
        *it = update_template(*it, span, d.path);
      }
    }
    auto [spliced, records] = substitute_keywords(clip, detections, categories,
                                                  bank, rng, m.utterance_id);
    working = std::move(spliced);
    result.records = std::move(records);
  }

  AudioClip converted;
  if (m.config.segment_randomization) {
    converted = convert_voice_segmented(working, m.config, &result.segments);
  } else {
    const WarpKind kind = sample_warp_params(m.config.band, m.config.policy, rng);
    converted = convert_voice(working, kind, m.config.fft_size);
    result.segments.push_back({0, converted.samples.size(), kind});
  }
  write_wav(converted, m.output_path);
  if (!m.log_path.empty()) write_substitution_log(result.records, m.log_path);

  if (m.bench) {
    std::vector<KeywordTemplate> templates = store.templates();
    SafewordBank bank;
    std::map<std::string, WordCategory> bench_categories = categories;
    if (!m.safewords_path.empty()) {
      bank = load_safeword_bank(m.safewords_path);
    }
    if (templates.empty() || bank.buckets.empty()) {
      // Self-contained timing fixture when no keyword assets were given.
      AudioClip head;
      head.sample_rate_hz = clip.sample_rate_hz;
      const std::size_t n = std::min(clip.samples.size(),
                                     static_cast<std::size_t>(clip.sample_rate_hz / 2));
      head.samples.assign(clip.samples.begin(),
                          clip.samples.begin() + static_cast<long>(n));
      if (templates.empty()) {
        templates.push_back(enroll_keyword("bench-fixture", head));
        bench_categories["bench-fixture"] = WordCategory::SingularNoun;
      }
      if (bank.buckets.empty()) {
        bank.buckets[WordCategory::SingularNoun].push_back({"placeholder", head});
      }
      for (const auto& [label, cat] : categories) bench_categories[label] = cat;
    }
    result.bench = run_bench(clip, m.config, templates, bank, bench_categories);
    result.bench_valid = true;
  }
  return result;
}

}  // namespace voicesan

#endif  // VOICESAN_PIPELINE_HPP
