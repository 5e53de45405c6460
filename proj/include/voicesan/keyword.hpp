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

#ifndef VOICESAN_KEYWORD_HPP
#define VOICESAN_KEYWORD_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "voicesan/audio.hpp"
#include "voicesan/common.hpp"
#include "voicesan/dsp.hpp"

namespace voicesan {

// A user-enrolled keyword: the stored feature matrix evolves as detections
// are confirmed, which absorbs liaison and context variation over time.
struct KeywordTemplate {
  std::string keyword_id;
  std::string label;
  FeatureMatrix x;
  int hit_count = 0;
};

struct Detection {
  std::string keyword_id;
  double start_s = 0.0;
  double end_s = 0.0;
  double distance = 0.0;
};

enum class WordCategory {
  SingularNoun,
  PluralNoun,
  TransitiveVerb,
  IntransitiveVerb,
  Adjective,
  Adverb,
};

inline WordCategory word_category_from_string(const std::string& s) {
  if (s == "singular-noun") return WordCategory::SingularNoun;
  if (s == "plural-noun") return WordCategory::PluralNoun;
  if (s == "transitive-verb") return WordCategory::TransitiveVerb;
  if (s == "intransitive-verb") return WordCategory::IntransitiveVerb;
  if (s == "adjective") return WordCategory::Adjective;
  if (s == "adverb") return WordCategory::Adverb;
  throw ConfigError("unknown word category: " + s);
}

inline std::string to_string(WordCategory c) {
  switch (c) {
    case WordCategory::SingularNoun: return "singular-noun";
    case WordCategory::PluralNoun: return "plural-noun";
    case WordCategory::TransitiveVerb: return "transitive-verb";
    case WordCategory::IntransitiveVerb: return "intransitive-verb";
    case WordCategory::Adjective: return "adjective";
    default: return "adverb";
  }
}

struct SafewordEntry {
  std::string word;
  AudioClip audio;
};

struct SafewordBank {
  std::map<WordCategory, std::vector<SafewordEntry>> buckets;

  const std::vector<SafewordEntry>& bucket(WordCategory c) const {
    auto it = buckets.find(c);
    if (it == buckets.end() || it->second.empty()) {
      throw ConfigError("safeword bank has no entries for category " +
                        to_string(c));
    }
    return it->second;
  }
};

// One keyword -> safeword replacement; the log line that lets the transcript
// be restored after recognition.
struct SubstitutionRecord {
  std::string utterance_id;
  int order_index = 0;
  std::string keyword;
  std::string safeword;
  double start_s = 0.0;
  double end_s = 0.0;
};

struct SpotterConfig {
  double theta = 0.25;
  double min_stretch = 0.7;
  double max_stretch = 1.4;

  void validate() const {
    if (!(theta > 0.0 && theta < 2.0)) throw ArgumentError("theta must be in (0,2)");
    if (!(0.0 < min_stretch && min_stretch < 1.0 && max_stretch > 1.0)) {
      throw ArgumentError("window stretch ratios must straddle 1");
    }
  }
};

struct DtwResult {
  double distance = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> path;
};

namespace detail {

// Cosine distance between two log-magnitude rows, shifted by the -80 dB
// floor so every coordinate is nonnegative. Zero-norm rows (pure floor)
// cost 0 against each other and 1 against anything else.
inline double cosine_cost(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i] - kLogFloorDb;
    const double b = v[i] - kLogFloorDb;
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  const bool zu = nu < 1e-24, zv = nv < 1e-24;
  if (zu && zv) return 0.0;
  if (zu || zv) return 1.0;
  return 1.0 - dot / std::sqrt(nu * nv);
}

// DP kernel over a precomputed local-cost slab. Returns accumulated cost and
// path-node count per cell; steps are (1,0), (0,1), (1,1), ties prefer the
// diagonal.
struct DtwTable {
  std::size_t rows = 0, cols = 0;
  std::vector<double> acc;
  std::vector<int> steps;
  std::vector<unsigned char> from;  // 0 diag, 1 up (i-1,j), 2 left (i,j-1)

  double& at(std::size_t i, std::size_t j) { return acc[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return acc[i * cols + j]; }
};

inline void dtw_fill(const std::vector<double>& cost, std::size_t rows,
                     std::size_t cols, DtwTable& t) {
  t.rows = rows;
  t.cols = cols;
  t.acc.assign(rows * cols, 0.0);
  t.steps.assign(rows * cols, 0);
  t.from.assign(rows * cols, 0);
  t.acc[0] = cost[0];
  t.steps[0] = 1;
  for (std::size_t j = 1; j < cols; ++j) {
    t.acc[j] = t.acc[j - 1] + cost[j];
    t.steps[j] = static_cast<int>(j) + 1;
    t.from[j] = 2;
  }
  for (std::size_t i = 1; i < rows; ++i) {
    t.acc[i * cols] = t.acc[(i - 1) * cols] + cost[i * cols];
    t.steps[i * cols] = static_cast<int>(i) + 1;
    t.from[i * cols] = 1;
    for (std::size_t j = 1; j < cols; ++j) {
      const double diag = t.acc[(i - 1) * cols + j - 1];
      const double up = t.acc[(i - 1) * cols + j];
      const double left = t.acc[i * cols + j - 1];
      double best = diag;
      unsigned char dir = 0;
      if (up < best) { best = up; dir = 1; }
      if (left < best) { best = left; dir = 2; }
      t.acc[i * cols + j] = best + cost[i * cols + j];
      t.steps[i * cols + j] =
          t.steps[(dir == 0 ? (i - 1) * cols + j - 1
                            : dir == 1 ? (i - 1) * cols + j : i * cols + j - 1)] + 1;
      t.from[i * cols + j] = dir;
    }
  }
}

inline std::vector<std::pair<std::size_t, std::size_t>> dtw_backtrack(
    const DtwTable& t) {
  std::vector<std::pair<std::size_t, std::size_t>> path;
  std::size_t i = t.rows - 1, j = t.cols - 1;
  for (;;) {
    path.emplace_back(i, j);
    if (i == 0 && j == 0) break;
    const unsigned char dir = t.from[i * t.cols + j];
    if (i == 0) { --j; continue; }
    if (j == 0) { --i; continue; }
    if (dir == 0) { --i; --j; }
    else if (dir == 1) { --i; }
    else { --j; }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

inline std::vector<double> cost_slab(const FeatureMatrix& a,
                                     const FeatureMatrix& b) {
  const std::size_t rows = a.rows.size(), cols = b.rows.size();
  std::vector<double> cost(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      cost[i * cols + j] = cosine_cost(a.rows[i], b.rows[j]);
    }
  }
  return cost;
}

}  // namespace detail

// Classic DTW with cosine local cost; returned distance is accumulated cost
// normalized by the path length, so it stays in [0, 2] regardless of the
// input lengths.
inline DtwResult dtw_distance(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows.empty() || b.rows.empty()) {
    throw ArgumentError("dtw_distance: empty feature matrix");
  }
  if (a.rows.front().size() != b.rows.front().size()) {
    throw ArgumentError("dtw_distance: row dimension mismatch");
  }
  const std::vector<double> cost = detail::cost_slab(a, b);
  detail::DtwTable t;
  detail::dtw_fill(cost, a.rows.size(), b.rows.size(), t);
  DtwResult r;
  r.path = detail::dtw_backtrack(t);
  r.distance = t.acc.back() / static_cast<double>(r.path.size());
  return r;
}

inline KeywordTemplate enroll_keyword(const std::string& label,
                                      const AudioClip& clip) {
  clip.validate();
  const double dur = clip.duration_s();
  if (dur < 0.2 || dur > 2.0) {
    throw ArgumentError("enroll_keyword: clip must be 0.2-2.0 s, got " +
                        std::to_string(dur));
  }
  KeywordTemplate t;
  t.keyword_id = label;
  t.label = label;
  t.x = stft(clip);
  t.hit_count = 0;
  return t;
}

// Enrollment registry; re-enrolling a label replaces the template and resets
// its hit count.
class KeywordStore {
 public:
  KeywordTemplate& enroll(const std::string& label, const AudioClip& clip) {
    KeywordTemplate t = enroll_keyword(label, clip);
    auto it = std::find_if(templates_.begin(), templates_.end(),
                           [&](const KeywordTemplate& k) { return k.label == label; });
    if (it != templates_.end()) {
      *it = std::move(t);
      return *it;
    }
    templates_.push_back(std::move(t));
    return templates_.back();
  }

  std::vector<KeywordTemplate>& templates() { return templates_; }
  const std::vector<KeywordTemplate>& templates() const { return templates_; }

 private:
  std::vector<KeywordTemplate> templates_;
};

// Scans the feature stream with a sliding window. For every hop position
// each candidate span length in [min_stretch*L, max_stretch*L] is scored by
// the DTW kernel (one DP per start covers every span ending), spans under
// theta are kept, and overlaps are resolved greedily by lowest distance.
inline std::vector<Detection> spot_keywords(
    const FeatureMatrix& features, const std::vector<KeywordTemplate>& templates,
    const SpotterConfig& config = {}) {
  config.validate();
  if (features.rows.empty()) throw ArgumentError("spot_keywords: empty features");
  const std::size_t total = features.rows.size();
  const double hop_s = features.hop_ms / 1000.0;
  const double win_s = features.window_ms / 1000.0;

  struct Candidate {
    std::size_t tmpl;
    std::size_t start, len;
    double distance;
  };
  std::vector<Candidate> candidates;

  for (std::size_t ti = 0; ti < templates.size(); ++ti) {
    const KeywordTemplate& tmpl = templates[ti];
    if (tmpl.x.rows.empty()) continue;
    if (tmpl.x.rows.front().size() != features.rows.front().size()) {
      throw ArgumentError("spot_keywords: template dimension mismatch");
    }
    const std::size_t L = tmpl.x.rows.size();
    const std::size_t lmin = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(config.min_stretch * static_cast<double>(L))));
    const std::size_t lmax = std::max(
        lmin, static_cast<std::size_t>(std::floor(config.max_stretch * static_cast<double>(L))));
    if (total < lmin) continue;

    // Local costs template-rows x stream-rows, computed once per template.
    std::vector<double> cost(L * total);
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < total; ++j) {
        cost[i * total + j] = detail::cosine_cost(tmpl.x.rows[i], features.rows[j]);
      }
    }

    detail::DtwTable table;
    std::vector<double> slab;
    for (std::size_t start = 0; start + lmin <= total; ++start) {
      const std::size_t span = std::min(lmax, total - start);
      slab.assign(L * span, 0.0);
      for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < span; ++j) {
          slab[i * span + j] = cost[i * total + start + j];
        }
      }
      detail::dtw_fill(slab, L, span, table);
      // Best span for this start.
      double best = 2.0;
      std::size_t best_len = 0;
      for (std::size_t len = lmin; len <= span; ++len) {
        const double d = table.acc[(L - 1) * span + len - 1] /
                         static_cast<double>(table.steps[(L - 1) * span + len - 1]);
        if (d < best) {
          best = d;
          best_len = len;
        }
      }
      if (best_len > 0 && best < config.theta) {
        candidates.push_back({ti, start, best_len, best});
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              if (a.start != b.start) return a.start < b.start;
              return a.tmpl < b.tmpl;
            });
  std::vector<Detection> out;
  std::vector<std::pair<double, double>> taken;
  for (const Candidate& c : candidates) {
    const double s = static_cast<double>(c.start) * hop_s;
    const double e = static_cast<double>(c.start + c.len - 1) * hop_s + win_s;
    bool overlaps = false;
    for (const auto& [ts, te] : taken) {
      if (s < te && ts < e) {
        overlaps = true;
        break;
      }
    }
    if (overlaps) continue;
    taken.emplace_back(s, e);
    out.push_back({templates[c.tmpl].keyword_id, s, e, c.distance});
  }
  std::sort(out.begin(), out.end(),
            [](const Detection& a, const Detection& b) { return a.start_s < b.start_s; });
  return out;
}

// Evolution update: the detected rows aligned to each template row by the
// DTW path are averaged into phi, then the template moves by
// x' = i/(i+1) * x + 1/(i+1) * phi with i counting this hit.
inline KeywordTemplate update_template(
    const KeywordTemplate& tmpl, const FeatureMatrix& detected,
    const std::vector<std::pair<std::size_t, std::size_t>>& path) {
  if (path.empty()) throw ArgumentError("update_template: empty path");
  const std::size_t L = tmpl.x.rows.size();
  const std::size_t dim = tmpl.x.rows.front().size();
  if (detected.rows.empty() || detected.rows.front().size() != dim) {
    throw ArgumentError("update_template: dimension mismatch");
  }
  std::vector<std::vector<double>> phi(L, std::vector<double>(dim, 0.0));
  std::vector<int> counts(L, 0);
  for (const auto& [k, j] : path) {
    if (k >= L || j >= detected.rows.size()) {
      throw ArgumentError("update_template: path index out of range");
    }
    for (std::size_t d = 0; d < dim; ++d) phi[k][d] += detected.rows[j][d];
    ++counts[k];
  }
  KeywordTemplate out = tmpl;
  const double i = static_cast<double>(tmpl.hit_count + 1);
  const double keep = i / (i + 1.0);
  const double take = 1.0 / (i + 1.0);
  for (std::size_t k = 0; k < L; ++k) {
    if (counts[k] == 0) continue;  // unreachable with full DTW paths
    for (std::size_t d = 0; d < dim; ++d) {
      const double mean = phi[k][d] / static_cast<double>(counts[k]);
      out.x.rows[k][d] = keep * tmpl.x.rows[k][d] + take * mean;
    }
  }
  out.hit_count = tmpl.hit_count + 1;
  return out;
}

namespace detail {

inline std::vector<double> resample_linear(const std::vector<double>& x,
                                           int from_rate, int to_rate) {
  if (from_rate == to_rate) return x;
  const double ratio = static_cast<double>(from_rate) / to_rate;
  const std::size_t out_len =
      static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - 1) / ratio)) + 1;
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const std::size_t i0 = std::min(static_cast<std::size_t>(pos), x.size() - 2);
    const double t = pos - static_cast<double>(i0);
    out[i] = x[i0] * (1.0 - t) + x[i0 + 1] * t;
  }
  return out;
}

inline constexpr double kSpliceRampMs = 10.0;

}  // namespace detail

// Cuts each detected span out of the clip and splices the chosen safeword's
// audio in its place, with 10 ms linear crossfades at the joins. Records come
// back in temporal order with dense order_index.
inline std::pair<AudioClip, std::vector<SubstitutionRecord>> substitute_keywords(
    const AudioClip& clip, const std::vector<Detection>& detections,
    const std::map<std::string, WordCategory>& keyword_categories,
    const SafewordBank& bank, Rng& rng, const std::string& utterance_id = "") {
  clip.validate();
  std::vector<Detection> sorted = detections;
  std::sort(sorted.begin(), sorted.end(),
            [](const Detection& a, const Detection& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i].end_s > sorted[i + 1].start_s) {
      throw ArgumentError("substitute_keywords: overlapping detections");
    }
  }

  const int rate = clip.sample_rate_hz;
  AudioClip out;
  out.sample_rate_hz = rate;
  std::vector<SubstitutionRecord> records;
  std::vector<std::size_t> junctions;
  std::size_t cursor = 0;
  int order = 0;
  for (const Detection& det : sorted) {
    auto cat = keyword_categories.find(det.keyword_id);
    if (cat == keyword_categories.end()) {
      throw ConfigError("no category configured for keyword '" + det.keyword_id + "'");
    }
    const auto& bucket = bank.bucket(cat->second);
    const SafewordEntry& safe = bucket[rng.index(bucket.size())];

    const std::size_t beg = std::min(
        clip.samples.size(),
        static_cast<std::size_t>(std::lround(det.start_s * rate)));
    const std::size_t end = std::min(
        clip.samples.size(), static_cast<std::size_t>(std::lround(det.end_s * rate)));
    if (beg < cursor || end < beg) {
      throw ArgumentError("substitute_keywords: detection out of order");
    }
    out.samples.insert(out.samples.end(),
                       clip.samples.begin() + static_cast<long>(cursor),
                       clip.samples.begin() + static_cast<long>(beg));
    junctions.push_back(out.samples.size());
    std::vector<double> safe_samples = detail::resample_linear(
        safe.audio.samples, safe.audio.sample_rate_hz, rate);
    out.samples.insert(out.samples.end(), safe_samples.begin(), safe_samples.end());
    junctions.push_back(out.samples.size());
    cursor = end;

    SubstitutionRecord rec;
    rec.utterance_id = utterance_id;
    rec.order_index = order++;
    rec.keyword = det.keyword_id;
    rec.safeword = safe.word;
    rec.start_s = det.start_s;
    rec.end_s = det.end_s;
    records.push_back(std::move(rec));
  }
  out.samples.insert(out.samples.end(),
                     clip.samples.begin() + static_cast<long>(cursor),
                     clip.samples.end());

  const std::size_t ramp =
      static_cast<std::size_t>(detail::kSpliceRampMs / 1000.0 * rate);
  for (std::size_t j : junctions) {
    if (j == 0 || j >= out.samples.size()) continue;
    for (std::size_t k = 0; k < ramp; ++k) {
      const double g = static_cast<double>(k + 1) / static_cast<double>(ramp + 1);
      if (j >= k + 1) out.samples[j - k - 1] *= g;
      if (j + k < out.samples.size()) out.samples[j + k] *= g;
    }
  }
  return {std::move(out), std::move(records)};
}

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'';
}

inline bool ci_equal(char a, char b) {
  return std::tolower(static_cast<unsigned char>(a)) ==
         std::tolower(static_cast<unsigned char>(b));
}

}  // namespace detail

// Replaces, for each record in order, the next unconsumed case-insensitive
// whole-word occurrence of the safeword with the original keyword. Safewords
// that never appear leave the transcript unchanged and produce a warning.
inline std::string restore_transcript(const std::string& transcript,
                                      const std::vector<SubstitutionRecord>& records,
                                      std::vector<std::string>* warnings = nullptr) {
  std::string text = transcript;
  std::vector<std::pair<std::size_t, std::size_t>> locked;  // restored spans
  for (const SubstitutionRecord& rec : records) {
    const std::string& needle = rec.safeword;
    bool replaced = false;
    if (!needle.empty()) {
      for (std::size_t pos = 0; pos + needle.size() <= text.size(); ++pos) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size(); ++k) {
          if (!detail::ci_equal(text[pos + k], needle[k])) {
            hit = false;
            break;
          }
        }
        if (!hit) continue;
        if (pos > 0 && detail::is_word_char(text[pos - 1])) continue;
        const std::size_t end = pos + needle.size();
        if (end < text.size() && detail::is_word_char(text[end])) continue;
        bool overlaps = false;
        for (const auto& [ls, le] : locked) {
          if (pos < le && ls < end) {
            overlaps = true;
            break;
          }
        }
        if (overlaps) continue;
        text = text.substr(0, pos) + rec.keyword + text.substr(end);
        const long delta = static_cast<long>(rec.keyword.size()) -
                           static_cast<long>(needle.size());
        for (auto& [ls, le] : locked) {
          if (ls >= end) {
            ls = static_cast<std::size_t>(static_cast<long>(ls) + delta);
            le = static_cast<std::size_t>(static_cast<long>(le) + delta);
          }
        }
        locked.emplace_back(pos, pos + rec.keyword.size());
        replaced = true;
        break;
      }
    }
    if (!replaced && warnings != nullptr) {
      warnings->push_back("safeword '" + rec.safeword +
                          "' not found in transcript (record " +
                          std::to_string(rec.order_index) + ")");
    }
  }
  return text;
}

}  // namespace voicesan

#endif  // VOICESAN_KEYWORD_HPP
