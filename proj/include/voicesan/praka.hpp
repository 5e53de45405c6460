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

#ifndef VOICESAN_PRAKA_HPP
#define VOICESAN_PRAKA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "voicesan/common.hpp"

namespace voicesan {

// Randomized keyword aggregation: each client reports a perturbed 2-bit
// array per vocabulary word, once ever, and the server recovers unbiased
// frequency estimates from the noisy counts.

struct PrivacyParam {
  double p = 0.5;

  void validate() const {
    if (!(p > 0.0 && p <= 1.0)) {
      throw ArgumentError("privacy parameter p must be in (0, 1]");
    }
  }
};

struct KeywordReport {
  std::string word;
  int b1 = 0;
  int b2 = 0;
};

struct AggregateEstimate {
  std::string word;
  std::size_t total_reports = 0;   // N
  std::size_t ones = 0;            // n, reports with b1' = 1
  double n_hat = 0.0;
};

// Client-side randomized response. The true array is (1,0) for a sensitive
// word and (0,1) otherwise; each bit is then forced to 1 with probability
// p/2, forced to 0 with probability p/2, and kept with probability 1-p.
inline KeywordReport make_report(const std::string& word, bool is_sensitive,
                                 const PrivacyParam& p, Rng& rng) {
  p.validate();
  KeywordReport rep;
  rep.word = word;
  int bits[2] = {is_sensitive ? 1 : 0, is_sensitive ? 0 : 1};
  for (int& b : bits) {
    const double u = rng.uniform();
    if (u < p.p / 2.0) b = 1;
    else if (u < p.p) b = 0;
    // else keep
  }
  rep.b1 = bits[0];
  rep.b2 = bits[1];
  return rep;
}

// Enforces the one-report-per-word rule on the client. The set can be
// persisted between sessions as one word per line.
class ReportLedger {
 public:
  KeywordReport report(const std::string& word, bool is_sensitive,
                       const PrivacyParam& p, Rng& rng) {
    if (!reported_.insert(word).second) {
      throw ProtocolError("duplicate report for word '" + word + "'");
    }
    return make_report(word, is_sensitive, p, rng);
  }

  bool has_reported(const std::string& word) const {
    return reported_.count(word) != 0;
  }

  const std::set<std::string>& reported() const { return reported_; }
  void restore(std::set<std::string> words) { reported_ = std::move(words); }

 private:
  std::set<std::string> reported_;
};

// Privacy level: eps = 2 ln((2-p)/p). Zero at p = 1, grows without bound as
// p -> 0.
inline double epsilon(const PrivacyParam& p) {
  p.validate();
  return 2.0 * std::log((2.0 - p.p) / p.p);
}

// Exhaustively checks the differential-privacy bound: over both true arrays
// and all four outputs, the worst output-probability ratio must equal
// ((2-p)/p)^2, attained at the extreme patterns (0,1) and (1,0).
inline double verify_dp(const PrivacyParam& p) {
  p.validate();
  const double keep = 1.0 - p.p / 2.0;  // P(b' = b | b)
  const double flip = p.p / 2.0;
  auto prob = [&](int b1_in, int b2_in, int b1_out, int b2_out) {
    const double p1 = (b1_out == b1_in) ? keep : flip;
    const double p2 = (b2_out == b2_in) ? keep : flip;
    return p1 * p2;
  };
  double max_ratio = 0.0;
  for (int b1 = 0; b1 <= 1; ++b1) {
    for (int b2 = 0; b2 <= 1; ++b2) {
      const double pr1 = prob(0, 1, b1, b2);  // B = (0,1)
      const double pr2 = prob(1, 0, b1, b2);  // B = (1,0)
      max_ratio = std::max(max_ratio, std::max(pr1 / pr2, pr2 / pr1));
    }
  }
  return max_ratio;
}

// Server-side estimator n_hat = (n - (p/2) N) / (1 - p) per word. The result
// is deliberately unclamped; it may be negative or exceed N.
inline std::vector<AggregateEstimate> aggregate(
    const std::vector<KeywordReport>& reports, const PrivacyParam& p) {
  p.validate();
  if (p.p >= 1.0) {
    throw ArgumentError("aggregate: estimator undefined at p = 1");
  }
  std::map<std::string, AggregateEstimate> by_word;
  for (const KeywordReport& r : reports) {
    AggregateEstimate& agg = by_word[r.word];
    agg.word = r.word;
    agg.total_reports += 1;
    agg.ones += r.b1 == 1 ? 1 : 0;
  }
  std::vector<AggregateEstimate> out;
  out.reserve(by_word.size());
  for (auto& [word, agg] : by_word) {
    agg.n_hat = (static_cast<double>(agg.ones) -
                 (p.p / 2.0) * static_cast<double>(agg.total_reports)) /
                (1.0 - p.p);
    out.push_back(agg);
  }
  return out;
}

namespace detail {

// log C(n, k)
inline double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

inline std::vector<double> binomial_pmf(std::size_t n, double prob) {
  std::vector<double> pmf(n + 1);
  if (prob <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (prob >= 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  const double lp = std::log(prob);
  const double lq = std::log1p(-prob);
  for (std::size_t k = 0; k <= n; ++k) {
    pmf[k] = std::exp(log_choose(n, k) + static_cast<double>(k) * lp +
                      static_cast<double>(n - k) * lq);
  }
  return pmf;
}

}  // namespace detail

// Exact PMF of the observed count n given n0 true positives: n = X + Y with
// X ~ Binomial(N - n0, p/2) and Y ~ Binomial(n0, 1 - p/2). Coefficients are
// evaluated in log space so large N stays finite.
inline std::vector<double> report_count_pmf(std::size_t N, std::size_t n0,
                                            const PrivacyParam& p) {
  p.validate();
  if (n0 > N) throw ArgumentError("report_count_pmf: n0 > N");
  const std::vector<double> px = detail::binomial_pmf(N - n0, p.p / 2.0);
  const std::vector<double> py = detail::binomial_pmf(n0, 1.0 - p.p / 2.0);
  std::vector<double> pmf(N + 1, 0.0);
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (px[i] == 0.0) continue;
    for (std::size_t j = 0; j < py.size(); ++j) {
      pmf[i + j] += px[i] * py[j];
    }
  }
  return pmf;
}

// Pr(|n_hat - n0| <= eps): the exact PMF summed over
// k in [ceil((1-p)(n0-eps) + (p/2)N), floor((1-p)(n0+eps) + (p/2)N)].
inline double error_bound(std::size_t N, std::size_t n0, const PrivacyParam& p,
                          double eps) {
  p.validate();
  if (p.p >= 1.0) throw ArgumentError("error_bound: undefined at p = 1");
  if (n0 > N) throw ArgumentError("error_bound: n0 > N");
  if (!(eps >= 0.0)) throw ArgumentError("error_bound: eps must be >= 0");
  const double q = 1.0 - p.p;
  const double shift = (p.p / 2.0) * static_cast<double>(N);
  const double lo_f = std::ceil(q * (static_cast<double>(n0) - eps) + shift);
  const double hi_f = std::floor(q * (static_cast<double>(n0) + eps) + shift);
  if (hi_f < lo_f) return 0.0;
  const std::size_t lo = lo_f <= 0.0 ? 0 : static_cast<std::size_t>(lo_f);
  const std::size_t hi = hi_f >= static_cast<double>(N)
                             ? N
                             : static_cast<std::size_t>(hi_f);
  const std::vector<double> pmf = report_count_pmf(N, n0, p);
  double acc = 0.0;
  for (std::size_t k = lo; k <= hi; ++k) acc += pmf[k];
  return std::min(acc, 1.0);
}

}  // namespace voicesan

#endif  // VOICESAN_PRAKA_HPP
