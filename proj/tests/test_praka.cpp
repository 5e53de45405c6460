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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "voicesan/common.hpp"
#include "voicesan/praka.hpp"

using namespace voicesan;

TEST_CASE("make_report bit transitions") {
  SECTION("near-zero p keeps the true array") {
    Rng rng(1);
    const PrivacyParam p{1e-12};
    for (int i = 0; i < 50; ++i) {
      KeywordReport rep = make_report("w", true, p, rng);
      REQUIRE(rep.b1 == 1);
      REQUIRE(rep.b2 == 0);
      rep = make_report("w", false, p, rng);
      REQUIRE(rep.b1 == 0);
      REQUIRE(rep.b2 == 1);
    }
  }

  SECTION("p = 1 makes each bit a fair coin regardless of input") {
    Rng rng(2);
    const PrivacyParam p{1.0};
    const int trials = 100000;
    int ones_sensitive = 0, ones_plain = 0;
    for (int i = 0; i < trials; ++i) {
      ones_sensitive += make_report("w", true, p, rng).b1;
      ones_plain += make_report("w", false, p, rng).b1;
    }
    REQUIRE(std::abs(ones_sensitive / static_cast<double>(trials) - 0.5) < 0.01);
    REQUIRE(std::abs(ones_plain / static_cast<double>(trials) - 0.5) < 0.01);
  }

  SECTION("p = 0.5 sensitive: P(b1'=1) = 0.75, P(b2'=1) = 0.25") {
    Rng rng(3);
    const PrivacyParam p{0.5};
    const int trials = 100000;
    int b1 = 0, b2 = 0;
    for (int i = 0; i < trials; ++i) {
      const KeywordReport rep = make_report("w", true, p, rng);
      b1 += rep.b1;
      b2 += rep.b2;
    }
    REQUIRE(b1 / static_cast<double>(trials) == Catch::Approx(0.75).margin(0.01));
    REQUIRE(b2 / static_cast<double>(trials) == Catch::Approx(0.25).margin(0.01));
  }

  SECTION("invalid p rejected") {
    Rng rng(1);
    REQUIRE_THROWS_AS(make_report("w", true, PrivacyParam{0.0}, rng), ArgumentError);
    REQUIRE_THROWS_AS(make_report("w", true, PrivacyParam{1.5}, rng), ArgumentError);
  }
}

TEST_CASE("one report per word is enforced") {
  Rng rng(4);
  ReportLedger ledger;
  REQUIRE_NOTHROW(ledger.report("hospital", true, PrivacyParam{0.5}, rng));
  REQUIRE_THROWS_AS(ledger.report("hospital", false, PrivacyParam{0.5}, rng),
                    ProtocolError);
  REQUIRE_NOTHROW(ledger.report("smoke", true, PrivacyParam{0.5}, rng));
  REQUIRE(ledger.has_reported("hospital"));
}

TEST_CASE("epsilon") {
  REQUIRE(epsilon(PrivacyParam{1.0}) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(epsilon(PrivacyParam{0.5}) ==
          Catch::Approx(2.0 * std::log(3.0)).margin(1e-12));
  REQUIRE(epsilon(PrivacyParam{2.0 / 3.0}) ==
          Catch::Approx(2.0 * std::log(2.0)).margin(1e-12));
  REQUIRE_THROWS_AS(epsilon(PrivacyParam{0.0}), ArgumentError);
  REQUIRE_THROWS_AS(epsilon(PrivacyParam{-0.3}), ArgumentError);

  SECTION("strictly decreasing in p") {
    double prev = epsilon(PrivacyParam{0.05});
    for (double p = 0.1; p <= 1.0001; p += 0.05) {
      const double e = epsilon(PrivacyParam{std::min(p, 1.0)});
      REQUIRE(e < prev);
      prev = e;
    }
  }
}

TEST_CASE("verify_dp enumerates the exact ratio bound") {
  SECTION("p = 0.5 gives 9") {
    REQUIRE(verify_dp(PrivacyParam{0.5}) == Catch::Approx(9.0).margin(1e-12));
  }

  SECTION("p = 1 gives uniform outputs, ratio 1") {
    REQUIRE(verify_dp(PrivacyParam{1.0}) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("matches ((2-p)/p)^2 and the theorem for p across the range") {
    for (double p = 0.1; p <= 0.91; p += 0.1) {
      const double ratio = verify_dp(PrivacyParam{p});
      const double bound = ((2.0 - p) / p) * ((2.0 - p) / p);
      REQUIRE(ratio == Catch::Approx(bound).margin(1e-12 * bound));
      REQUIRE(std::exp(epsilon(PrivacyParam{p})) >= ratio - 1e-9);
    }
  }
}

TEST_CASE("aggregate") {
  SECTION("hand-checked estimate: N=1000, n=400, p=0.5 gives 300") {
    std::vector<KeywordReport> reports;
    for (int i = 0; i < 1000; ++i) {
      reports.push_back({"word", i < 400 ? 1 : 0, 0});
    }
    auto estimates = aggregate(reports, PrivacyParam{0.5});
    REQUIRE(estimates.size() == 1);
    REQUIRE(estimates[0].total_reports == 1000);
    REQUIRE(estimates[0].ones == 400);
    REQUIRE(estimates[0].n_hat == Catch::Approx(300.0).margin(1e-12));
  }

  SECTION("p -> 0 returns the raw count") {
    std::vector<KeywordReport> reports;
    for (int i = 0; i < 100; ++i) reports.push_back({"w", i < 37 ? 1 : 0, 0});
    auto estimates = aggregate(reports, PrivacyParam{1e-12});
    REQUIRE(estimates[0].n_hat == Catch::Approx(37.0).margin(1e-6));
  }

  SECTION("estimator undefined at p = 1") {
    std::vector<KeywordReport> reports{{"w", 1, 0}};
    REQUIRE_THROWS_AS(aggregate(reports, PrivacyParam{1.0}), ArgumentError);
  }

  SECTION("estimates may leave [0, N]; no clamping") {
    std::vector<KeywordReport> reports;
    for (int i = 0; i < 100; ++i) reports.push_back({"w", 0, 1});
    auto estimates = aggregate(reports, PrivacyParam{0.5});
    REQUIRE(estimates[0].n_hat == Catch::Approx(-50.0).margin(1e-12));
  }

  SECTION("unbiased over simulated aggregations (smoke scale)") {
    const PrivacyParam p{0.5};
    const std::size_t N = 1000, n0 = 300;
    const int trials = 1000;
    Rng rng(8);
    double mean = 0.0, m2 = 0.0;
    for (int t = 0; t < trials; ++t) {
      std::vector<KeywordReport> reports;
      reports.reserve(N);
      for (std::size_t u = 0; u < N; ++u) {
        reports.push_back(make_report("w", u < n0, p, rng));
      }
      const double n_hat = aggregate(reports, p)[0].n_hat;
      const double delta = n_hat - mean;
      mean += delta / (t + 1);
      m2 += delta * (n_hat - mean);
    }
    const double stderr_mean = std::sqrt(m2 / (trials - 1) / trials);
    REQUIRE(std::abs(mean - static_cast<double>(n0)) <= 3.0 * stderr_mean);
  }
}

TEST_CASE("report_count_pmf and error_bound") {
  SECTION("PMF sums to 1 within 1e-9 across sizes") {
    for (const auto& [N, n0, p] :
         std::vector<std::tuple<std::size_t, std::size_t, double>>{
             {100, 30, 0.5}, {1000, 300, 0.5}, {1000, 0, 0.3},
             {1000, 1000, 0.7}, {5000, 1234, 0.9}}) {
      const auto pmf = report_count_pmf(N, n0, PrivacyParam{p});
      double total = 0.0;
      for (double x : pmf) total += x;
      REQUIRE(total == Catch::Approx(1.0).margin(1e-9));
    }
  }

  SECTION("near-zero p pins n to n0") {
    REQUIRE(error_bound(1000, 300, PrivacyParam{1e-12}, 1.0) ==
            Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("eps covering every outcome gives probability 1") {
    const std::size_t N = 1000;
    REQUIRE(error_bound(N, 300, PrivacyParam{0.5}, N / (1.0 - 0.5)) ==
            Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("matches Monte Carlo at smoke scale") {
    const std::size_t N = 1000, n0 = 300;
    const PrivacyParam p{0.5};
    const double eps = 30.0;
    const double exact = error_bound(N, n0, p, eps);
    std::mt19937_64 gen(17);
    std::binomial_distribution<int> x_dist(static_cast<int>(N - n0), p.p / 2.0);
    std::binomial_distribution<int> y_dist(static_cast<int>(n0), 1.0 - p.p / 2.0);
    const int trials = 200000;
    int inside = 0;
    for (int t = 0; t < trials; ++t) {
      const int n = x_dist(gen) + y_dist(gen);
      const double n_hat = (n - (p.p / 2.0) * N) / (1.0 - p.p);
      if (std::abs(n_hat - static_cast<double>(n0)) <= eps) ++inside;
    }
    REQUIRE(exact ==
            Catch::Approx(inside / static_cast<double>(trials)).margin(0.01));
  }

  SECTION("monotone in eps and in 1-p") {
    const std::size_t N = 500, n0 = 200;
    double prev = -1.0;
    for (double eps = 0.0; eps <= 60.0; eps += 5.0) {
      const double v = error_bound(N, n0, PrivacyParam{0.5}, eps);
      REQUIRE(v >= prev - 1e-12);
      prev = v;
    }
    double prev_p = 2.0;
    for (double p = 0.1; p <= 0.91; p += 0.2) {
      const double v = error_bound(N, n0, PrivacyParam{p}, 20.0);
      REQUIRE(v <= prev_p + 1e-12);  // larger p, noisier, lower coverage
      prev_p = v;
    }
  }

  SECTION("argument validation") {
    REQUIRE_THROWS_AS(error_bound(10, 11, PrivacyParam{0.5}, 1.0), ArgumentError);
    REQUIRE_THROWS_AS(error_bound(10, 5, PrivacyParam{1.0}, 1.0), ArgumentError);
    REQUIRE_THROWS_AS(error_bound(10, 5, PrivacyParam{0.5}, -1.0), ArgumentError);
  }
}
