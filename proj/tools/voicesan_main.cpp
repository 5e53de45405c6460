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

// voicesan — batch voice sanitization: keyword substitution, randomized
// voice conversion, attack demos, private keyword aggregation, and a
// realtime-coefficient benchmark.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "voicesan/bench.hpp"
#include "voicesan/pipeline.hpp"
#include "voicesan/praka.hpp"

namespace {

using nlohmann::json;

voicesan::ConversionConfig load_or_default_config(const std::string& path) {
  if (path.empty()) return voicesan::ConversionConfig{};
  return voicesan::conversion_config_from_json(voicesan::detail::load_json_file(path));
}

void apply_config_overrides(voicesan::ConversionConfig& config,
                            const std::string& policy,
                            const std::string& direction, bool segmented,
                            bool seed_set, std::uint64_t seed) {
  if (policy == "bilinear") config.policy = voicesan::KindPolicy::BilinearOnly;
  else if (policy == "compound") config.policy = voicesan::KindPolicy::CompoundOnly;
  else if (!policy.empty()) throw voicesan::ConfigError("unknown policy: " + policy);
  if (direction == "deepen") config.band.direction = voicesan::Direction::Deepen;
  else if (direction == "sharpen") config.band.direction = voicesan::Direction::Sharpen;
  else if (!direction.empty()) throw voicesan::ConfigError("unknown direction: " + direction);
  if (segmented) config.segment_randomization = true;
  if (seed_set) config.rng_seed = seed;
}

std::string utterance_id_from_path(const std::string& path) {
  std::string leaf = path;
  const std::size_t slash = leaf.find_last_of('/');
  if (slash != std::string::npos) leaf = leaf.substr(slash + 1);
  const std::size_t dot = leaf.find_last_of('.');
  if (dot != std::string::npos) leaf = leaf.substr(0, dot);
  return leaf;
}

int cmd_sanitize(const voicesan::SanitizeManifest& manifest) {
  voicesan::SanitizeResult result = voicesan::run_sanitize(manifest);
  json out{{"input", manifest.input_path},
           {"output", manifest.output_path},
           {"substitutions", result.records.size()},
           {"segments", result.segments.size()}};
  if (result.bench_valid) out["bench"] = voicesan::to_json(result.bench);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_restore(const std::string& transcript_path, const std::string& log_path) {
  std::ifstream f(transcript_path);
  if (!f) throw voicesan::IoError("cannot open " + transcript_path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::vector<voicesan::SubstitutionRecord> records =
      voicesan::read_substitution_log(log_path);
  std::vector<std::string> warnings;
  const std::string restored =
      voicesan::restore_transcript(buf.str(), records, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  std::cout << restored;
  return 0;
}

int cmd_bench(const std::string& input, const voicesan::ConversionConfig& config,
              const std::string& keywords_path, const std::string& safewords_path) {
  const voicesan::AudioClip clip = voicesan::read_wav(input);
  if (clip.duration_s() < 1.0) {
    throw voicesan::ArgumentError("bench: clip must be at least 1 s");
  }
  std::vector<voicesan::KeywordTemplate> templates;
  std::map<std::string, voicesan::WordCategory> categories;
  voicesan::SafewordBank bank;
  if (!keywords_path.empty()) {
    voicesan::KeywordStore store;
    for (const auto& e : voicesan::load_keyword_config(keywords_path)) {
      store.enroll(e.label, voicesan::read_wav(e.clip_path));
      categories[e.label] = e.category;
    }
    templates = store.templates();
  }
  if (!safewords_path.empty()) {
    bank = voicesan::load_safeword_bank(safewords_path);
  }
  if (templates.empty() || bank.buckets.empty()) {
    voicesan::AudioClip head;
    head.sample_rate_hz = clip.sample_rate_hz;
    head.samples.assign(clip.samples.begin(),
                        clip.samples.begin() + clip.sample_rate_hz / 2);
    if (templates.empty()) {
      templates.push_back(voicesan::enroll_keyword("bench-fixture", head));
      categories["bench-fixture"] = voicesan::WordCategory::SingularNoun;
    }
    if (bank.buckets.empty()) {
      bank.buckets[voicesan::WordCategory::SingularNoun].push_back(
          {"placeholder", head});
    }
  }
  const voicesan::BenchReport report =
      voicesan::run_bench(clip, config, templates, bank, categories);
  std::cout << voicesan::to_json(report).dump(2) << "\n";
  return 0;
}

int cmd_praka_simulate(const std::string& vocab_path, int num_users,
                       const std::string& model, double p_value,
                       std::uint64_t seed) {
  voicesan::PrivacyParam p{p_value};
  p.validate();
  if (p.p >= 1.0) throw voicesan::ArgumentError("praka-simulate: need p < 1");
  if (num_users <= 0) throw voicesan::ArgumentError("praka-simulate: need users > 0");

  std::ifstream f(vocab_path);
  if (!f) throw voicesan::IoError("cannot open " + vocab_path);
  std::vector<std::string> vocab;
  std::string word;
  while (std::getline(f, word)) {
    if (!word.empty()) vocab.push_back(word);
  }
  if (vocab.empty()) throw voicesan::ConfigError(vocab_path + ": empty vocabulary");

  double frac = 0.3;
  if (model.rfind("fraction:", 0) == 0) {
    frac = std::stod(model.substr(9));
  } else if (!model.empty() && model != "fraction") {
    throw voicesan::ConfigError("unknown sensitivity model: " + model);
  }
  if (!(frac >= 0.0 && frac <= 1.0)) {
    throw voicesan::ConfigError("sensitivity fraction must be in [0,1]");
  }

  voicesan::Rng rng(seed);
  std::map<std::string, std::size_t> truth;
  std::vector<voicesan::KeywordReport> reports;
  reports.reserve(static_cast<std::size_t>(num_users) * vocab.size());
  for (const std::string& w : vocab) {
    const auto n0 = static_cast<std::size_t>(
        std::lround(frac * static_cast<double>(num_users)));
    truth[w] = n0;
    for (int u = 0; u < num_users; ++u) {
      const bool sensitive = static_cast<std::size_t>(u) < n0;
      reports.push_back(voicesan::make_report(w, sensitive, p, rng));
    }
  }

  const double eps_band = 0.05 * num_users;
  json out = json::array();
  for (const voicesan::AggregateEstimate& agg : voicesan::aggregate(reports, p)) {
    out.push_back({{"word", agg.word},
                   {"N", agg.total_reports},
                   {"n", agg.ones},
                   {"n_hat", agg.n_hat},
                   {"epsilon", voicesan::epsilon(p)},
                   {"true_count", truth[agg.word]},
                   {"error_bound_eps", eps_band},
                   {"error_bound_prob",
                    voicesan::error_bound(agg.total_reports, truth[agg.word], p,
                                          eps_band)}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_attack_demo(const std::string& mode, const std::string& input,
                    double alpha, int fft_size) {
  json out;
  if (mode == "reverse") {
    const voicesan::AudioClip clip = voicesan::read_wav(input);
    const voicesan::AudioClip converted =
        voicesan::convert_voice(clip, voicesan::WarpKind::bilinear(alpha), fft_size);
    const voicesan::AudioClip recovered =
        voicesan::attack_reverse(converted, alpha, fft_size);
    const double d_converted = voicesan::spectral_log_distance(clip, converted);
    const double d_recovered = voicesan::spectral_log_distance(clip, recovered);
    out = {{"mode", "reverse"},
           {"alpha", alpha},
           {"spectral_distance_converted", d_converted},
           {"spectral_distance_recovered", d_recovered},
           {"recovery_ratio", d_recovered / d_converted}};
  } else if (mode == "reduce") {
    const std::vector<double> grid = voicesan::make_grid(-0.3, 0.3, 1e-3);
    const double self_resid = voicesan::attack_reduce_residual(
        voicesan::WarpKind::bilinear(alpha), grid);
    const voicesan::WarpKind compound = voicesan::WarpKind::compound(0.06, 0.25);
    const double compound_resid = voicesan::attack_reduce_residual(compound, grid);
    out = {{"mode", "reduce"},
           {"grid", {{"lo", -0.3}, {"hi", 0.3}, {"step", 1e-3}}},
           {"bilinear_alpha", alpha},
           {"bilinear_residual", self_resid},
           {"compound_alpha", 0.06},
           {"compound_beta", 0.25},
           {"compound_residual", compound_resid}};
  } else {
    throw voicesan::ConfigError("attack-demo mode must be reverse or reduce");
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voicesan: voice sanitization toolkit"};
  app.require_subcommand(1);

  // sanitize
  auto* sanitize = app.add_subcommand("sanitize", "substitute keywords and convert the voice");
  std::string in_path, out_path, config_path, keywords_path, safewords_path, log_path;
  std::string policy, direction;
  bool segmented = false, bench_flag = false, confirm_hits = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  sanitize->add_option("--input", in_path, "input WAV")->required();
  sanitize->add_option("--output", out_path, "output WAV")->required();
  sanitize->add_option("--config", config_path, "conversion config JSON");
  sanitize->add_option("--keywords", keywords_path, "keyword config JSON");
  sanitize->add_option("--safewords", safewords_path, "safeword bank index JSON");
  sanitize->add_option("--log", log_path, "substitution log output (JSON lines)");
  sanitize->add_option("--policy", policy, "bilinear|compound");
  sanitize->add_option("--direction", direction, "deepen|sharpen");
  sanitize->add_flag("--segmented", segmented, "randomize per silence-split segment");
  sanitize->add_flag("--bench", bench_flag, "emit a stage-timing report");
  sanitize->add_flag("--confirm-hits", confirm_hits,
                     "treat this run's detections as confirmed hits and evolve templates");
  sanitize->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) {
    seed_set = true;
  });

  // restore
  auto* restore = app.add_subcommand("restore", "undo safeword substitution in a transcript");
  std::string transcript_path, restore_log_path;
  restore->add_option("--transcript", transcript_path, "transcript text file")->required();
  restore->add_option("--log", restore_log_path, "substitution log")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "measure per-stage realtime coefficients");
  std::string bench_input, bench_config, bench_keywords, bench_safewords;
  bench->add_option("--input", bench_input, "input WAV (>= 1 s)")->required();
  bench->add_option("--config", bench_config, "conversion config JSON");
  bench->add_option("--keywords", bench_keywords, "keyword config JSON");
  bench->add_option("--safewords", bench_safewords, "safeword bank index JSON");

  // praka-simulate
  auto* praka = app.add_subcommand("praka-simulate",
                                   "simulate private keyword aggregation");
  std::string vocab_path, model = "fraction:0.3";
  int num_users = 1000;
  double p_value = 0.5;
  std::uint64_t praka_seed = 0;
  praka->add_option("--vocab", vocab_path, "vocabulary file, one word per line")->required();
  praka->add_option("--users", num_users, "number of simulated users");
  praka->add_option("--model", model, "sensitivity model, fraction:<f>");
  praka->add_option("--p", p_value, "privacy parameter in (0,1)");
  praka->add_option("--seed", praka_seed, "RNG seed");

  // attack-demo
  auto* attack = app.add_subcommand("attack-demo", "run the reverse or reduce attack");
  std::string attack_mode, attack_input;
  double attack_alpha = 0.09;
  int attack_fft = 1024;
  attack->add_option("--mode", attack_mode, "reverse|reduce")->required();
  attack->add_option("--input", attack_input, "input WAV (reverse mode)");
  attack->add_option("--alpha", attack_alpha, "bilinear warp factor");
  attack->add_option("--fft-size", attack_fft, "FFT size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sanitize) {
      voicesan::SanitizeManifest manifest;
      manifest.input_path = in_path;
      manifest.output_path = out_path;
      manifest.config = load_or_default_config(config_path);
      apply_config_overrides(manifest.config, policy, direction, segmented,
                             seed_set, seed);
      manifest.keywords_path = keywords_path;
      manifest.safewords_path = safewords_path;
      manifest.log_path = log_path;
      manifest.bench = bench_flag;
      manifest.confirm_hits = confirm_hits;
      manifest.utterance_id = utterance_id_from_path(in_path);
      return cmd_sanitize(manifest);
    }
    if (*restore) return cmd_restore(transcript_path, restore_log_path);
    if (*bench) {
      return cmd_bench(bench_input, load_or_default_config(bench_config),
                       bench_keywords, bench_safewords);
    }
    if (*praka) {
      return cmd_praka_simulate(vocab_path, num_users, model, p_value, praka_seed);
    }
    if (*attack) {
      return cmd_attack_demo(attack_mode, attack_input, attack_alpha, attack_fft);
    }
  } catch (const voicesan::ConfigError& e) {
    std::cerr << "voicesan: configuration: " << e.what() << "\n";
    return 2;
  } catch (const voicesan::Error& e) {
    std::cerr << "voicesan: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "voicesan: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
