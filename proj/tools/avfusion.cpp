// tools/avfusion.cpp

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line driver for the staged pipeline and the one-shot sweep.
//
//   avfusion synth    --config C [--seed N] [--snr-grid -9,0,9]
//   avfusion extract  --config C [--model-based]
//   avfusion train    --config C
//   avfusion fuse     --config C [--strategy S] [--snr X]
//   avfusion decode   --config C [--strategy S] [--snr X]
//   avfusion evaluate --config C [--strategy S]
//   avfusion report   --config C
//   avfusion sweep    --config C
//
// Exit status: 0 success, 1 runtime failure, 2 configuration or usage error.
// AVFUSION_OUT and AVFUSION_THREADS override the output directory and the
// thread count when the corresponding flag is absent.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "avfusion/experiment/artifacts.hpp"

namespace {

using namespace avf;
using namespace avf::experiment;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string strategy;
  std::string snr;
  std::string snr_grid;
  bool model_based = false;
};

struct Context {
  ExperimentConfig cfg;
  fs::path out;
  int threads = 1;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> strategies;
  std::optional<std::string> condition;  // --snr filter on test utterances
};

int parse_int_env(const char* name, int fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw ConfigError(name, "not an integer: '" + std::string(v) + "'");
  }
}

double parse_snr_value(const std::string& s, const std::string& flag) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(flag, "not a number: '" + s + "'");
  }
}

Context make_context(const Flags& f) {
  Context c;
  c.cfg = load_experiment_config(f.config);
  if (!f.out.empty())
    c.out = f.out;
  else if (const char* env = std::getenv("AVFUSION_OUT"); env && *env)
    c.out = env;
  else
    c.out = c.cfg.output_dir;
  c.threads = f.threads > 0 ? f.threads : parse_int_env("AVFUSION_THREADS", 1);
  if (c.threads < 1) throw ConfigError("--threads", "must be >= 1");
  c.seeds = f.seed ? std::vector<std::uint64_t>{*f.seed} : c.cfg.seeds;
  if (f.strategy.empty()) {
    c.strategies = c.cfg.strategies;
  } else {
    const auto& known = known_strategies();
    if (std::find(known.begin(), known.end(), f.strategy) == known.end())
      throw ConfigError("--strategy", "unknown strategy '" + f.strategy + "'");
    c.strategies = {f.strategy};
  }
  if (!f.snr.empty())
    c.condition = f.snr == "clean" ? std::string("clean") : condition_name(parse_snr_value(f.snr, "--snr"));
  if (!f.snr_grid.empty()) {
    std::vector<double> grid;
    std::stringstream ss(f.snr_grid);
    for (std::string tok; std::getline(ss, tok, ',');) grid.push_back(parse_snr_value(tok, "--snr-grid"));
    if (grid.empty()) throw ConfigError("--snr-grid", "empty list");
    c.cfg.snr_grid = grid;
  }
  return c;
}

bool keep_condition(const Context& c, const std::string& condition) { return !c.condition || *c.condition == condition; }

void log(const std::string& msg) { std::cerr << "avfusion: " << msg << "\n"; }

void run_synth(const Context& c) {
  for (auto seed : c.seeds) {
    write_corpus(c.cfg, seed, seed_dir(c.out, seed), c.threads);
    log("seed " + std::to_string(seed) + ": corpus written to " + seed_dir(c.out, seed).string());
  }
}

void run_extract(const Context& c, bool model_based) {
  for (auto seed : c.seeds) {
    const auto dir = seed_dir(c.out, seed);
    const auto plans = read_corpus_plans(dir);
    const auto ctx = make_seed_context(c.cfg, seed);
    write_features(dir, extract_all(plans, ctx, c.cfg, c.threads), model_based);
    log("seed " + std::to_string(seed) + ": features for " + std::to_string(plans.size()) + " utterances");
  }
}

void run_train(const Context& c) {
  for (auto seed : c.seeds) {
    const auto dir = seed_dir(c.out, seed);
    const auto feats = read_features(dir, [](const Json& e) { return e.at("split") != "test"; });
    write_models(dir / "models", train_models(feats, c.cfg, seed, c.strategies));
    log("seed " + std::to_string(seed) + ": models written to " + (dir / "models").string());
  }
}

std::vector<UtteranceFeatures> test_features(const Context& c, const fs::path& dir) {
  return read_features(dir, [&](const Json& e) {
    return e.at("split") == "test" && keep_condition(c, e.at("condition").get<std::string>());
  });
}

void run_fuse(const Context& c) {
  for (auto seed : c.seeds) {
    const auto dir = seed_dir(c.out, seed);
    const auto feats = test_features(c, dir);
    for (const auto& s : c.strategies) {
      const Models models = read_models(dir / "models", {s});
      std::vector<std::optional<Models>> local(static_cast<std::size_t>(c.threads));
      parallel_for(feats.size(), c.threads, [&](std::size_t w, std::size_t i) {
        if (!local[w]) local[w] = models;
        io::write_matrix(dir / "fused" / s / (feats[i].id + ".avpf"), fused_scores(s, feats[i], *local[w], c.cfg));
      });
      log("seed " + std::to_string(seed) + ": fused " + std::to_string(feats.size()) + " utterances with " + s);
    }
  }
}

void run_decode(const Context& c) {
  for (auto seed : c.seeds) {
    const auto dir = seed_dir(c.out, seed);
    const auto feats = test_features(c, dir);
    const auto ctx = make_seed_context(c.cfg, seed);
    const auto opts = decode_options(c.cfg);
    for (const auto& s : c.strategies) {
      std::vector<Json> entries(feats.size());
      for (const auto& f : feats) require_artifact(dir / "fused" / s / (f.id + ".avpf"), "fuse");
      parallel_for(feats.size(), c.threads, [&](std::size_t, std::size_t i) {
        const auto& f = feats[i];
        const auto hyp = decode::viterbi_decode(io::read_matrix(dir / "fused" / s / (f.id + ".avpf")), ctx.graph, opts);
        entries[i] = decoded_json({f.id, f.condition, hyp.words, decode::wer(f.words, hyp.words)}, ctx.world);
      });
      write_json_file(dir / "decoded" / (s + ".json"), {{"strategy", s}, {"utterances", entries}});
      log("seed " + std::to_string(seed) + ": decoded " + std::to_string(feats.size()) + " utterances with " + s);
    }
  }
}

SeedResult evaluate_seed(const Context& c, std::uint64_t seed) {
  const auto dir = seed_dir(c.out, seed);
  std::vector<std::vector<UtteranceResult>> results;
  std::vector<std::string> present;
  for (const auto& s : c.strategies) {
    const auto path = dir / "decoded" / (s + ".json");
    require_artifact(path, "decode");
    std::vector<UtteranceResult> rs;
    const Json decoded = read_json_file(path);
    for (const auto& e : decoded.at("utterances")) {
      rs.push_back(decoded_from_json(e));
      if (std::find(present.begin(), present.end(), rs.back().condition) == present.end())
        present.push_back(rs.back().condition);
    }
    results.push_back(std::move(rs));
  }
  std::vector<std::string> conditions;
  for (const auto& cond : c.cfg.conditions())
    if (std::find(present.begin(), present.end(), condition_name(cond)) != present.end())
      conditions.push_back(condition_name(cond));
  Json training = Json::object();
  if (fs::exists(dir / "models" / "training.json")) training = read_json_file(dir / "models" / "training.json");
  return score_seed(seed, c.strategies, conditions, results, training, make_seed_context(c.cfg, seed).world);
}

void run_evaluate(const Context& c) {
  for (auto seed : c.seeds) {
    const auto r = evaluate_seed(c, seed);
    write_json_file(seed_dir(c.out, seed) / "evaluation.json", seed_result_json(r));
    std::cout << "seed " << seed << "\n" << results_text(aggregate({r}));
  }
}

void run_report(const Context& c) {
  std::vector<SeedResult> seeds;
  for (auto seed : c.seeds) {
    const auto path = seed_dir(c.out, seed) / "evaluation.json";
    require_artifact(path, "evaluate");
    seeds.push_back(seed_result_from_json(read_json_file(path)));
  }
  std::cout << results_text(write_report(c.out, seeds));
}

void run_sweep(const Context& c) {
  ExperimentConfig cfg = c.cfg;
  cfg.strategies = c.strategies;
  std::vector<SeedResult> seeds;
  for (auto seed : c.seeds) {
    Models models;
    seeds.push_back(run_seed(cfg, seed, c.threads, &models));
    write_models(seed_dir(c.out, seed) / "models", models);
    write_json_file(seed_dir(c.out, seed) / "evaluation.json", seed_result_json(seeds.back()));
    log("seed " + std::to_string(seed) + " done");
  }
  std::cout << results_text(write_report(c.out, seeds));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability-guided audio-visual stream fusion on a synthetic corpus"};
  app.require_subcommand(1, 1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", f.out, "output directory (default: config output_dir)");
    sub->add_option("--seed", f.seed, "run a single seed instead of the configured list");
    sub->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
    return sub;
  };
  auto* synth = common(app.add_subcommand("synth", "render the corpus: manifest, WAV audio, raw frames"));
  synth->add_option("--snr-grid", f.snr_grid, "comma-separated test SNRs in dB, overriding the config");
  auto* extract = common(app.add_subcommand("extract", "stream posteriors and reliability vectors"));
  extract->add_flag("--model-based", f.model_based, "also write the model-based reliability block");
  auto* train = common(app.add_subcommand("train", "train weight estimators and decision fusion networks"));
  auto* fuse = common(app.add_subcommand("fuse", "fused frame scores of the test utterances"));
  auto* decode = common(app.add_subcommand("decode", "Viterbi decoding of fused scores"));
  auto* evaluate = common(app.add_subcommand("evaluate", "word error rates of decoded test utterances"));
  auto* report = common(app.add_subcommand("report", "aggregate seeds into results tables"));
  auto* sweep = common(app.add_subcommand("sweep", "run every stage in memory for all seeds"));
  for (auto* sub : {fuse, decode, evaluate, sweep})
    sub->add_option("--strategy", f.strategy, "restrict to one fusion strategy");
  for (auto* sub : {fuse, decode})
    sub->add_option("--snr", f.snr, "restrict to one test condition (dB value or 'clean')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Context c = make_context(f);
    if (synth->parsed()) run_synth(c);
    if (extract->parsed()) run_extract(c, f.model_based);
    if (train->parsed()) run_train(c);
    if (fuse->parsed()) run_fuse(c);
    if (decode->parsed()) run_decode(c);
    if (evaluate->parsed()) run_evaluate(c);
    if (report->parsed()) run_report(c);
    if (sweep->parsed()) run_sweep(c);
  } catch (const ConfigError& e) {
    std::cerr << "avfusion: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "avfusion: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
