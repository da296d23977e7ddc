// include/avfusion/experiment/sweep.hpp

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

#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "avfusion/experiment/pipeline.hpp"

namespace avf::experiment {

/// Corpus-level WER of every (strategy, condition) cell for one seed.
struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<std::string> strategies;
  std::vector<std::string> conditions;
  Matrix wer;  // strategies x conditions, fractions
  Json training = Json::object();
  Json utterances = Json::array();
};

inline SeedResult score_seed(std::uint64_t seed, const std::vector<std::string>& strategies,
                             const std::vector<std::string>& conditions,
                             const std::vector<std::vector<UtteranceResult>>& results, const Json& training,
                             const synth::World& world) {
  SeedResult r;
  r.seed = seed;
  r.strategies = strategies;
  r.conditions = conditions;
  r.training = training;
  r.wer = Matrix::Zero(static_cast<Eigen::Index>(strategies.size()), static_cast<Eigen::Index>(conditions.size()));
  for (std::size_t k = 0; k < strategies.size(); ++k)
    for (std::size_t c = 0; c < conditions.size(); ++c) {
      decode::WerReport total;
      for (const auto& u : results[k])
        if (u.condition == conditions[c]) total += u.wer;
      r.wer(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = total.wer();
    }
  for (std::size_t k = 0; k < strategies.size(); ++k)
    for (const auto& u : results[k]) {
      std::vector<std::string> hyp;
      for (int w : u.hypothesis) hyp.push_back(world.vocabulary[static_cast<std::size_t>(w)]);
      r.utterances.push_back({{"seed", seed},
                              {"strategy", strategies[k]},
                              {"id", u.id},
                              {"condition", u.condition},
                              {"hypothesis", hyp},
                              {"substitutions", u.wer.substitutions},
                              {"deletions", u.wer.deletions},
                              {"insertions", u.wer.insertions},
                              {"reference_length", u.wer.reference_length}});
    }
  return r;
}

/// Full in-memory run of one seed: synthesize, extract, train, decode. The
/// trained models are handed back through `models_out` when given.
inline SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed, int threads, Models* models_out = nullptr) {
  const auto ctx = make_seed_context(cfg, seed);
  const auto plans = plan_corpus(cfg, seed);
  const auto feats = extract_all(plans, ctx, cfg, threads);
  const Models models = train_models(feats, cfg, seed, cfg.strategies);
  std::vector<const UtteranceFeatures*> test;
  for (const auto& f : feats)
    if (f.split == "test") test.push_back(&f);
  const auto results = evaluate_strategies(test, cfg.strategies, models, ctx, cfg, threads);
  std::vector<std::string> conditions;
  for (const auto& c : cfg.conditions()) conditions.push_back(condition_name(c));
  auto r = score_seed(seed, cfg.strategies, conditions, results, models.training, ctx.world);
  if (models_out) *models_out = models;
  return r;
}

/// Mean over seeds with a normal-approximation 95% interval half-width.
struct SweepTable {
  std::vector<std::string> strategies;
  std::vector<std::string> columns;  // conditions followed by "avg"
  Matrix mean;                       // fractions
  Matrix ci;
  std::size_t num_seeds = 0;

  double at(const std::string& strategy, const std::string& column) const {
    for (std::size_t k = 0; k < strategies.size(); ++k)
      for (std::size_t c = 0; c < columns.size(); ++c)
        if (strategies[k] == strategy && columns[c] == column)
          return mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    throw Error("no result for strategy '" + strategy + "' at '" + column + "'");
  }
};

inline SweepTable aggregate(const std::vector<SeedResult>& seeds) {
  if (seeds.empty()) throw DomainError("aggregate: no seed results");
  SweepTable t;
  t.strategies = seeds.front().strategies;
  t.columns = seeds.front().conditions;
  t.columns.push_back("avg");
  t.num_seeds = seeds.size();
  const auto K = static_cast<Eigen::Index>(t.strategies.size());
  const auto C = static_cast<Eigen::Index>(t.columns.size());
  t.mean = Matrix::Zero(K, C);
  t.ci = Matrix::Zero(K, C);
  for (Eigen::Index k = 0; k < K; ++k)
    for (Eigen::Index c = 0; c < C; ++c) {
      std::vector<double> v;
      for (const auto& s : seeds) v.push_back(c + 1 < C ? s.wer(k, c) : s.wer.row(k).mean());
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - m) * (x - m);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      t.mean(k, c) = m;
      t.ci(k, c) = 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
    }
  return t;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// Rows are strategies, columns the test conditions plus the average; WER in %.
inline std::string results_csv(const SweepTable& t) {
  std::ostringstream out;
  out << "strategy";
  for (const auto& c : t.columns) out << "," << c;
  out << "\n";
  for (std::size_t k = 0; k < t.strategies.size(); ++k) {
    out << t.strategies[k];
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      out << "," << format_fixed(100.0 * t.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)), 2);
    out << "\n";
  }
  return out.str();
}

/// Long format for plotting: strategy, snr, wer_mean, wer_ci (WER in %).
inline std::string wer_vs_snr_csv(const SweepTable& t) {
  std::ostringstream out;
  out << "strategy,snr,wer_mean,wer_ci\n";
  for (std::size_t k = 0; k < t.strategies.size(); ++k)
    for (std::size_t c = 0; c + 1 < t.columns.size(); ++c)
      out << t.strategies[k] << "," << t.columns[c] << ","
          << format_fixed(100.0 * t.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)), 3) << ","
          << format_fixed(100.0 * t.ci(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)), 3) << "\n";
  return out.str();
}

/// Fixed-width text rendering of the table.
inline std::string results_text(const SweepTable& t) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-14s", "WER (%)");
  out << buf;
  for (const auto& c : t.columns) {
    std::snprintf(buf, sizeof buf, "%8s", c.c_str());
    out << buf;
  }
  out << "\n";
  for (std::size_t k = 0; k < t.strategies.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%-14s", t.strategies[k].c_str());
    out << buf;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%8.2f", 100.0 * t.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)));
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

inline Json seed_result_json(const SeedResult& s) {
  Json w = Json::object();
  for (std::size_t k = 0; k < s.strategies.size(); ++k) {
    Json row = Json::object();
    for (std::size_t c = 0; c < s.conditions.size(); ++c)
      row[s.conditions[c]] = s.wer(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    w[s.strategies[k]] = row;
  }
  return {{"seed", s.seed}, {"strategies", s.strategies}, {"conditions", s.conditions},
          {"wer", w},         {"training", s.training},     {"utterances", s.utterances}};
}

inline Json results_json(const SweepTable& t, const std::vector<SeedResult>& seeds) {
  Json j;
  j["strategies"] = t.strategies;
  j["columns"] = t.columns;
  j["num_seeds"] = t.num_seeds;
  Json mean = Json::object(), ci = Json::object();
  for (std::size_t k = 0; k < t.strategies.size(); ++k) {
    Json mrow = Json::object(), crow = Json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      mrow[t.columns[c]] = t.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
      crow[t.columns[c]] = t.ci(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c));
    }
    mean[t.strategies[k]] = mrow;
    ci[t.strategies[k]] = crow;
  }
  j["wer_mean"] = mean;
  j["wer_ci"] = ci;
  Json per_seed = Json::array();
  for (const auto& s : seeds) per_seed.push_back(seed_result_json(s));
  j["seeds"] = per_seed;
  return j;
}

inline SweepTable table_from_json(const Json& j) {
  SweepTable t;
  try {
    t.strategies = j.at("strategies").get<std::vector<std::string>>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    t.num_seeds = j.at("num_seeds").get<std::size_t>();
    t.mean.resize(static_cast<Eigen::Index>(t.strategies.size()), static_cast<Eigen::Index>(t.columns.size()));
    t.ci.resizeLike(t.mean);
    for (std::size_t k = 0; k < t.strategies.size(); ++k)
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        t.mean(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
            j.at("wer_mean").at(t.strategies[k]).at(t.columns[c]).get<double>();
        t.ci(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
            j.at("wer_ci").at(t.strategies[k]).at(t.columns[c]).get<double>();
      }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("results file: ") + e.what(), 0);
  }
  return t;
}

}  // namespace avf::experiment
