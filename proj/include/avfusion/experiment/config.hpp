// include/avfusion/experiment/config.hpp

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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avfusion/fusion/dfn.hpp"
#include "avfusion/fusion/estimator.hpp"
#include "avfusion/fusion/oracle.hpp"
#include "avfusion/nn/train.hpp"
#include "avfusion/synth/noise.hpp"
#include "avfusion/synth/world.hpp"

namespace avf::experiment {

inline const std::vector<std::string>& known_strategies() {
  static const std::vector<std::string> names = {"ao",     "va",     "vs",            "early",    "static",   "dsw-mse",
                                                 "dsw-ce", "oracle", "oracle-linear", "dfn-lstm", "dfn-blstm"};
  return names;
}

inline bool strategy_needs_model(const std::string& s) {
  return s == "dsw-mse" || s == "dsw-ce" || s == "dfn-lstm" || s == "dfn-blstm";
}

struct CorpusConfig {
  int train = 150;
  int valid = 40;
  int test = 25;
  int min_words = 3;
  int max_words = 5;
  std::vector<synth::NoiseKind> noise_kinds = {synth::NoiseKind::White, synth::NoiseKind::Babble};
  double distortion_prob = 0.5;
};

struct DecodeConfig {
  double lm_scale = 1.0;
  double acoustic_scale = 1.0;
  double beam = std::numeric_limits<double>::infinity();
};

enum class SnrSource { Oracle, Estimated };

struct ExperimentConfig {
  synth::WorldConfig world;
  CorpusConfig corpus;
  std::vector<double> snr_grid = {-9, -6, -3, 0, 3, 6, 9};
  bool include_clean = true;
  std::vector<std::string> strategies = known_strategies();
  std::vector<double> static_weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  fusion::OracleMode oracle_mode = fusion::OracleMode::Renormalized;
  /// Exponent on the joint early-integration likelihood; 1/3 makes it the
  /// geometric mean of the three stream likelihoods.
  double early_scale = 1.0 / 3.0;
  int num_mfcc = 5;
  int num_idct = 5;
  SnrSource snr_source = SnrSource::Oracle;
  fusion::DfnConfig dfn;
  fusion::EstimatorConfig estimator;
  nn::TrainConfig dfn_train;
  nn::TrainConfig estimator_train;
  DecodeConfig decode;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";

  /// Test conditions in table order: the SNR grid, then "clean".
  std::vector<std::optional<double>> conditions() const {
    std::vector<std::optional<double>> c(snr_grid.begin(), snr_grid.end());
    if (include_clean) c.push_back(std::nullopt);
    return c;
  }
};

inline std::string condition_name(const std::optional<double>& snr) {
  if (!snr) return "clean";
  return std::to_string(static_cast<int>(std::lround(*snr)));
}

inline ExperimentConfig parse_experiment_config(const Json& j) {
  ExperimentConfig c;
  JsonReader r(j, "");
  if (const Json* w = r.child("world")) c.world = synth::parse_world_config(*w, "world");

  if (const Json* cj = r.child("corpus")) {
    JsonReader cr(*cj, "corpus");
    cr.get("train", c.corpus.train);
    cr.get("valid", c.corpus.valid);
    cr.get("test", c.corpus.test);
    cr.get("min_words", c.corpus.min_words);
    cr.get("max_words", c.corpus.max_words);
    cr.get("distortion_prob", c.corpus.distortion_prob);
    std::vector<std::string> kinds;
    cr.get("noise_kinds", kinds);
    if (!kinds.empty()) {
      c.corpus.noise_kinds.clear();
      for (const auto& k : kinds) {
        try {
          c.corpus.noise_kinds.push_back(synth::parse_noise_kind(k));
        } catch (const Error& e) {
          throw ConfigError("corpus.noise_kinds", e.what());
        }
      }
    } else if (cr.has("noise_kinds")) {
      throw ConfigError("corpus.noise_kinds", "must list at least one noise kind");
    }
    cr.finish();
    if (c.corpus.train < 1) throw ConfigError("corpus.train", "must be >= 1");
    if (c.corpus.valid < 0) throw ConfigError("corpus.valid", "must be >= 0");
    if (c.corpus.test < 1) throw ConfigError("corpus.test", "must be >= 1");
    if (c.corpus.min_words < 1 || c.corpus.max_words < c.corpus.min_words)
      throw ConfigError("corpus.min_words", "need 1 <= min_words <= max_words");
    if (!(c.corpus.distortion_prob >= 0.0 && c.corpus.distortion_prob <= 1.0))
      throw ConfigError("corpus.distortion_prob", "must be in [0, 1]");
  }

  r.get("snr_grid", c.snr_grid);
  r.get("include_clean", c.include_clean);
  if (c.snr_grid.empty() && !c.include_clean) throw ConfigError("snr_grid", "no test conditions");

  r.get("strategies", c.strategies);
  if (c.strategies.empty()) throw ConfigError("strategies", "must list at least one strategy");
  for (const auto& s : c.strategies)
    if (std::find(known_strategies().begin(), known_strategies().end(), s) == known_strategies().end())
      throw ConfigError("strategies", "unknown strategy '" + s + "'");

  r.get("static_weights", c.static_weights);
  if (c.static_weights.size() != 3) throw ConfigError("static_weights", "must have three entries (A, VA, VS)");

  std::string mode = fusion::to_string(c.oracle_mode);
  r.get("oracle_mode", mode);
  try {
    c.oracle_mode = fusion::parse_oracle_mode(mode);
  } catch (const Error& e) {
    throw ConfigError("oracle_mode", e.what());
  }

  r.get("early_scale", c.early_scale);
  if (!(c.early_scale > 0.0)) throw ConfigError("early_scale", "must be > 0");

  if (const Json* rj = r.child("reliability")) {
    JsonReader rr(*rj, "reliability");
    rr.get("num_mfcc", c.num_mfcc);
    rr.get("num_idct", c.num_idct);
    rr.finish();
    if (c.num_mfcc < 1 || c.num_idct < 1) throw ConfigError("reliability", "coefficient counts must be >= 1");
  }

  std::string snr_source = "oracle";
  r.get("snr_source", snr_source);
  if (snr_source == "oracle")
    c.snr_source = SnrSource::Oracle;
  else if (snr_source == "estimated")
    c.snr_source = SnrSource::Estimated;
  else
    throw ConfigError("snr_source", "must be 'oracle' or 'estimated'");

  if (const Json* dj = r.child("dfn")) {
    JsonReader dr(*dj, "dfn");
    dr.get("dense", c.dfn.dense);
    dr.get("hidden", c.dfn.hidden);
    dr.get("recurrent_layers", c.dfn.recurrent_layers);
    dr.get("dropout", c.dfn.dropout);
    dr.finish();
    if (c.dfn.dense.empty() || std::any_of(c.dfn.dense.begin(), c.dfn.dense.end(), [](int w) { return w < 1; }))
      throw ConfigError("dfn.dense", "needs positive widths");
    if (c.dfn.hidden < 1) throw ConfigError("dfn.hidden", "must be >= 1");
    if (c.dfn.recurrent_layers < 1) throw ConfigError("dfn.recurrent_layers", "must be >= 1");
    if (!(c.dfn.dropout >= 0.0 && c.dfn.dropout < 1.0)) throw ConfigError("dfn.dropout", "must be in [0, 1)");
  }
  if (const Json* ej = r.child("estimator")) {
    JsonReader er(*ej, "estimator");
    er.get("hidden", c.estimator.hidden);
    er.finish();
    if (std::any_of(c.estimator.hidden.begin(), c.estimator.hidden.end(), [](int w) { return w < 1; }))
      throw ConfigError("estimator.hidden", "needs positive widths");
  }
  if (const Json* tj = r.child("train")) {
    JsonReader tr(*tj, "train");
    if (const Json* d = tr.child("dfn")) c.dfn_train = nn::parse_train_config(*d, "train.dfn");
    if (const Json* e = tr.child("estimator")) c.estimator_train = nn::parse_train_config(*e, "train.estimator");
    tr.finish();
  }
  if (const Json* dj = r.child("decode")) {
    JsonReader dr(*dj, "decode");
    dr.get("lm_scale", c.decode.lm_scale);
    dr.get("acoustic_scale", c.decode.acoustic_scale);
    if (dr.has("beam")) {
      const Json* b = dr.child("beam");
      if (!b->is_null()) {
        if (!b->is_number()) throw ConfigError("decode.beam", "must be a number or null");
        c.decode.beam = b->get<double>();
      }
    }
    dr.finish();
    if (!(c.decode.lm_scale >= 0.0)) throw ConfigError("decode.lm_scale", "must be >= 0");
    if (!(c.decode.acoustic_scale > 0.0)) throw ConfigError("decode.acoustic_scale", "must be > 0");
    if (!(c.decode.beam > 0.0)) throw ConfigError("decode.beam", "must be > 0");
  }
  r.get("seeds", c.seeds);
  if (c.seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  r.get("output_dir", c.output_dir);
  r.finish();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_experiment_config(j);
}

}  // namespace avf::experiment
