// include/avfusion/experiment/pipeline.hpp

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

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "avfusion/align/bresenham.hpp"
#include "avfusion/decode/viterbi.hpp"
#include "avfusion/decode/wer.hpp"
#include "avfusion/experiment/config.hpp"
#include "avfusion/experiment/parallel.hpp"
#include "avfusion/fusion/dfn.hpp"
#include "avfusion/fusion/estimator.hpp"
#include "avfusion/fusion/oracle.hpp"
#include "avfusion/fusion/weighting.hpp"
#include "avfusion/reliability/model_measures.hpp"
#include "avfusion/reliability/reliability_vector.hpp"
#include "avfusion/signal/delta.hpp"
#include "avfusion/signal/image.hpp"
#include "avfusion/signal/mfcc.hpp"
#include "avfusion/signal/pitch.hpp"
#include "avfusion/signal/snr.hpp"
#include "avfusion/synth/corpus.hpp"
#include "avfusion/synth/observation.hpp"

namespace avf::experiment {

/// Everything needed to regenerate one utterance deterministically.
struct UtterancePlan {
  std::string id;
  std::string split;  // train, valid, test
  int num_words = 1;
  std::uint64_t seed = 0;  // clean rendering
  std::optional<double> snr_db;
  synth::NoiseKind noise_kind = synth::NoiseKind::White;
  std::uint64_t noise_seed = 0;
  bool distorted = false;
  std::uint64_t distortion_seed = 0;

  std::string condition() const { return condition_name(snr_db); }
};

inline Json to_json(const UtterancePlan& p) {
  Json j{{"id", p.id},
         {"split", p.split},
         {"num_words", p.num_words},
         {"seed", p.seed},
         {"condition", p.condition()},
         {"noise_kind", std::string(synth::to_string(p.noise_kind))},
         {"noise_seed", p.noise_seed},
         {"distorted", p.distorted},
         {"distortion_seed", p.distortion_seed}};
  j["snr_db"] = p.snr_db ? Json(*p.snr_db) : Json(nullptr);
  return j;
}

inline UtterancePlan plan_from_json(const Json& j) {
  UtterancePlan p;
  try {
    p.id = j.at("id").get<std::string>();
    p.split = j.at("split").get<std::string>();
    p.num_words = j.at("num_words").get<int>();
    p.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("snr_db").is_null()) p.snr_db = j.at("snr_db").get<double>();
    p.noise_kind = synth::parse_noise_kind(j.at("noise_kind").get<std::string>());
    p.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    p.distorted = j.at("distorted").get<bool>();
    p.distortion_seed = j.at("distortion_seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("corpus manifest entry: ") + e.what(), 0);
  }
  return p;
}

/// Training and validation utterances get one random condition each; every
/// clean test utterance is replayed under every test condition.
inline std::vector<UtterancePlan> plan_corpus(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "corpus"));
  const auto conditions = cfg.conditions();
  const auto& kinds = cfg.corpus.noise_kinds;
  std::vector<UtterancePlan> plans;
  auto words = [&] { return std::uniform_int_distribution<int>(cfg.corpus.min_words, cfg.corpus.max_words)(rng); };
  auto kind = [&] { return kinds[std::uniform_int_distribution<std::size_t>(0, kinds.size() - 1)(rng)]; };
  auto distorted = [&] { return std::bernoulli_distribution(cfg.corpus.distortion_prob)(rng); };

  for (const char* split : {"train", "valid"}) {
    const int n = std::string(split) == "train" ? cfg.corpus.train : cfg.corpus.valid;
    for (int i = 0; i < n; ++i) {
      UtterancePlan p;
      p.id = std::string(split) + "_" + std::to_string(i);
      p.split = split;
      p.num_words = words();
      p.seed = derive_seed(seed, p.id);
      p.snr_db = conditions[std::uniform_int_distribution<std::size_t>(0, conditions.size() - 1)(rng)];
      p.noise_kind = kind();
      p.noise_seed = derive_seed(p.seed, "noise");
      p.distorted = distorted();
      p.distortion_seed = derive_seed(p.seed, "distortion");
      plans.push_back(p);
    }
  }
  for (int i = 0; i < cfg.corpus.test; ++i) {
    UtterancePlan base;
    base.split = "test";
    base.num_words = words();
    base.seed = derive_seed(seed, "test_" + std::to_string(i));
    base.noise_kind = kind();
    base.distorted = distorted();
    base.distortion_seed = derive_seed(base.seed, "distortion");
    for (const auto& c : conditions) {
      UtterancePlan p = base;
      p.snr_db = c;
      p.id = "test_" + std::to_string(i) + "_" + condition_name(c);
      p.noise_seed = derive_seed(base.seed, "noise_" + condition_name(c));
      plans.push_back(p);
    }
  }
  return plans;
}

struct RealizedUtterance {
  synth::Utterance clean;     // undistorted video, no noise
  synth::Utterance observed;  // what the recognizer sees
};

inline RealizedUtterance realize(const UtterancePlan& p, const synth::World& world) {
  RealizedUtterance r;
  r.clean = synth::sample_utterance(world, p.num_words, p.seed, p.id);
  r.observed = r.clean;
  if (p.distorted) {
    Rng rng(p.distortion_seed);
    r.observed = synth::apply_distortion(r.observed, synth::random_distortion(r.observed.num_video_frames(), rng),
                                         derive_seed(p.distortion_seed, "confidence"));
  }
  if (p.snr_db) r.observed = synth::mix_noise(r.observed, p.noise_kind, *p.snr_db, p.noise_seed);
  return r;
}

/// Per-utterance inputs of every fusion strategy.
struct UtteranceFeatures {
  std::string id;
  std::string split;
  std::string condition;
  std::vector<int> words;
  std::vector<int> target;  // forced alignment on clean audio

  std::array<Matrix, 4> log_likelihoods;  // A, VA, VS, early integration
  reliability::AudioSignalFeatures audio;
  reliability::VideoSignalFeatures video;

  std::array<Matrix, 3> log_posteriors;  // A, VA, VS
  Matrix early;                          // early-integration log posteriors
  Matrix reliability;                    // T x R
  bool divergence_too_short = false;

  Eigen::Index num_frames() const { return log_likelihoods[0].rows(); }
  Matrix probs(StreamId s) const { return log_posteriors[static_cast<std::size_t>(index_of(s))].array().exp().matrix(); }
};

inline reliability::AudioSignalFeatures audio_signal_features(const synth::Utterance& u, const ExperimentConfig& cfg) {
  const auto mix = u.mixture();
  reliability::AudioSignalFeatures a;
  a.mfcc = signal::mfcc_frames(mix, cfg.num_mfcc);
  a.delta_mfcc = signal::delta(a.mfcc);
  if (cfg.snr_source == SnrSource::Oracle)
    a.snr_db = u.noise.empty() ? Vector::Constant(a.mfcc.rows(), signal::kSnrCapDb) : signal::oracle_frame_snr(u.clean, u.noise);
  else
    a.snr_db = signal::estimate_frame_snr(mix);
  const auto pitch = signal::pitch_nccf(mix);
  a.f0 = pitch.f0;
  a.voicing = pitch.voicing;
  a.delta_f0 = signal::delta(Matrix(pitch.f0)).col(0);
  if (a.snr_db.size() != a.mfcc.rows() || a.f0.size() != a.mfcc.rows())
    throw ShapeError("audio reliability features disagree on the frame count");
  return a;
}

inline reliability::VideoSignalFeatures video_signal_features(const synth::Utterance& u, const ExperimentConfig& cfg) {
  const int V = u.num_video_frames();
  Matrix conf(V, 1), idct(V, cfg.num_idct), bright(V, 1), blur(V, 1), rot(V, 1);
  for (int v = 0; v < V; ++v) {
    const auto& img = u.observed_video[static_cast<std::size_t>(v)];
    conf(v, 0) = u.confidence(v);
    idct.row(v) = signal::idct_features(img, cfg.num_idct).transpose();
    const auto d = signal::image_distortion(img);
    bright(v, 0) = d.brightness;
    blur(v, 0) = d.blur;
    rot(v, 0) = d.rotation;
  }
  const auto map = bresenham_map(u.num_frames(), V);
  reliability::VideoSignalFeatures out;
  out.confidence = align_stream(conf, map).col(0);
  out.idct = align_stream(idct, map);
  out.brightness = align_stream(bright, map).col(0);
  out.blur = align_stream(blur, map).col(0);
  out.rotation = align_stream(rot, map).col(0);
  return out;
}

inline UtteranceFeatures extract_raw_features(const UtterancePlan& p, const RealizedUtterance& r, const synth::World& world,
                                              const decode::DecodingGraph& graph, const ExperimentConfig& cfg) {
  UtteranceFeatures f;
  f.id = p.id;
  f.split = p.split;
  f.condition = p.condition();
  f.words = r.clean.words;
  f.log_likelihoods = {synth::stream_log_likelihoods(r.observed, world, StreamId::A),
                       synth::stream_log_likelihoods(r.observed, world, StreamId::VA),
                       synth::stream_log_likelihoods(r.observed, world, StreamId::VS),
                       synth::early_integration_log_likelihoods(r.observed, world)};
  f.audio = audio_signal_features(r.observed, cfg);
  f.video = video_signal_features(r.observed, cfg);
  const auto clean_audio = synth::compute_stream_posteriors(r.clean, world, StreamId::A);
  f.target = decode::forced_align(f.words, clean_audio.log_probs(), graph).states();
  return f;
}

/// Bayes posteriors of every stream and of the early-integration model, then
/// the reliability vector.
inline void finalize_features(UtteranceFeatures& f, const ExperimentConfig& cfg) {
  const std::array<PosteriorSequence, 3> post = {
      PosteriorSequence(StreamId::A, synth::bayes_posteriors(f.log_likelihoods[0])),
      PosteriorSequence(StreamId::VA, synth::bayes_posteriors(f.log_likelihoods[1])),
      PosteriorSequence(StreamId::VS, synth::bayes_posteriors(f.log_likelihoods[2]))};
  for (std::size_t i = 0; i < 3; ++i) f.log_posteriors[i] = post[i].log_probs();
  f.early = PosteriorSequence(StreamId::A, synth::bayes_posteriors(cfg.early_scale * f.log_likelihoods[3])).log_probs();
  const auto model = reliability::compute_model_reliability(post);
  f.divergence_too_short = model.divergence_too_short;
  const reliability::ReliabilityLayout layout(cfg.num_mfcc, cfg.num_idct);
  f.reliability = reliability::assemble_reliability_vector(layout, f.audio, f.video, model);
}

struct SeedContext {
  std::uint64_t seed = 0;
  synth::World world;
  decode::DecodingGraph graph;
};

inline SeedContext make_seed_context(const ExperimentConfig& cfg, std::uint64_t seed) {
  auto world = synth::build_world(cfg.world, derive_seed(seed, "world"));
  auto graph = decode::build_decoding_graph(world, cfg.decode.lm_scale);
  return {seed, std::move(world), std::move(graph)};
}

inline UtteranceFeatures extract_features(const UtterancePlan& p, const SeedContext& ctx, const ExperimentConfig& cfg) {
  auto f = extract_raw_features(p, realize(p, ctx.world), ctx.world, ctx.graph, cfg);
  finalize_features(f, cfg);
  return f;
}

inline std::vector<UtteranceFeatures> extract_all(const std::vector<UtterancePlan>& plans, const SeedContext& ctx,
                                                  const ExperimentConfig& cfg, int threads) {
  std::vector<UtteranceFeatures> out(plans.size());
  parallel_for(plans.size(), threads, [&](std::size_t, std::size_t i) { out[i] = extract_features(plans[i], ctx, cfg); });
  return out;
}

/// Learned fusion models of one seed.
struct Models {
  std::optional<fusion::WeightEstimator> dsw_mse, dsw_ce;
  std::optional<fusion::DfnModel> dfn_lstm, dfn_blstm;
  Json training = Json::object();  // summaries keyed by strategy
};

inline Json train_summary(const nn::TrainResult& r) {
  Json h = Json::array();
  for (const auto& c : r.history)
    h.push_back({{"step", c.step}, {"train_loss", c.train_loss}, {"valid_loss", c.valid_loss}, {"lr", c.lr}});
  return {{"best_valid", r.best_valid}, {"best_step", r.best_step}, {"steps", r.steps}, {"early_stopped", r.early_stopped},
          {"history", h}};
}

inline std::vector<fusion::EstimatorExample> estimator_examples(const std::vector<const UtteranceFeatures*>& feats,
                                                                bool with_oracle, fusion::OracleMode mode) {
  std::vector<fusion::EstimatorExample> out;
  for (const auto* f : feats) {
    fusion::EstimatorExample e;
    e.reliability = f->reliability;
    e.log_posteriors.assign(f->log_posteriors.begin(), f->log_posteriors.end());
    e.target = f->target;
    if (with_oracle)
      e.oracle = fusion::oracle_weights(e.log_posteriors, AlignmentTarget(f->target, static_cast<int>(f->log_posteriors[0].cols())),
                                        mode)
                     .weights;
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<fusion::DfnExample> dfn_examples(const std::vector<const UtteranceFeatures*>& feats) {
  std::vector<fusion::DfnExample> out;
  for (const auto* f : feats)
    out.push_back({fusion::dfn_input(f->probs(StreamId::A), f->probs(StreamId::VA), f->probs(StreamId::VS), f->reliability),
                   f->target});
  return out;
}

/// Trains the models needed by `strategies` on the train/valid splits.
inline Models train_models(const std::vector<UtteranceFeatures>& feats, const ExperimentConfig& cfg, std::uint64_t seed,
                           const std::vector<std::string>& strategies) {
  std::vector<const UtteranceFeatures*> tr, va;
  for (const auto& f : feats) {
    if (f.split == "train") tr.push_back(&f);
    if (f.split == "valid") va.push_back(&f);
  }
  if (tr.empty()) throw DomainError("no training utterances");
  auto wants = [&](const std::string& s) { return std::find(strategies.begin(), strategies.end(), s) != strategies.end(); };
  Models m;
  const int S = static_cast<int>(tr.front()->log_posteriors[0].cols());
  const int R = static_cast<int>(tr.front()->reliability.cols());

  for (auto crit : {fusion::EstimatorCriterion::Mse, fusion::EstimatorCriterion::Ce}) {
    const std::string name = "dsw-" + fusion::to_string(crit);
    if (!wants(name)) continue;
    const bool mse = crit == fusion::EstimatorCriterion::Mse;
    nn::TrainConfig tc = cfg.estimator_train;
    tc.seed = derive_seed(seed, name);
    auto [est, res] = fusion::train_weight_estimator(estimator_examples(tr, mse, cfg.oracle_mode),
                                                     estimator_examples(va, mse, cfg.oracle_mode), crit, cfg.estimator, tc);
    m.training[name] = train_summary(res);
    (mse ? m.dsw_mse : m.dsw_ce) = std::move(est);
  }
  for (auto variant : {fusion::DfnVariant::Lstm, fusion::DfnVariant::Blstm}) {
    const std::string name = "dfn-" + fusion::to_string(variant);
    if (!wants(name)) continue;
    nn::TrainConfig tc = cfg.dfn_train;
    tc.seed = derive_seed(seed, "dfn");  // both variants see the same batch order
    auto [model, res] = fusion::train_dfn(dfn_examples(tr), dfn_examples(va), S, R, variant, cfg.dfn, tc);
    m.training[name] = train_summary(res);
    (variant == fusion::DfnVariant::Lstm ? m.dfn_lstm : m.dfn_blstm) = std::move(model);
  }
  return m;
}

inline void require_model(bool present, const std::string& strategy) {
  if (!present)
    throw Error("strategy '" + strategy + "' needs a trained model checkpoint; run the 'train' subcommand first");
}

/// Frame scores (T x S) of one strategy; `models` must be private to the
/// calling thread because network inference reuses layer caches.
inline Matrix fused_scores(const std::string& strategy, const UtteranceFeatures& f, Models& models,
                           const ExperimentConfig& cfg) {
  const std::span<const Matrix> streams(f.log_posteriors.data(), f.log_posteriors.size());
  if (strategy == "ao") return f.log_posteriors[0];
  if (strategy == "va") return f.log_posteriors[1];
  if (strategy == "vs") return f.log_posteriors[2];
  if (strategy == "early") return f.early;
  if (strategy == "static") {
    RowVector lambda(3);
    lambda << cfg.static_weights[0], cfg.static_weights[1], cfg.static_weights[2];
    return fusion::static_fuse_scores(streams, lambda);
  }
  if (strategy == "oracle" || strategy == "oracle-linear") {
    const auto mode = strategy == "oracle" ? cfg.oracle_mode : fusion::OracleMode::Linear;
    const AlignmentTarget target(f.target, static_cast<int>(f.log_posteriors[0].cols()));
    return fusion::dynamic_fuse_scores(streams, fusion::oracle_weights(streams, target, mode));
  }
  if (strategy == "dsw-mse" || strategy == "dsw-ce") {
    auto& est = strategy == "dsw-mse" ? models.dsw_mse : models.dsw_ce;
    require_model(est.has_value(), strategy);
    return fusion::dynamic_fuse_scores(streams, est->predict(f.reliability));
  }
  if (strategy == "dfn-lstm" || strategy == "dfn-blstm") {
    auto& dfn = strategy == "dfn-lstm" ? models.dfn_lstm : models.dfn_blstm;
    require_model(dfn.has_value(), strategy);
    return dfn->fuse(f.probs(StreamId::A), f.probs(StreamId::VA), f.probs(StreamId::VS), f.reliability).scores();
  }
  throw DomainError("unknown strategy '" + strategy + "'");
}

inline decode::DecodeOptions decode_options(const ExperimentConfig& cfg) {
  decode::DecodeOptions o;
  o.acoustic_scale = cfg.decode.acoustic_scale;
  o.beam = cfg.decode.beam;
  return o;
}

struct UtteranceResult {
  std::string id;
  std::string condition;
  std::vector<int> hypothesis;
  decode::WerReport wer;
};

/// Decodes every test utterance under every strategy.
/// result[strategy index][test utterance index].
inline std::vector<std::vector<UtteranceResult>> evaluate_strategies(const std::vector<const UtteranceFeatures*>& test,
                                                                     const std::vector<std::string>& strategies,
                                                                     const Models& models, const SeedContext& ctx,
                                                                     const ExperimentConfig& cfg, int threads) {
  for (const auto& s : strategies)
    if (strategy_needs_model(s)) {
      const bool ok = (s == "dsw-mse" && models.dsw_mse) || (s == "dsw-ce" && models.dsw_ce) ||
                      (s == "dfn-lstm" && models.dfn_lstm) || (s == "dfn-blstm" && models.dfn_blstm);
      require_model(ok, s);
    }
  std::vector<std::vector<UtteranceResult>> out(strategies.size(), std::vector<UtteranceResult>(test.size()));
  const int workers = std::max(1, threads);
  std::vector<std::optional<Models>> local(static_cast<std::size_t>(workers));
  const auto opts = decode_options(cfg);
  parallel_for(test.size(), workers, [&](std::size_t w, std::size_t i) {
    if (!local[w]) local[w] = models;  // private copy: inference mutates layer caches
    const auto& f = *test[i];
    for (std::size_t k = 0; k < strategies.size(); ++k) {
      const auto hyp = decode::viterbi_decode(fused_scores(strategies[k], f, *local[w], cfg), ctx.graph, opts);
      out[k][i] = {f.id, f.condition, hyp.words, decode::wer(f.words, hyp.words)};
    }
  });
  return out;
}

}  // namespace avf::experiment
