// include/avfusion/synth/observation.hpp

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

// Single-modality observation models: exact Bayes posteriors under the
// world's diagonal-Gaussian likelihoods with a uniform state prior.

#include <cmath>
#include <vector>

#include "avfusion/align/bresenham.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/fusion/early.hpp"
#include "avfusion/synth/corpus.hpp"
#include "avfusion/synth/world.hpp"

namespace avf::synth {

/// Rows of log-likelihoods to floored posteriors (uniform prior).
inline Matrix bayes_posteriors(const Matrix& log_likelihood, double floor = kPosteriorFloor) {
  Matrix p(log_likelihood.rows(), log_likelihood.cols());
  for (Eigen::Index t = 0; t < p.rows(); ++t) {
    const double m = log_likelihood.row(t).maxCoeff();
    p.row(t) = (log_likelihood.row(t).array() - m).exp().matrix();
  }
  return normalize_rows(p, floor);
}

/// Noise statistics in the mel domain, used to compensate the clean audio
/// model: mean linear band energy and variance of the log band energy.
struct NoiseMelStats {
  RowVector mean_energy;
  RowVector log_var;
};

inline NoiseMelStats noise_mel_stats(const World& w, const std::vector<double>& noise) {
  const Matrix e = signal::mel_energies(noise, w.mel_config());
  NoiseMelStats st;
  st.mean_energy = e.colwise().mean();
  const Matrix loge = e.array().max(1e-12).log().matrix();
  const RowVector mu = loge.colwise().mean();
  st.log_var = (loge.rowwise() - mu).array().square().colwise().mean();
  return st;
}

/// Log-add model compensation: each clean log-mel Gaussian is combined with
/// the noise in the linear domain, and the variance is interpolated between
/// the speech and noise variances by the local speech dominance.
inline DiagonalGaussians compensate_audio_model(const DiagonalGaussians& clean, const NoiseMelStats& noise,
                                                double var_floor) {
  DiagonalGaussians g = clean;
  for (Eigen::Index s = 0; s < g.mean.rows(); ++s)
    for (Eigen::Index b = 0; b < g.mean.cols(); ++b) {
      const double speech = std::exp(clean.mean(s, b));
      const double n = noise.mean_energy(b);
      const double dominance = speech / (speech + n);
      g.mean(s, b) = std::log(speech + n);
      g.var(s, b) = std::max(dominance * dominance * clean.var(s, b) + (1 - dominance) * (1 - dominance) * noise.log_var(b),
                             var_floor);
    }
  return g;
}

/// The audio model matched to an utterance's acoustic condition.
inline DiagonalGaussians audio_model_for(const World& w, const Utterance& u) {
  if (u.noise.empty()) return w.audio_model;
  return compensate_audio_model(w.audio_model, noise_mel_stats(w, u.noise), w.config.audio_var_floor);
}

/// Per-stream observation features at the stream's native rate.
inline Matrix stream_features(const Utterance& u, const World& w, StreamId stream) {
  switch (stream) {
    case StreamId::A: {
      const auto mix = u.mixture();
      return audio_model_features(w, mix);
    }
    case StreamId::VA:
      return appearance_model_features(w, u.observed_video);
    case StreamId::VS:
      return shape_model_features(u.observed_video);
  }
  throw DomainError("unknown stream");
}

/// T x S log-likelihoods at the audio frame rate.
inline Matrix stream_log_likelihoods(const Utterance& u, const World& w, StreamId stream) {
  const Matrix feats = stream_features(u, w, stream);
  if (stream == StreamId::A) {
    if (feats.rows() != u.num_frames())
      throw ShapeError("audio feature count " + std::to_string(feats.rows()) + " does not match alignment length " +
                       std::to_string(u.num_frames()));
    return audio_model_for(w, u).log_likelihood(feats);
  }
  if (feats.rows() != u.num_video_frames())
    throw ShapeError("video feature count does not match the frame sequence");
  const auto& model = stream == StreamId::VA ? w.appearance_model : w.shape_model;
  return align_stream(model.log_likelihood(feats), bresenham_map(u.num_frames(), u.num_video_frames()));
}

inline PosteriorSequence compute_stream_posteriors(const Utterance& u, const World& w, StreamId stream) {
  return PosteriorSequence(stream, bayes_posteriors(stream_log_likelihoods(u, w, stream)));
}

/// Early integration: one Gaussian model over the concatenated
/// [A; VS; VA] feature vector, i.e. the product of the stream likelihoods.
inline Matrix early_integration_log_likelihoods(const Utterance& u, const World& w) {
  const auto map = bresenham_map(u.num_frames(), u.num_video_frames());
  const Matrix audio = stream_features(u, w, StreamId::A);
  const Matrix shape = align_stream(stream_features(u, w, StreamId::VS), map);
  const Matrix appearance = align_stream(stream_features(u, w, StreamId::VA), map);
  const Matrix joint = fusion::early_integration(audio, shape, appearance);
  const DiagonalGaussians audio_model = audio_model_for(w, u);
  const auto model = DiagonalGaussians::concat({&audio_model, &w.shape_model, &w.appearance_model});
  return model.log_likelihood(joint);
}

inline PosteriorSequence early_integration_posteriors(const Utterance& u, const World& w) {
  return PosteriorSequence(StreamId::A, bayes_posteriors(early_integration_log_likelihoods(u, w)));
}

}  // namespace avf::synth
