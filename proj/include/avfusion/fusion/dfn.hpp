// include/avfusion/fusion/dfn.hpp

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

#include <filesystem>
#include <string>
#include <vector>

#include "avfusion/fusion/weighting.hpp"
#include "avfusion/nn/normalizer.hpp"
#include "avfusion/nn/train.hpp"

namespace avf::fusion {

enum class DfnVariant { Lstm, Blstm };

inline std::string to_string(DfnVariant v) { return v == DfnVariant::Lstm ? "lstm" : "blstm"; }
inline DfnVariant parse_dfn_variant(const std::string& s) {
  if (s == "lstm") return DfnVariant::Lstm;
  if (s == "blstm") return DfnVariant::Blstm;
  throw DomainError("unknown DFN variant '" + s + "'");
}

/// Layer widths. The reference architecture is dense (8192, 4096, 1024) and
/// 1024 recurrent cells; the defaults keep the 8:4:1 shape at desk scale.
struct DfnConfig {
  std::vector<int> dense = {256, 128, 64};
  int hidden = 64;
  int recurrent_layers = 3;
  double dropout = 0.15;
};

inline int dfn_input_dim(int num_states, int reliability_dim) { return 3 * num_states + reliability_dim; }

/// Network input per frame: [p^A; p^VA; p^VS; R_t] with linear posteriors.
inline Matrix dfn_input(const Matrix& p_audio, const Matrix& p_appearance, const Matrix& p_shape, const Matrix& reliability) {
  const auto T = p_audio.rows();
  if (p_appearance.rows() != T || p_shape.rows() != T || reliability.rows() != T)
    throw ShapeError("dfn_input: stream and reliability sequences differ in length");
  if (p_appearance.cols() != p_audio.cols() || p_shape.cols() != p_audio.cols())
    throw ShapeError("dfn_input: streams differ in state count");
  Matrix x(T, 3 * p_audio.cols() + reliability.cols());
  x << p_audio, p_appearance, p_shape, reliability;
  return x;
}

inline nn::Network build_dfn_network(int num_states, int reliability_dim, DfnVariant variant, const DfnConfig& cfg) {
  std::vector<nn::LayerSpec> specs;
  for (int w : cfg.dense) {
    specs.push_back(nn::LayerSpec::dense(w));
    specs.push_back(nn::LayerSpec::relu());
    specs.push_back(nn::LayerSpec::layer_norm());
    specs.push_back(nn::LayerSpec::dropout(cfg.dropout));
  }
  for (int k = 0; k < cfg.recurrent_layers; ++k)
    specs.push_back(variant == DfnVariant::Blstm ? nn::LayerSpec::blstm(cfg.hidden) : nn::LayerSpec::lstm(cfg.hidden));
  specs.push_back(nn::LayerSpec::dense(num_states));
  specs.push_back(nn::LayerSpec::log_softmax());
  return nn::Network(dfn_input_dim(num_states, reliability_dim), specs);
}

struct DfnModel {
  nn::Network net;
  nn::Normalizer norm;
  DfnVariant variant = DfnVariant::Blstm;
  int num_states = 0;
  int reliability_dim = 0;

  FusedLogPosterior fuse(const Matrix& p_audio, const Matrix& p_appearance, const Matrix& p_shape, const Matrix& reliability) {
    if (p_audio.cols() != num_states)
      throw ShapeError("DFN was trained for " + std::to_string(num_states) + " states, posteriors have " +
                       std::to_string(p_audio.cols()));
    if (reliability.cols() != reliability_dim)
      throw ShapeError("DFN was trained for " + std::to_string(reliability_dim) + " reliability dims, got " +
                       std::to_string(reliability.cols()));
    return FusedLogPosterior(net.forward(norm.apply(dfn_input(p_audio, p_appearance, p_shape, reliability)), nn::Mode::Eval));
  }

  void save(const std::filesystem::path& dir) {
    nn::save_checkpoint(net, dir,
                        {{"model", "dfn"}, {"variant", to_string(variant)}, {"num_states", num_states},
                         {"reliability_dim", reliability_dim}},
                        {{"normalizer", norm.as_matrix()}});
  }
  static DfnModel load(const std::filesystem::path& dir) {
    auto ck = nn::load_checkpoint(dir);
    if (ck.meta.value("model", "") != "dfn") throw Error(dir.string() + " is not a DFN checkpoint");
    DfnModel m;
    m.norm = nn::Normalizer::from_matrix(ck.extra("normalizer"));
    m.variant = parse_dfn_variant(ck.meta.value("variant", "blstm"));
    m.num_states = ck.meta.value("num_states", 0);
    m.reliability_dim = ck.meta.value("reliability_dim", 0);
    m.net = std::move(ck.net);
    return m;
  }
};

/// Raw (unnormalized) DFN input with its frame targets.
struct DfnExample {
  Matrix input;
  std::vector<int> target;
};

struct DfnCeObjective {
  long frames(const DfnExample& e) const { return e.input.rows(); }
  double loss_sum(nn::Network& net, const DfnExample& e, nn::Mode mode, double g) const {
    const Matrix logp = net.forward(e.input, mode);
    double loss = 0.0;
    Matrix grad;
    if (g > 0.0) grad = Matrix::Zero(logp.rows(), logp.cols());
    for (Eigen::Index t = 0; t < logp.rows(); ++t) {
      const int s = e.target[static_cast<std::size_t>(t)];
      loss -= logp(t, s);
      if (g > 0.0) grad(t, s) = -g;
    }
    if (g > 0.0) net.backward(grad);
    return loss;
  }
};

inline std::pair<DfnModel, nn::TrainResult> train_dfn(std::vector<DfnExample> train_set, std::vector<DfnExample> valid_set,
                                                      int num_states, int reliability_dim, DfnVariant variant,
                                                      const DfnConfig& cfg, const nn::TrainConfig& tc) {
  if (train_set.empty()) throw DomainError("train_dfn: empty training split");
  const int in = dfn_input_dim(num_states, reliability_dim);
  std::vector<const Matrix*> xs;
  for (const auto& e : train_set) {
    if (e.input.cols() != in) throw ShapeError("train_dfn: example width does not match 3*S + R");
    xs.push_back(&e.input);
  }
  DfnModel m;
  m.variant = variant;
  m.num_states = num_states;
  m.reliability_dim = reliability_dim;
  m.norm = nn::Normalizer::fit(xs);
  for (auto* set : {&train_set, &valid_set})
    for (auto& e : *set) e.input = m.norm.apply(e.input);
  m.net = build_dfn_network(num_states, reliability_dim, variant, cfg);
  m.net.init(derive_seed(tc.seed, "dfn-" + to_string(variant)));
  auto res = nn::train(m.net, train_set, valid_set, tc, DfnCeObjective{});
  return {std::move(m), std::move(res)};
}

}  // namespace avf::fusion
