// include/avfusion/fusion/estimator.hpp

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
#include <filesystem>
#include <string>
#include <vector>

#include "avfusion/fusion/weighting.hpp"
#include "avfusion/nn/normalizer.hpp"
#include "avfusion/nn/train.hpp"

namespace avf::fusion {

enum class EstimatorCriterion { Mse, Ce };

inline std::string to_string(EstimatorCriterion c) { return c == EstimatorCriterion::Mse ? "mse" : "ce"; }

/// Feedforward map from a reliability vector to per-frame stream weights on
/// the simplex (softmax output).
struct WeightEstimator {
  nn::Network net;
  nn::Normalizer norm;
  EstimatorCriterion criterion = EstimatorCriterion::Mse;

  int reliability_dim() const { return net.input_dim(); }
  int num_streams() const { return net.output_dim(); }

  StreamWeights predict(const Matrix& reliability) {
    if (reliability.cols() != reliability_dim())
      throw ShapeError("weight estimator expects " + std::to_string(reliability_dim()) + " reliability dims, got " +
                       std::to_string(reliability.cols()));
    return {net.forward(norm.apply(reliability), nn::Mode::Eval)};
  }

  void save(const std::filesystem::path& dir) {
    nn::save_checkpoint(net, dir, {{"model", "weight_estimator"}, {"criterion", to_string(criterion)}},
                        {{"normalizer", norm.as_matrix()}});
  }
  static WeightEstimator load(const std::filesystem::path& dir) {
    auto ck = nn::load_checkpoint(dir);
    if (ck.meta.value("model", "") != "weight_estimator") throw Error(dir.string() + " is not a weight estimator checkpoint");
    WeightEstimator e{std::move(ck.net), nn::Normalizer::from_matrix(ck.extra("normalizer")),
                      ck.meta.value("criterion", "mse") == "ce" ? EstimatorCriterion::Ce : EstimatorCriterion::Mse};
    return e;
  }
};

struct EstimatorConfig {
  std::vector<int> hidden = {64, 32};
};

inline nn::Network build_estimator_network(int reliability_dim, int num_streams, const EstimatorConfig& cfg) {
  std::vector<nn::LayerSpec> specs;
  for (int h : cfg.hidden) {
    specs.push_back(nn::LayerSpec::dense(h));
    specs.push_back(nn::LayerSpec::relu());
  }
  specs.push_back(nn::LayerSpec::dense(num_streams));
  specs.push_back(nn::LayerSpec::softmax());
  return nn::Network(reliability_dim, specs);
}

/// One training utterance for the estimator. `reliability` is already
/// normalized; `oracle` is required for the MSE criterion only.
struct EstimatorExample {
  Matrix reliability;
  std::vector<Matrix> log_posteriors;
  std::vector<int> target;
  Matrix oracle;
};

/// Regresses the oracle weights (mean squared element error per frame).
struct MseWeightObjective {
  long frames(const EstimatorExample& e) const { return e.reliability.rows(); }
  double loss_sum(nn::Network& net, const EstimatorExample& e, nn::Mode mode, double g) const {
    if (e.oracle.rows() != e.reliability.rows()) throw DomainError("MSE weight training needs oracle targets for every frame");
    const Matrix y = net.forward(e.reliability, mode);
    const Matrix diff = y - e.oracle;
    const double m = static_cast<double>(y.cols());
    if (g > 0.0) net.backward((2.0 * g / m) * diff);
    return diff.squaredNorm() / m;
  }
};

/// Cross-entropy of the renormalized dynamically fused posterior.
struct CeWeightObjective {
  long frames(const EstimatorExample& e) const { return e.reliability.rows(); }
  double loss_sum(nn::Network& net, const EstimatorExample& e, nn::Mode mode, double g) const {
    const Matrix lambda = net.forward(e.reliability, mode);
    const Matrix logq = renormalize_rows(dynamic_fuse_scores(e.log_posteriors, StreamWeights{lambda}));
    double loss = 0.0;
    for (Eigen::Index t = 0; t < logq.rows(); ++t) loss -= logq(t, e.target[static_cast<std::size_t>(t)]);
    if (g > 0.0) {
      Matrix dz = logq.array().exp().matrix();
      for (Eigen::Index t = 0; t < dz.rows(); ++t) dz(t, e.target[static_cast<std::size_t>(t)]) -= 1.0;
      Matrix dlambda(lambda.rows(), lambda.cols());
      for (Eigen::Index i = 0; i < lambda.cols(); ++i)
        dlambda.col(i) = (dz.array() * e.log_posteriors[static_cast<std::size_t>(i)].array()).rowwise().sum().matrix();
      net.backward(g * dlambda);
    }
    return loss;
  }
};

/// Trains a fresh estimator. Examples carry raw reliability vectors; the
/// normalizer is fitted on the training split and applied here.
inline std::pair<WeightEstimator, nn::TrainResult> train_weight_estimator(std::vector<EstimatorExample> train_set,
                                                                          std::vector<EstimatorExample> valid_set,
                                                                          EstimatorCriterion criterion,
                                                                          const EstimatorConfig& cfg,
                                                                          const nn::TrainConfig& tc) {
  if (train_set.empty()) throw DomainError("train_weight_estimator: empty training set");
  std::vector<const Matrix*> rel;
  for (const auto& e : train_set) rel.push_back(&e.reliability);
  WeightEstimator est;
  est.criterion = criterion;
  est.norm = nn::Normalizer::fit(rel);
  for (auto* set : {&train_set, &valid_set})
    for (auto& e : *set) {
      e.reliability = est.norm.apply(e.reliability);
      if (criterion == EstimatorCriterion::Mse && e.oracle.rows() != e.reliability.rows())
        throw DomainError("train_weight_estimator: MSE criterion requires oracle weights");
    }
  const auto M = static_cast<int>(train_set.front().log_posteriors.size());
  est.net = build_estimator_network(static_cast<int>(train_set.front().reliability.cols()), M, cfg);
  est.net.init(derive_seed(tc.seed, "estimator"));
  nn::TrainResult res = criterion == EstimatorCriterion::Mse ? nn::train(est.net, train_set, valid_set, tc, MseWeightObjective{})
                                                             : nn::train(est.net, train_set, valid_set, tc, CeWeightObjective{});
  return {std::move(est), std::move(res)};
}

}  // namespace avf::fusion
