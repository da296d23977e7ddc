// include/avfusion/fusion/weighting.hpp

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

#include <span>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::fusion {

inline void check_streams(std::span<const Matrix> streams) {
  if (streams.empty()) throw ShapeError("fusion needs at least one stream");
  for (const auto& m : streams)
    if (m.rows() != streams[0].rows() || m.cols() != streams[0].cols())
      throw ShapeError("fusion: stream shapes differ (" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                       " vs " + std::to_string(streams[0].rows()) + "x" + std::to_string(streams[0].cols()) + ")");
}

/// sum_i lambda_i log p_i with constant weights.
inline Matrix static_fuse_scores(std::span<const Matrix> log_posteriors, const RowVector& lambda) {
  check_streams(log_posteriors);
  if (lambda.size() != static_cast<Eigen::Index>(log_posteriors.size()))
    throw ShapeError("static_fuse: " + std::to_string(lambda.size()) + " weights for " +
                     std::to_string(log_posteriors.size()) + " streams");
  Matrix out = Matrix::Zero(log_posteriors[0].rows(), log_posteriors[0].cols());
  for (std::size_t i = 0; i < log_posteriors.size(); ++i)
    if (lambda(static_cast<Eigen::Index>(i)) != 0.0) out += lambda(static_cast<Eigen::Index>(i)) * log_posteriors[i];
  return out;
}

inline FusedLogPosterior static_fuse(std::span<const Matrix> log_posteriors, const RowVector& lambda) {
  return FusedLogPosterior(static_fuse_scores(log_posteriors, lambda));
}

/// sum_i lambda_{t,i} log p_i(s | o_t), frame by frame.
inline Matrix dynamic_fuse_scores(std::span<const Matrix> log_posteriors, const StreamWeights& w) {
  check_streams(log_posteriors);
  const auto T = log_posteriors[0].rows();
  if (w.weights.rows() != T)
    throw ShapeError("dynamic_fuse: " + std::to_string(w.weights.rows()) + " weight rows for " + std::to_string(T) + " frames");
  if (w.weights.cols() != static_cast<Eigen::Index>(log_posteriors.size()))
    throw ShapeError("dynamic_fuse: weight width does not match the stream count");
  Matrix out = Matrix::Zero(T, log_posteriors[0].cols());
  for (std::size_t i = 0; i < log_posteriors.size(); ++i)
    out += w.weights.col(static_cast<Eigen::Index>(i)).asDiagonal() * log_posteriors[i];
  return out;
}

inline FusedLogPosterior dynamic_fuse(std::span<const Matrix> log_posteriors, const StreamWeights& w) {
  return FusedLogPosterior(dynamic_fuse_scores(log_posteriors, w));
}

inline StreamWeights constant_weights(Eigen::Index frames, const RowVector& lambda) {
  return {lambda.replicate(frames, 1)};
}

/// Row-wise log-softmax.
inline Matrix renormalize_rows(const Matrix& scores) {
  const Vector mx = scores.rowwise().maxCoeff();
  Matrix z = scores.colwise() - mx;
  const Vector lse = z.array().exp().rowwise().sum().log().matrix();
  z.colwise() -= lse;
  return z;
}

}  // namespace avf::fusion
