// include/avfusion/nn/loss.hpp

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

#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::nn {

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d value / d input
};

/// L = -(1/T) sum_t log p(s*_t | o_t) on log-probability rows.
inline LossResult ce_loss(const Matrix& log_probs, const std::vector<int>& targets) {
  const auto T = log_probs.rows();
  if (static_cast<Eigen::Index>(targets.size()) != T)
    throw ShapeError("ce_loss: " + std::to_string(targets.size()) + " targets for " + std::to_string(T) + " frames");
  LossResult r;
  r.grad = Matrix::Zero(T, log_probs.cols());
  if (T == 0) return r;
  for (Eigen::Index t = 0; t < T; ++t) {
    const int s = targets[static_cast<std::size_t>(t)];
    if (s < 0 || s >= log_probs.cols())
      throw DomainError("ce_loss: target " + std::to_string(s) + " at frame " + std::to_string(t) + " is out of range");
    r.value -= log_probs(t, s);
    r.grad(t, s) = -1.0 / static_cast<double>(T);
  }
  r.value /= static_cast<double>(T);
  return r;
}

inline LossResult ce_loss(const Matrix& log_probs, const AlignmentTarget& target) {
  if (target.num_states() != log_probs.cols()) throw ShapeError("ce_loss: target state count mismatch");
  return ce_loss(log_probs, target.states());
}

/// Mean of squared element differences.
inline LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw ShapeError("mse_loss: shapes " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) + " and " +
                     std::to_string(target.rows()) + "x" + std::to_string(target.cols()) + " differ");
  LossResult r;
  const double n = static_cast<double>(pred.size());
  if (n == 0) {
    r.grad = Matrix::Zero(pred.rows(), pred.cols());
    return r;
  }
  const Matrix diff = pred - target;
  r.value = diff.squaredNorm() / n;
  r.grad = (2.0 / n) * diff;
  return r;
}

}  // namespace avf::nn
