// include/avfusion/synth/gaussian.hpp

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
#include <numbers>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::synth {

/// One diagonal Gaussian per class; row k of `mean`/`var` belongs to class k.
struct DiagonalGaussians {
  Matrix mean;
  Matrix var;

  Eigen::Index num_classes() const { return mean.rows(); }
  Eigen::Index dim() const { return mean.cols(); }

  /// T x K log densities of the rows of `features`.
  Matrix log_likelihood(const Matrix& features) const {
    if (features.cols() != dim())
      throw ShapeError("feature dimension " + std::to_string(features.cols()) + " does not match model dimension " +
                       std::to_string(dim()));
    const Eigen::Index T = features.rows(), K = num_classes();
    Matrix out(T, K);
    const Matrix inv_var = var.cwiseInverse();
    Vector log_norm(K);
    for (Eigen::Index k = 0; k < K; ++k)
      log_norm(k) = -0.5 * (var.row(k).array().log().sum() + static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi));
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index k = 0; k < K; ++k)
        out(t, k) = log_norm(k) - 0.5 * ((features.row(t) - mean.row(k)).array().square() * inv_var.row(k).array()).sum();
    return out;
  }

  /// Fits mean and variance per class from grouped samples (rows).
  static DiagonalGaussians fit(const std::vector<Matrix>& samples_per_class, double var_floor, double var_scale = 1.0) {
    if (samples_per_class.empty()) throw DomainError("cannot fit Gaussians without classes");
    const Eigen::Index D = samples_per_class.front().cols();
    const auto K = static_cast<Eigen::Index>(samples_per_class.size());
    DiagonalGaussians g{Matrix(K, D), Matrix(K, D)};
    for (Eigen::Index k = 0; k < K; ++k) {
      const Matrix& x = samples_per_class[static_cast<std::size_t>(k)];
      if (x.rows() < 2 || x.cols() != D) throw DomainError("each class needs at least two samples of equal dimension");
      const RowVector mu = x.colwise().mean();
      g.mean.row(k) = mu;
      const RowVector v = (x.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(x.rows() - 1);
      g.var.row(k) = (v.array() * var_scale).max(var_floor);
    }
    return g;
  }

  /// Concatenates per-stream models feature-wise (independent streams).
  static DiagonalGaussians concat(const std::vector<const DiagonalGaussians*>& parts) {
    Eigen::Index D = 0;
    for (const auto* p : parts) D += p->dim();
    const Eigen::Index K = parts.front()->num_classes();
    DiagonalGaussians g{Matrix(K, D), Matrix(K, D)};
    Eigen::Index off = 0;
    for (const auto* p : parts) {
      if (p->num_classes() != K) throw ShapeError("concatenated models disagree on class count");
      g.mean.middleCols(off, p->dim()) = p->mean;
      g.var.middleCols(off, p->dim()) = p->var;
      off += p->dim();
    }
    return g;
  }
};

}  // namespace avf::synth
