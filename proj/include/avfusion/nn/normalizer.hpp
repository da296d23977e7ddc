// include/avfusion/nn/normalizer.hpp

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

#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::nn {

/// Per-column standardization with statistics from training data.
struct Normalizer {
  RowVector mean;
  RowVector scale;  // 1 / std

  static Normalizer fit(const std::vector<const Matrix*>& data, double std_floor = 1e-6) {
    if (data.empty()) throw DomainError("normalizer needs at least one matrix");
    const auto D = data.front()->cols();
    RowVector sum = RowVector::Zero(D), sq = RowVector::Zero(D);
    double n = 0;
    for (const auto* m : data) {
      if (m->cols() != D) throw ShapeError("normalizer inputs differ in width");
      sum += m->colwise().sum();
      sq += m->array().square().matrix().colwise().sum();
      n += static_cast<double>(m->rows());
    }
    if (n == 0) throw DomainError("normalizer needs at least one frame");
    Normalizer z;
    z.mean = sum / n;
    const RowVector var = (sq / n - z.mean.cwiseAbs2()).cwiseMax(0.0);
    z.scale = var.cwiseSqrt().cwiseMax(std_floor).cwiseInverse();
    return z;
  }

  static Normalizer identity(Eigen::Index dim) { return {RowVector::Zero(dim), RowVector::Ones(dim)}; }

  Matrix apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw ShapeError("normalizer width mismatch");
    return ((x.rowwise() - mean).array().rowwise() * scale.array()).matrix();
  }

  Matrix as_matrix() const {
    Matrix m(2, mean.size());
    m.row(0) = mean;
    m.row(1) = scale;
    return m;
  }
  static Normalizer from_matrix(const Matrix& m) {
    if (m.rows() != 2) throw ShapeError("normalizer matrix must have two rows");
    return {m.row(0), m.row(1)};
  }
};

}  // namespace avf::nn
