// include/avfusion/signal/delta.hpp

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

#include "avfusion/core/types.hpp"

namespace avf::signal {

/// Regression delta over +/-window frames with edge replication:
///   d_t = sum_n n (c_{t+n} - c_{t-n}) / (2 sum_n n^2)
inline Matrix delta(const Matrix& features, int window = 2) {
  if (window < 1) throw DomainError("delta: window must be >= 1");
  const Eigen::Index T = features.rows();
  Matrix out = Matrix::Zero(T, features.cols());
  if (T == 0) return out;
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int n = 1; n <= window; ++n) {
      const Eigen::Index ahead = std::min<Eigen::Index>(t + n, T - 1);
      const Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
      out.row(t) += n * (features.row(ahead) - features.row(behind));
    }
  }
  return out / denom;
}

}  // namespace avf::signal
