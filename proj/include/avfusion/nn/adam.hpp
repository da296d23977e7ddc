// include/avfusion/nn/adam.hpp

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
#include <vector>

#include "avfusion/nn/layers.hpp"

namespace avf::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m, v;
  long step = 0;
};

/// Bias-corrected ADAM update of every parameter from its accumulated grad.
inline void adam_step(const std::vector<Param*>& params, AdamState& state, double lr, const AdamConfig& cfg = {}) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam state does not match the parameter list");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    if (state.m[i].rows() != p.value.rows() || state.m[i].cols() != p.value.cols())
      throw ShapeError("adam state shape mismatch for '" + p.name + "'");
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * p.grad;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + cfg.eps);
  }
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
inline double clip_grad_norm(const std::vector<Param*>& params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm)
    for (auto* p : params) p->grad *= max_norm / norm;
  return norm;
}

}  // namespace avf::nn
