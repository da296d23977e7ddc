// include/avfusion/nn/gradcheck.hpp

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
#include <cmath>
#include <functional>

#include "avfusion/nn/network.hpp"

namespace avf::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

/// |a - b| / max(|a|, |b|, floor); the floor keeps exact zeros comparable.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Fourth-order central differences of the scalar loss sum(out .* probe)
/// with respect to every parameter and every input element. The forward mode
/// is Train with dropout masks frozen after the first pass.
inline GradCheckResult gradient_check(Network& net, const Matrix& x, const Matrix& probe, double h = 1e-4) {
  for (std::size_t i = 0; i < net.size(); ++i)
    if (auto* d = dynamic_cast<Dropout*>(&net.layer(i))) d->freeze_mask(true);
  auto loss = [&](const Matrix& in) { return (net.forward(in, Mode::Train).array() * probe.array()).sum(); };
  // f'(v) from f(v +- h) and f(v +- 2h)
  auto diff = [&](double& v, const std::function<double()>& f) {
    const double orig = v;
    double s[4];
    const double off[4] = {2 * h, h, -h, -2 * h};
    for (int k = 0; k < 4; ++k) {
      v = orig + off[k];
      s[k] = f();
    }
    v = orig;
    return (-s[0] + 8.0 * s[1] - 8.0 * s[2] + s[3]) / (12.0 * h);
  };

  net.zero_grad();
  const Matrix out = net.forward(x, Mode::Train);
  if (out.rows() != probe.rows() || out.cols() != probe.cols()) throw ShapeError("gradient_check: probe shape mismatch");
  const Matrix dx = net.backward(probe);

  GradCheckResult r;
  auto record = [&](double analytic, double numeric) {
    r.max_rel_error = std::max(r.max_rel_error, relative_error(analytic, numeric));
    r.max_abs_error = std::max(r.max_abs_error, std::abs(analytic - numeric));
    ++r.checked;
  };
  for (auto* p : net.params()) {
    const Matrix grad = p->grad;
    for (Eigen::Index k = 0; k < p->value.size(); ++k)
      record(grad.data()[k], diff(p->value.data()[k], [&] { return loss(x); }));
  }
  Matrix xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) record(dx.data()[k], diff(xp.data()[k], [&] { return loss(xp); }));
  for (std::size_t i = 0; i < net.size(); ++i)
    if (auto* d = dynamic_cast<Dropout*>(&net.layer(i))) d->freeze_mask(false);
  return r;
}

}  // namespace avf::nn
