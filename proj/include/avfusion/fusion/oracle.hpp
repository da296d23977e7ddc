// include/avfusion/fusion/oracle.hpp

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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "avfusion/fusion/weighting.hpp"

namespace avf::fusion {

/// Linear: CE of the weighted log-posterior sum itself, linear in lambda.
/// Renormalized: CE of the log-softmax of that sum (geometric fusion).
enum class OracleMode { Linear, Renormalized };

inline std::string to_string(OracleMode m) { return m == OracleMode::Linear ? "linear" : "renormalized"; }
inline OracleMode parse_oracle_mode(const std::string& s) {
  if (s == "linear") return OracleMode::Linear;
  if (s == "renormalized") return OracleMode::Renormalized;
  throw DomainError("unknown oracle mode '" + s + "'");
}

struct OracleOptions {
  double tol = 1e-10;  // max-norm of the projected-gradient residual
  int max_iter = 5000;
  double step0 = 1.0;
};

namespace detail {

/// Per-frame data: a(i, s) = log p_i(s | o_t).
inline double renorm_objective(const Matrix& a, const RowVector& lambda, int target, RowVector* grad) {
  const RowVector z = lambda * a;
  const double mx = z.maxCoeff();
  const RowVector e = (z.array() - mx).exp().matrix();
  const double sum = e.sum();
  const double f = -(z(target) - mx - std::log(sum));
  if (grad) {
    const RowVector q = e / sum;
    *grad = (a * q.transpose()).transpose() - a.col(target).transpose();
  }
  return f;
}

/// Euclidean projection onto the probability simplex (sort and threshold).
inline RowVector project_to_simplex(const RowVector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double cand = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - cand > 0.0) theta = cand;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace detail

/// Fused cross-entropy of one frame under weights lambda.
inline double frame_fused_ce(std::span<const Matrix> log_posteriors, Eigen::Index t, int target, const RowVector& lambda,
                             OracleMode mode) {
  const auto M = static_cast<Eigen::Index>(log_posteriors.size());
  if (mode == OracleMode::Linear) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) f -= lambda(i) * log_posteriors[static_cast<std::size_t>(i)](t, target);
    return f;
  }
  Matrix a(M, log_posteriors[0].cols());
  for (Eigen::Index i = 0; i < M; ++i) a.row(i) = log_posteriors[static_cast<std::size_t>(i)].row(t);
  return detail::renorm_objective(a, lambda, target, nullptr);
}

/// Mean fused CE over an utterance.
inline double fused_ce(std::span<const Matrix> log_posteriors, const StreamWeights& w, const AlignmentTarget& target,
                       OracleMode mode) {
  check_streams(log_posteriors);
  const auto T = log_posteriors[0].rows();
  if (static_cast<Eigen::Index>(target.size()) != T) throw ShapeError("fused_ce: alignment length mismatch");
  if (T == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index t = 0; t < T; ++t)
    sum += frame_fused_ce(log_posteriors, t, target[static_cast<std::size_t>(t)], w.weights.row(t), mode);
  return sum / static_cast<double>(T);
}

/// Linear mode: the vertex of the best stream; exact ties share uniformly.
inline RowVector oracle_frame_linear(std::span<const Matrix> log_posteriors, Eigen::Index t, int target) {
  const auto M = static_cast<Eigen::Index>(log_posteriors.size());
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < M; ++i) best = std::max(best, log_posteriors[static_cast<std::size_t>(i)](t, target));
  RowVector w = RowVector::Zero(M);
  for (Eigen::Index i = 0; i < M; ++i)
    if (log_posteriors[static_cast<std::size_t>(i)](t, target) == best) w(i) = 1.0;
  return w / w.sum();
}

/// Renormalized mode: the objective is convex and smooth in lambda. Projected
/// gradient descent from the uniform point with Barzilai-Borwein steps and
/// Armijo backtracking, stopped on the residual lambda - P(lambda - g). The
/// result is never worse than the uniform point or any vertex.
inline RowVector oracle_frame_renormalized(std::span<const Matrix> log_posteriors, Eigen::Index t, int target,
                                           const OracleOptions& opt = {}) {
  const auto M = static_cast<Eigen::Index>(log_posteriors.size());
  Matrix a(M, log_posteriors[0].cols());
  for (Eigen::Index i = 0; i < M; ++i) a.row(i) = log_posteriors[static_cast<std::size_t>(i)].row(t);

  RowVector lambda = RowVector::Constant(M, 1.0 / static_cast<double>(M));
  RowVector g;
  double f = detail::renorm_objective(a, lambda, target, &g);
  double step = opt.step0 / std::max(1.0, g.cwiseAbs().maxCoeff());
  for (int it = 0; it < opt.max_iter; ++it) {
    if ((lambda - detail::project_to_simplex(lambda - g)).cwiseAbs().maxCoeff() < opt.tol) break;
    bool accepted = false;
    RowVector cand, cg;
    double fc = f;
    for (int bt = 0; bt < 60; ++bt) {
      cand = detail::project_to_simplex(lambda - step * g);
      fc = detail::renorm_objective(a, cand, target, &cg);
      if (fc <= f + 1e-4 * g.dot(cand - lambda)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const RowVector ds = cand - lambda, dg = cg - g;
    lambda = cand;
    g = cg;
    f = fc;
    const double curv = ds.dot(dg);
    step = curv > 0.0 ? ds.squaredNorm() / curv : 2.0 * step;
    if (!std::isfinite(step) || step <= 0.0) step = opt.step0;
  }
  // Vertex safeguard: EG only approaches the boundary asymptotically.
  for (Eigen::Index i = 0; i < M; ++i) {
    RowVector v = RowVector::Zero(M);
    v(i) = 1.0;
    const double fv = detail::renorm_objective(a, v, target, nullptr);
    if (fv < f) {
      f = fv;
      lambda = v;
    }
  }
  return lambda;
}

/// Per-frame oracle stream weights against a known state alignment.
inline StreamWeights oracle_weights(std::span<const Matrix> log_posteriors, const AlignmentTarget& target,
                                    OracleMode mode = OracleMode::Renormalized, const OracleOptions& opt = {}) {
  check_streams(log_posteriors);
  const auto T = log_posteriors[0].rows();
  if (static_cast<Eigen::Index>(target.size()) != T)
    throw ShapeError("oracle_weights: alignment has " + std::to_string(target.size()) + " frames, posteriors have " +
                     std::to_string(T));
  if (target.num_states() != log_posteriors[0].cols()) throw ShapeError("oracle_weights: state count mismatch");
  StreamWeights w{Matrix(T, static_cast<Eigen::Index>(log_posteriors.size()))};
  for (Eigen::Index t = 0; t < T; ++t) {
    const int s = target[static_cast<std::size_t>(t)];
    w.weights.row(t) = mode == OracleMode::Linear ? oracle_frame_linear(log_posteriors, t, s)
                                                  : oracle_frame_renormalized(log_posteriors, t, s, opt);
  }
  return w;
}

}  // namespace avf::fusion
