// include/avfusion/reliability/model_measures.hpp

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

// Model-based reliability measures computed from per-stream state posteriors.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "avfusion/core/types.hpp"

namespace avf::reliability {

inline constexpr int kDispersionK = 15;
inline constexpr double kRatioClamp = 10000.0;
inline constexpr double kDivergenceLagSeconds = 0.250;
inline constexpr double kDivergenceWindowSeconds = 0.050;

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

namespace detail {

inline std::vector<double> top_k_descending(std::span<const double> p, int k) {
  std::vector<double> sorted(p.begin(), p.end());
  const auto kk = static_cast<std::ptrdiff_t>(std::min<std::size_t>(static_cast<std::size_t>(k), sorted.size()));
  std::partial_sort(sorted.begin(), sorted.begin() + kk, sorted.end(), std::greater<>());
  sorted.resize(static_cast<std::size_t>(kk));
  return sorted;
}

inline std::span<const double> row_span(const Matrix& m, Eigen::Index t, std::vector<double>& buf) {
  buf.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index s = 0; s < m.cols(); ++s) buf[static_cast<std::size_t>(s)] = m(t, s);
  return buf;
}

}  // namespace detail

/// Mean pairwise log-ratio among the K largest posteriors; K is clamped to
/// the number of states.
inline double dispersion(std::span<const double> p, int k = kDispersionK) {
  if (k < 2) throw DomainError("dispersion needs K >= 2");
  const auto top = detail::top_k_descending(p, k);
  const auto kk = top.size();
  if (kk < 2) return 0.0;
  std::vector<double> logs(kk);
  for (std::size_t i = 0; i < kk; ++i) logs[i] = std::log(top[i]);
  double sum = 0.0;
  for (std::size_t l = 0; l < kk; ++l)
    for (std::size_t m = l + 1; m < kk; ++m) sum += logs[l] - logs[m];
  return 2.0 * sum / (static_cast<double>(kk) * static_cast<double>(kk - 1));
}

/// Average log-ratio between the largest posterior and the next K-1.
inline double posterior_difference(std::span<const double> p, int k = kDispersionK) {
  if (k < 2) throw DomainError("posterior_difference needs K >= 2");
  const auto top = detail::top_k_descending(p, k);
  const auto kk = top.size();
  if (kk < 2) return 0.0;
  const double lead = std::log(top[0]);
  double sum = 0.0;
  for (std::size_t i = 1; i < kk; ++i) sum += lead - std::log(top[i]);
  return sum / static_cast<double>(kk - 1);
}

inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("kl_divergence: length mismatch");
  double d = 0.0;
  for (std::size_t s = 0; s < p.size(); ++s)
    if (p[s] > 0.0) d += p[s] * (std::log(p[s]) - std::log(q[s]));
  return std::max(d, 0.0);
}

struct TemporalDivergence {
  Vector values;
  /// Set when the sequence is not longer than the lag, so no pair exists.
  bool too_short = false;
};

/// KL(p_t || p_{t+lag}), tail frames holding the last valid value, then
/// mean-pooled over consecutive non-overlapping windows of `window` frames.
inline TemporalDivergence temporal_divergence(const Matrix& probs, int lag_frames, int window_frames) {
  if (lag_frames < 1 || window_frames < 1) throw DomainError("temporal_divergence: lag and window must be >= 1");
  const Eigen::Index T = probs.rows();
  TemporalDivergence out;
  out.values = Vector::Zero(T);
  if (T <= lag_frames) {
    out.too_short = true;
    return out;
  }
  std::vector<double> a, b;
  Vector raw(T);
  const Eigen::Index last_valid = T - 1 - lag_frames;
  for (Eigen::Index t = 0; t <= last_valid; ++t)
    raw(t) = kl_divergence(detail::row_span(probs, t, a), detail::row_span(probs, t + lag_frames, b));
  for (Eigen::Index t = last_valid + 1; t < T; ++t) raw(t) = raw(last_valid);
  for (Eigen::Index start = 0; start < T; start += window_frames) {
    const Eigen::Index len = std::min<Eigen::Index>(window_frames, T - start);
    out.values.segment(start, len).setConstant(raw.segment(start, len).mean());
  }
  return out;
}

inline TemporalDivergence temporal_divergence(const PosteriorSequence& seq) {
  const int lag = static_cast<int>(std::lround(kDivergenceLagSeconds / seq.frame_shift()));
  const int window = static_cast<int>(std::lround(kDivergenceWindowSeconds / seq.frame_shift()));
  return temporal_divergence(seq.probs(), lag, window);
}

namespace detail {

// Comparison against the stream mean with a relative slack of a few ulps, so
// that mathematically equal values are treated as ties despite rounding in the
// mean.
inline bool above_mean(double x, double mean) {
  return x > mean + 1e-12 * std::max(1.0, std::abs(mean));
}
inline bool below_mean(double x, double mean) {
  return x < mean - 1e-12 * std::max(1.0, std::abs(mean));
}

inline std::vector<double> normalize_or_uniform(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  if (sum <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
    return v;
  }
  for (double& x : v) x /= sum;
  return v;
}

}  // namespace detail

/// Entropies above the cross-stream mean are replaced by 10000 before
/// normalization, so uncertain streams receive almost all of the ratio mass.
inline std::vector<double> entropy_ratio(std::span<const double> entropies) {
  if (entropies.empty()) return {};
  double mean = 0.0;
  for (double h : entropies) mean += h;
  mean /= static_cast<double>(entropies.size());
  std::vector<double> clamped;
  for (double h : entropies) clamped.push_back(detail::above_mean(h, mean) ? kRatioClamp : h);
  return detail::normalize_or_uniform(std::move(clamped));
}

/// Dispersions below the cross-stream mean are replaced by 1/10000.
inline std::vector<double> dispersion_ratio(std::span<const double> dispersions) {
  if (dispersions.empty()) return {};
  double mean = 0.0;
  for (double d : dispersions) mean += d;
  mean /= static_cast<double>(dispersions.size());
  std::vector<double> clamped;
  for (double d : dispersions) clamped.push_back(detail::below_mean(d, mean) ? 1.0 / kRatioClamp : d);
  return detail::normalize_or_uniform(std::move(clamped));
}

/// Column order of the per-stream model-based block.
enum class ModelMeasure {
  Entropy = 0,
  Dispersion,
  PosteriorDifference,
  TemporalDivergence,
  EntropyRatio,
  DispersionRatio
};
inline constexpr int kNumModelMeasures = 6;

/// Per-stream T x 6 matrices of model-based measures, columns in ModelMeasure
/// order. The ratio columns couple the streams frame by frame.
struct ModelReliability {
  std::array<Matrix, kNumStreams> per_stream;
  bool divergence_too_short = false;
};

inline ModelReliability compute_model_reliability(std::span<const PosteriorSequence> streams,
                                                  int k = kDispersionK) {
  if (streams.size() != static_cast<std::size_t>(kNumStreams))
    throw ShapeError("compute_model_reliability expects one posterior sequence per stream");
  const Eigen::Index T = streams[0].num_frames();
  for (const auto& s : streams)
    if (s.num_frames() != T) throw ShapeError("compute_model_reliability: frame count mismatch across streams");

  ModelReliability out;
  std::vector<double> buf;
  for (int i = 0; i < kNumStreams; ++i) {
    const Matrix& p = streams[static_cast<std::size_t>(i)].probs();
    Matrix& m = out.per_stream[static_cast<std::size_t>(i)];
    m.resize(T, kNumModelMeasures);
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto row = detail::row_span(p, t, buf);
      m(t, static_cast<int>(ModelMeasure::Entropy)) = entropy(row);
      m(t, static_cast<int>(ModelMeasure::Dispersion)) = dispersion(row, k);
      m(t, static_cast<int>(ModelMeasure::PosteriorDifference)) = posterior_difference(row, k);
    }
    const auto div = temporal_divergence(streams[static_cast<std::size_t>(i)]);
    out.divergence_too_short = out.divergence_too_short || div.too_short;
    m.col(static_cast<int>(ModelMeasure::TemporalDivergence)) = div.values;
  }
  std::array<double, kNumStreams> h{}, d{};
  for (Eigen::Index t = 0; t < T; ++t) {
    for (int i = 0; i < kNumStreams; ++i) {
      h[static_cast<std::size_t>(i)] = out.per_stream[static_cast<std::size_t>(i)](t, static_cast<int>(ModelMeasure::Entropy));
      d[static_cast<std::size_t>(i)] = out.per_stream[static_cast<std::size_t>(i)](t, static_cast<int>(ModelMeasure::Dispersion));
    }
    const auto wh = entropy_ratio(h);
    const auto wd = dispersion_ratio(d);
    for (int i = 0; i < kNumStreams; ++i) {
      out.per_stream[static_cast<std::size_t>(i)](t, static_cast<int>(ModelMeasure::EntropyRatio)) = wh[static_cast<std::size_t>(i)];
      out.per_stream[static_cast<std::size_t>(i)](t, static_cast<int>(ModelMeasure::DispersionRatio)) = wd[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

}  // namespace avf::reliability
