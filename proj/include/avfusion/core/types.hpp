// include/avfusion/core/types.hpp

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

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "avfusion/core/error.hpp"

namespace avf {

/// All probability math is carried out in 64-bit; files store 32-bit.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Floor applied to every posterior before a logarithm is taken.
inline constexpr double kPosteriorFloor = 1e-8;

/// Audio frame shift in seconds. Video runs at 25 frames per second.
inline constexpr double kAudioFrameShift = 0.010;
inline constexpr double kVideoFrameShift = 0.040;

enum class StreamId { A = 0, VA = 1, VS = 2 };

inline constexpr int kNumStreams = 3;
inline constexpr std::array<StreamId, kNumStreams> kAllStreams = {StreamId::A, StreamId::VA,
                                                                  StreamId::VS};

inline std::string_view to_string(StreamId s) {
  switch (s) {
    case StreamId::A:
      return "A";
    case StreamId::VA:
      return "VA";
    case StreamId::VS:
      return "VS";
  }
  return "?";
}

inline StreamId parse_stream(std::string_view name) {
  if (name == "A") return StreamId::A;
  if (name == "VA") return StreamId::VA;
  if (name == "VS") return StreamId::VS;
  throw ConfigError("stream", "unknown stream '" + std::string(name) + "'");
}

inline constexpr int index_of(StreamId s) { return static_cast<int>(s); }

/// The tied-state inventory shared by every stream of a world.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.size() < 2) throw DomainError("state space needs at least two states");
    std::unordered_set<std::string> seen;
    for (const auto& l : labels_)
      if (!seen.insert(l).second) throw DomainError("duplicate state label '" + l + "'");
  }

  int num_states() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int s) const { return labels_.at(static_cast<std::size_t>(s)); }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::vector<std::string> labels_;
};

/// Normalizes each row of a nonnegative matrix onto the probability simplex
/// with every entry at least `floor`. Entries at or below the floor are pinned
/// to it and the remaining mass is redistributed proportionally, repeating
/// until no entry drops under the floor. Valid input is returned unchanged up
/// to rounding.
inline Matrix normalize_rows(const Matrix& raw, double floor = kPosteriorFloor) {
  const Eigen::Index cols = raw.cols();
  if (cols == 0) throw ShapeError("posterior matrix has no columns");
  if (floor <= 0.0 || floor * static_cast<double>(cols) >= 1.0)
    throw DomainError("posterior floor must lie in (0, 1/S)");
  Matrix out(raw.rows(), cols);
  std::vector<char> pinned(static_cast<std::size_t>(cols));
  for (Eigen::Index t = 0; t < raw.rows(); ++t) {
    double total = 0.0;
    for (Eigen::Index s = 0; s < cols; ++s) {
      const double v = raw(t, s);
      if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError("row " + std::to_string(t) + " has a negative or non-finite entry");
      total += v;
    }
    if (total <= 0.0) throw DomainError("row " + std::to_string(t) + " is all zero");

    std::fill(pinned.begin(), pinned.end(), 0);
    for (Eigen::Index s = 0; s < cols; ++s)
      if (raw(t, s) / total <= floor) pinned[static_cast<std::size_t>(s)] = 1;
    for (;;) {
      double free_mass = 0.0;
      Eigen::Index n_pinned = 0;
      for (Eigen::Index s = 0; s < cols; ++s) {
        if (pinned[static_cast<std::size_t>(s)])
          ++n_pinned;
        else
          free_mass += raw(t, s);
      }
      const double scale = (1.0 - static_cast<double>(n_pinned) * floor) / free_mass;
      bool changed = false;
      for (Eigen::Index s = 0; s < cols; ++s) {
        if (pinned[static_cast<std::size_t>(s)]) {
          out(t, s) = floor;
        } else {
          out(t, s) = raw(t, s) * scale;
          if (out(t, s) < floor) {
            pinned[static_cast<std::size_t>(s)] = 1;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
  }
  return out;
}

/// T x S row-stochastic matrix of state posteriors for one stream.
class PosteriorSequence {
 public:
  PosteriorSequence(StreamId stream, const Matrix& raw, double floor = kPosteriorFloor,
                    double frame_shift = kAudioFrameShift)
      : stream_(stream), probs_(normalize_rows(raw, floor)), frame_shift_(frame_shift) {
    if (probs_.rows() < 1) throw ShapeError("posterior sequence needs at least one frame");
  }

  StreamId stream() const { return stream_; }
  const Matrix& probs() const { return probs_; }
  double frame_shift() const { return frame_shift_; }
  Eigen::Index num_frames() const { return probs_.rows(); }
  Eigen::Index num_states() const { return probs_.cols(); }
  Matrix log_probs() const { return probs_.array().log().matrix(); }

 private:
  StreamId stream_;
  Matrix probs_;
  double frame_shift_;
};

inline PosteriorSequence normalize_posteriors(const Matrix& raw, double floor = kPosteriorFloor,
                                              StreamId stream = StreamId::A) {
  return PosteriorSequence(stream, raw, floor);
}

/// T x S matrix of fused log-pseudo-posteriors; entries must be finite.
class FusedLogPosterior {
 public:
  explicit FusedLogPosterior(Matrix scores) : scores_(std::move(scores)) {
    if (!scores_.allFinite()) throw DomainError("fused log-posterior contains non-finite values");
  }
  const Matrix& scores() const { return scores_; }
  Eigen::Index num_frames() const { return scores_.rows(); }
  Eigen::Index num_states() const { return scores_.cols(); }

 private:
  Matrix scores_;
};

/// Per-frame stream weights (T x M).
struct StreamWeights {
  Matrix weights;

  bool on_simplex(double tol = 1e-9) const {
    for (Eigen::Index t = 0; t < weights.rows(); ++t) {
      if ((weights.row(t).array() < -tol).any()) return false;
      if (std::abs(weights.row(t).sum() - 1.0) > tol) return false;
    }
    return true;
  }
};

/// Per-frame ground-truth state index from forced alignment.
class AlignmentTarget {
 public:
  AlignmentTarget(std::vector<int> states, int num_states) : states_(std::move(states)) {
    for (std::size_t t = 0; t < states_.size(); ++t)
      if (states_[t] < 0 || states_[t] >= num_states)
        throw DomainError("alignment frame " + std::to_string(t) + " has state " +
                          std::to_string(states_[t]) + " outside [0, " +
                          std::to_string(num_states) + ")");
    num_states_ = num_states;
  }

  const std::vector<int>& states() const { return states_; }
  int operator[](std::size_t t) const { return states_[t]; }
  std::size_t size() const { return states_.size(); }
  int num_states() const { return num_states_; }

  Matrix one_hot() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(states_.size()), num_states_);
    for (std::size_t t = 0; t < states_.size(); ++t) m(static_cast<Eigen::Index>(t), states_[t]) = 1.0;
    return m;
  }

 private:
  std::vector<int> states_;
  int num_states_ = 0;
};

}  // namespace avf
