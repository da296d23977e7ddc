// include/avfusion/signal/pitch.hpp

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
#include <span>
#include <vector>

#include "avfusion/core/types.hpp"
#include "avfusion/signal/mfcc.hpp"

namespace avf::signal {

struct PitchConfig {
  FrameConfig frame;
  double min_f0 = 50.0;
  double max_f0 = 500.0;
  double voicing_threshold = 0.5;  // below this the frame reports f0 = 0
  double octave_tolerance = 0.9;   // shortest-lag peak within this fraction of the best wins
  double silence_energy = 1e-10;
};

struct PitchTrack {
  Vector f0;       // Hz, 0 when unvoiced
  Vector voicing;  // clamped peak NCCF in [0, 1]
};

/// Normalized cross-correlation of frame samples against their lagged copies.
/// Frames near the end of the signal use a truncated window.
inline std::vector<double> nccf(std::span<const double> x, std::size_t start, int window, int min_lag, int max_lag) {
  std::vector<double> out(static_cast<std::size_t>(max_lag - min_lag + 1), 0.0);
  for (int lag = min_lag; lag <= max_lag; ++lag) {
    const std::size_t avail = x.size() > start + static_cast<std::size_t>(lag) ? x.size() - start - static_cast<std::size_t>(lag) : 0;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(window), avail);
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = x[start + i], b = x[start + i + static_cast<std::size_t>(lag)];
      xy += a * b;
      xx += a * a;
      yy += b * b;
    }
    const double denom = std::sqrt(xx * yy);
    out[static_cast<std::size_t>(lag - min_lag)] = denom > 0.0 ? xy / denom : 0.0;
  }
  return out;
}

inline PitchTrack pitch_nccf(std::span<const double> samples, const PitchConfig& cfg = {}) {
  const int T = num_frames(samples.size(), cfg.frame);
  PitchTrack track{Vector::Zero(T), Vector::Zero(T)};
  const int min_lag = static_cast<int>(std::floor(cfg.frame.sample_rate / cfg.max_f0));
  const int max_lag = static_cast<int>(std::ceil(cfg.frame.sample_rate / cfg.min_f0));
  for (int t = 0; t < T; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.frame.frame_shift);
    double energy = 0.0;
    for (int n = 0; n < cfg.frame.frame_length; ++n) energy += samples[start + n] * samples[start + n];
    if (energy <= cfg.silence_energy) continue;

    const auto r = nccf(samples, start, cfg.frame.frame_length, min_lag, max_lag);
    const auto best_it = std::max_element(r.begin(), r.end());
    const double best = *best_it;
    // Prefer the shortest-lag local maximum close to the global peak; the
    // NCCF of a periodic signal peaks again at every multiple of the period.
    std::size_t pick = static_cast<std::size_t>(best_it - r.begin());
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
      if (r[i] >= r[i - 1] && r[i] >= r[i + 1] && r[i] >= cfg.octave_tolerance * best) {
        pick = i;
        break;
      }
    }
    double lag = static_cast<double>(pick) + min_lag;
    if (pick > 0 && pick + 1 < r.size()) {
      const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
      const double curvature = a - 2.0 * b + c;
      if (curvature < 0.0) lag += 0.5 * (a - c) / curvature;
    }
    const double voicing = std::clamp(best, 0.0, 1.0);
    track.voicing(t) = voicing;
    if (voicing >= cfg.voicing_threshold)
      track.f0(t) = std::clamp(cfg.frame.sample_rate / lag, cfg.min_f0, cfg.max_f0);
  }
  return track;
}

}  // namespace avf::signal
