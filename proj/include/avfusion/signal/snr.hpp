// include/avfusion/signal/snr.hpp

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

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/signal/mfcc.hpp"

namespace avf::signal {

inline constexpr double kSnrCapDb = 40.0;
inline constexpr double kEnergyEpsilon = 1e-12;

inline double snr_db(double signal_energy, double noise_energy) {
  if (noise_energy <= kEnergyEpsilon) return signal_energy <= kEnergyEpsilon ? 0.0 : kSnrCapDb;
  if (signal_energy <= kEnergyEpsilon) return -kSnrCapDb;
  return std::clamp(10.0 * std::log10(signal_energy / noise_energy), -kSnrCapDb, kSnrCapDb);
}

inline std::vector<double> frame_energies(std::span<const double> x, const FrameConfig& cfg = {}) {
  const int T = num_frames(x.size(), cfg);
  std::vector<double> e(static_cast<std::size_t>(T), 0.0);
  for (int t = 0; t < T; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg.frame_shift);
    for (int n = 0; n < cfg.frame_length; ++n) e[static_cast<std::size_t>(t)] += x[start + n] * x[start + n];
  }
  return e;
}

/// Exact frame SNR from the stored clean and noise components. An empty noise
/// component means a clean recording, which is reported at the cap.
inline Vector oracle_frame_snr(std::span<const double> clean, std::span<const double> noise,
                               const FrameConfig& cfg = {}) {
  if (clean.empty()) throw DomainError("oracle_frame_snr: missing clean component");
  if (!noise.empty() && noise.size() != clean.size())
    throw ShapeError("oracle_frame_snr: clean and noise components differ in length");
  const auto s = frame_energies(clean, cfg);
  Vector out(static_cast<Eigen::Index>(s.size()));
  if (noise.empty()) {
    out.setConstant(kSnrCapDb);
    return out;
  }
  const auto n = frame_energies(noise, cfg);
  for (std::size_t t = 0; t < s.size(); ++t) out(static_cast<Eigen::Index>(t)) = snr_db(s[t], n[t]);
  return out;
}

struct SnrEstimatorConfig {
  FrameConfig frame;
  double psd_smoothing = 0.8;     // recursive periodogram smoothing for minimum tracking
  double min_bias = 2.2;          // compensates the downward bias of the minimum of smoothed periodograms
  double decision_directed = 0.98;
  double min_apriori = 1e-3;      // -30 dB floor on the a-priori SNR
};

/// Blind frame SNR: minimum-statistics noise PSD followed by the
/// decision-directed a-priori SNR estimate, reduced to a frame ratio of
/// estimated speech to noise power. Intended for stationary noise.
inline Vector estimate_frame_snr(std::span<const double> noisy, const SnrEstimatorConfig& cfg = {}) {
  if (noisy.empty()) throw DomainError("estimate_frame_snr: empty signal");
  PowerSpectrogram spectrogram(cfg.frame);
  const Matrix P = spectrogram(noisy);
  const Eigen::Index T = P.rows(), K = P.cols();
  Vector out(T);
  if (T == 0) return out;

  Matrix smoothed(T, K);
  smoothed.row(0) = P.row(0);
  for (Eigen::Index t = 1; t < T; ++t)
    smoothed.row(t) = cfg.psd_smoothing * smoothed.row(t - 1) + (1.0 - cfg.psd_smoothing) * P.row(t);
  RowVector noise_psd = smoothed.colwise().minCoeff() * cfg.min_bias;
  noise_psd = noise_psd.array().max(kEnergyEpsilon);

  RowVector prev_clean = RowVector::Zero(K);
  for (Eigen::Index t = 0; t < T; ++t) {
    double speech = 0.0, noise = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      const double gamma = P(t, k) / noise_psd(k);
      const double ml = std::max(gamma - 1.0, 0.0);
      double xi = t == 0 ? ml
                         : cfg.decision_directed * prev_clean(k) / noise_psd(k) +
                               (1.0 - cfg.decision_directed) * ml;
      xi = std::max(xi, cfg.min_apriori);
      const double gain = xi / (1.0 + xi);
      prev_clean(k) = gain * gain * P(t, k);
      speech += xi * noise_psd(k);
      noise += noise_psd(k);
    }
    out(t) = snr_db(speech, noise);
  }
  return out;
}

}  // namespace avf::signal
