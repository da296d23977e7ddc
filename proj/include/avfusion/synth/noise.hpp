// include/avfusion/synth/noise.hpp

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
#include <string>
#include <string_view>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/rng.hpp"

namespace avf::synth {

enum class NoiseKind { White, Babble };

inline std::string_view to_string(NoiseKind k) { return k == NoiseKind::White ? "white" : "babble"; }

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "white") return NoiseKind::White;
  if (s == "babble") return NoiseKind::Babble;
  throw ConfigError("noise_kind", "unknown noise kind '" + std::string(s) + "'");
}

/// Unit-variance-ish noise of the requested kind. Babble-like noise is
/// low-passed white noise under a slow random amplitude modulation, so its
/// frame power fluctuates the way crowd noise does.
inline std::vector<double> generate_noise(NoiseKind kind, std::size_t n, Rng& rng, int sample_rate = 16000) {
  std::vector<double> x(n);
  for (double& v : x) v = standard_normal(rng);
  if (kind == NoiseKind::White) return x;

  double y = 0.0;
  for (double& v : x) {
    y = 0.75 * y + v;
    v = y;
  }
  const double f1 = uniform(rng, 2.0, 6.0), f2 = uniform(rng, 0.5, 2.0);
  const double p1 = uniform(rng, 0.0, 2.0 * std::numbers::pi), p2 = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double m = 1.0 + 0.6 * std::sin(2.0 * std::numbers::pi * f1 * t + p1) +
                     0.3 * std::sin(2.0 * std::numbers::pi * f2 * t + p2);
    x[i] *= std::max(m, 0.05);
  }
  return x;
}

inline double energy(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

/// Scales `noise` in place so that 10 log10(E_signal / E_noise) = snr_db.
inline void scale_to_snr(const std::vector<double>& signal, std::vector<double>& noise, double snr_db) {
  const double es = energy(signal), en = energy(noise);
  if (es <= 0.0) throw DomainError("cannot mix noise into a zero-energy signal");
  if (en <= 0.0) throw DomainError("cannot scale a zero-energy noise signal");
  const double gain = std::sqrt(es / (en * std::pow(10.0, snr_db / 10.0)));
  for (double& v : noise) v *= gain;
}

}  // namespace avf::synth
