// include/avfusion/synth/audio.hpp

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
#include <numbers>
#include <span>
#include <vector>

#include "avfusion/core/rng.hpp"

namespace avf::synth {

inline constexpr int kSampleRate = 16000;
inline constexpr int kSamplesPerFrame = 160;  // 10 ms shift
inline constexpr int kFrameLength = 400;      // 25 ms window
inline constexpr double kMaxHarmonicHz = 4000.0;

struct Formant {
  double freq = 0.0;
  double bandwidth = 0.0;
};

/// Harmonic source of one state: fundamental, level and spectral envelope.
struct AudioStateSpec {
  double f0 = 0.0;
  double gain = 1.0;
  std::vector<Formant> formants;

  /// Amplitude of each harmonic below kMaxHarmonicHz, scaled so that the
  /// steady-state RMS equals 0.1 * gain.
  std::vector<double> harmonic_amplitudes() const {
    std::vector<double> a;
    for (int h = 1; h * f0 < kMaxHarmonicHz; ++h) {
      const double f = h * f0;
      double env = 0.02;
      for (const auto& fm : formants) {
        const double z = (f - fm.freq) / fm.bandwidth;
        env += std::exp(-0.5 * z * z);
      }
      a.push_back(env);
    }
    double power = 0.0;
    for (double v : a) power += 0.5 * v * v;
    const double scale = power > 0.0 ? 0.1 * gain / std::sqrt(power) : 0.0;
    for (double& v : a) v *= scale;
    return a;
  }
};

/// Phase-continuous harmonic oscillator bank. Amplitudes cross-fade over
/// `ramp` samples whenever the active state changes.
class HarmonicSynth {
 public:
  explicit HarmonicSynth(double excitation_noise, int ramp = 80) : excitation_noise_(excitation_noise), ramp_(ramp) {}

  void randomize_phases(Rng& rng, std::size_t count = 128) {
    phases_.resize(count);
    for (double& p : phases_) p = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }

  /// Appends `n` samples of `spec` to `out`.
  void render(const AudioStateSpec& spec, std::size_t n, Rng& rng, std::vector<double>& out) {
    const auto target = spec.harmonic_amplitudes();
    const bool changed = &spec != current_;
    if (changed) {
      previous_ = amps_;
      amps_ = target;
      ramp_pos_ = current_ ? 0 : ramp_;
      current_ = &spec;
    }
    if (phases_.size() < amps_.size()) phases_.resize(amps_.size(), 0.0);
    const double rms = 0.1 * spec.gain;
    for (std::size_t i = 0; i < n; ++i) {
      const double mix = ramp_pos_ >= ramp_ ? 1.0 : static_cast<double>(ramp_pos_) / ramp_;
      double v = 0.0;
      for (std::size_t h = 0; h < amps_.size(); ++h) {
        const double prev = h < previous_.size() ? previous_[h] : 0.0;
        const double a = mix * amps_[h] + (1.0 - mix) * prev;
        phases_[h] += 2.0 * std::numbers::pi * static_cast<double>(h + 1) * spec.f0 / kSampleRate;
        v += a * std::sin(phases_[h]);
      }
      for (std::size_t h = 0; h < amps_.size(); ++h)
        if (phases_[h] > 2.0 * std::numbers::pi) phases_[h] = std::fmod(phases_[h], 2.0 * std::numbers::pi);
      v += excitation_noise_ * rms * standard_normal(rng);
      out.push_back(v);
      ++ramp_pos_;
    }
  }

 private:
  double excitation_noise_;
  int ramp_;
  int ramp_pos_ = 0;
  const AudioStateSpec* current_ = nullptr;
  std::vector<double> amps_, previous_, phases_;
};

/// Waveform for a frame-level state path: frame t owns samples
/// [160 t, 160 t + 160) and the last frame extends to cover a full 25 ms
/// window, so the analysis frame count equals the path length.
inline std::vector<double> render_waveform(std::span<const AudioStateSpec> states, std::span<const int> path,
                                           double excitation_noise, Rng& rng) {
  std::vector<double> out;
  if (path.empty()) return out;
  out.reserve((path.size() - 1) * kSamplesPerFrame + kFrameLength);
  HarmonicSynth synth(excitation_noise);
  synth.randomize_phases(rng);
  for (std::size_t t = 0; t < path.size(); ++t) {
    const std::size_t n = t + 1 == path.size() ? kFrameLength : kSamplesPerFrame;
    synth.render(states[static_cast<std::size_t>(path[t])], n, rng, out);
  }
  return out;
}

}  // namespace avf::synth
