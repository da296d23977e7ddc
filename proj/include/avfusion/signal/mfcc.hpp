// include/avfusion/signal/mfcc.hpp

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

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::signal {

struct FrameConfig {
  int sample_rate = 16000;
  int frame_length = 400;  // 25 ms
  int frame_shift = 160;   // 10 ms
  int fft_size = 512;
};

struct MelConfig {
  FrameConfig frame;
  int num_mels = 23;
  double low_freq = 20.0;
  double high_freq = 7800.0;
  double preemphasis = 0.97;
  double energy_floor = 1e-10;
};

inline int num_frames(std::size_t num_samples, const FrameConfig& cfg = {}) {
  if (num_samples < static_cast<std::size_t>(cfg.frame_length)) return 0;
  return 1 + static_cast<int>((num_samples - static_cast<std::size_t>(cfg.frame_length)) /
                              static_cast<std::size_t>(cfg.frame_shift));
}

inline std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

inline double hz_to_mel(double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::exp(mel / 1127.0) - 1.0); }

/// num_mels x (fft_size/2+1) triangular filters, equally spaced on the mel scale.
inline Matrix mel_filterbank(const MelConfig& cfg) {
  const int bins = cfg.frame.fft_size / 2 + 1;
  Matrix fb = Matrix::Zero(cfg.num_mels, bins);
  const double lo = hz_to_mel(cfg.low_freq), hi = hz_to_mel(cfg.high_freq);
  const double step = (hi - lo) / (cfg.num_mels + 1);
  for (int m = 0; m < cfg.num_mels; ++m) {
    const double left = lo + m * step, center = left + step, right = center + step;
    for (int k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(static_cast<double>(k) * cfg.frame.sample_rate / cfg.frame.fft_size);
      if (mel > left && mel < right)
        fb(m, k) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
    }
  }
  return fb;
}

/// |X(k)|^2 of each Hann-windowed frame, T x (fft_size/2+1).
class PowerSpectrogram {
 public:
  explicit PowerSpectrogram(const FrameConfig& cfg = {}) : cfg_(cfg), window_(hann_window(cfg.frame_length)) {
    fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  }

  Matrix operator()(std::span<const double> samples) {
    const int T = num_frames(samples.size(), cfg_);
    const int bins = cfg_.fft_size / 2 + 1;
    Matrix out(T, bins);
    std::vector<double> buf(static_cast<std::size_t>(cfg_.fft_size));
    std::vector<std::complex<double>> spec;
    for (int t = 0; t < T; ++t) {
      std::fill(buf.begin(), buf.end(), 0.0);
      const std::size_t start = static_cast<std::size_t>(t) * static_cast<std::size_t>(cfg_.frame_shift);
      for (int n = 0; n < cfg_.frame_length; ++n)
        buf[static_cast<std::size_t>(n)] = samples[start + static_cast<std::size_t>(n)] * window_[static_cast<std::size_t>(n)];
      fft_.fwd(spec, buf);
      for (int k = 0; k < bins; ++k) out(t, k) = std::norm(spec[static_cast<std::size_t>(k)]);
    }
    return out;
  }

 private:
  FrameConfig cfg_;
  std::vector<double> window_;
  Eigen::FFT<double> fft_;
};

inline std::vector<double> preemphasize(std::span<const double> x, double coeff) {
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[n] = x[n] - (n > 0 ? coeff * x[n - 1] : 0.0);
  return y;
}

/// Mel filterbank energies in the linear power domain, T x num_mels. Signal
/// and noise energies add in expectation, which model compensation relies on.
inline Matrix mel_energies(std::span<const double> samples, const MelConfig& cfg = {}) {
  if (samples.empty()) throw DomainError("mel_energies: empty signal");
  if (num_frames(samples.size(), cfg.frame) < 1) throw DomainError("mel_energies: signal shorter than one frame");
  const auto emphasized = preemphasize(samples, cfg.preemphasis);
  PowerSpectrogram spectrogram(cfg.frame);
  const Matrix power = spectrogram(emphasized);
  return power * mel_filterbank(cfg).transpose();
}

inline Matrix log_mel(std::span<const double> samples, const MelConfig& cfg = {}) {
  return mel_energies(samples, cfg).array().max(cfg.energy_floor).log().matrix();
}

/// Orthonormal DCT-II basis, rows are output coefficients.
inline Matrix dct_matrix(int n) {
  Matrix c(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) c(k, i) = scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
  }
  return c;
}

/// Cepstral coefficients 0..num_keep-1 of each frame.
inline Matrix mfcc_frames(std::span<const double> samples, int num_keep = 5, const MelConfig& cfg = {}) {
  if (num_keep < 1 || num_keep > cfg.num_mels) throw DomainError("mfcc_frames: num_keep out of range");
  const Matrix logmel = log_mel(samples, cfg);
  return logmel * dct_matrix(cfg.num_mels).topRows(num_keep).transpose();
}

}  // namespace avf::signal
