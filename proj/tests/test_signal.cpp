// tests/test_signal.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "avfusion/signal/delta.hpp"
#include "avfusion/signal/image.hpp"
#include "avfusion/signal/mfcc.hpp"
#include "avfusion/signal/pitch.hpp"
#include "avfusion/signal/snr.hpp"
#include "avfusion/synth/corpus.hpp"
#include "avfusion/synth/world.hpp"
#include "oracles.hpp"

namespace avf::signal {
namespace {

std::vector<double> tone(double hz, int n, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = amp * std::sin(2.0 * std::numbers::pi * hz * i / 16000.0);
  return x;
}

std::vector<double> white(int n, std::uint64_t seed, double sd = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = g(rng);
  return x;
}

TEST(Mfcc, SilenceIsConstant) {
  const std::vector<double> zeros(4000, 0.0);
  const Matrix c = mfcc_frames(zeros);
  ASSERT_EQ(c.rows(), num_frames(4000));
  ASSERT_EQ(c.cols(), 5);
  for (Eigen::Index t = 1; t < c.rows(); ++t) EXPECT_LT((c.row(t) - c.row(0)).cwiseAbs().maxCoeff(), 1e-12);
  // Only c0 is nonzero: the DCT of a constant log-floor vector.
  EXPECT_NEAR(c(0, 0), std::log(1e-10) * std::sqrt(23.0), 1e-9);
  EXPECT_LT(c.row(0).tail(4).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Mfcc, ToneMatchesDirectFilterbank) {
  const auto x = tone(1000.0, 2000);
  const Matrix e = mel_energies(x);
  // Direct DFT of frame 3 with pre-emphasis and Hann window.
  const int t = 3, N = 512;
  std::vector<double> frame(N, 0.0);
  for (int n = 0; n < 400; ++n) {
    const std::size_t i = static_cast<std::size_t>(t * 160 + n);
    const double pre = x[i] - 0.97 * x[i - 1];
    frame[static_cast<std::size_t>(n)] = pre * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / 399.0));
  }
  std::vector<double> power(N / 2 + 1);
  for (int k = 0; k <= N / 2; ++k) {
    std::complex<double> s = 0.0;
    for (int n = 0; n < N; ++n) s += frame[static_cast<std::size_t>(n)] * std::polar(1.0, -2.0 * std::numbers::pi * k * n / N);
    power[static_cast<std::size_t>(k)] = std::norm(s);
  }
  auto mel = [](double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); };
  const double lo = mel(20.0), step = (mel(7800.0) - lo) / 24.0;
  int best_band = -1;
  double best_dist = 1e9;
  for (int m = 0; m < 23; ++m) {
    double sum = 0.0;
    for (int k = 0; k <= N / 2; ++k) {
      const double f = mel(k * 16000.0 / N), l = lo + m * step, c = l + step, r = c + step;
      double w = 0.0;
      if (f > l && f <= c) w = (f - l) / step;
      if (f > c && f < r) w = (r - f) / step;
      sum += w * power[static_cast<std::size_t>(k)];
    }
    EXPECT_NEAR(e(t, m), sum, 1e-8 * std::max(1.0, sum));
    const double dist = std::abs(lo + (m + 1) * step - mel(1000.0));
    if (dist < best_dist) {
      best_dist = dist;
      best_band = m;
    }
  }
  Eigen::Index arg;
  e.row(t).maxCoeff(&arg);
  EXPECT_EQ(arg, best_band);
  EXPECT_GT(mfcc_frames(x)(t, 0), mfcc_frames(std::vector<double>(2000, 0.0))(t, 0));
}

TEST(Mfcc, ShiftByOneFrame) {
  const auto x = white(3000, 4);
  std::vector<double> shifted(160, 0.0);
  const auto pre = white(160, 5);
  std::copy(pre.begin(), pre.end(), shifted.begin());
  shifted.insert(shifted.end(), x.begin(), x.end());
  const Matrix a = mfcc_frames(x), b = mfcc_frames(shifted);
  for (Eigen::Index t = 1; t < a.rows(); ++t) EXPECT_LT((a.row(t) - b.row(t + 1)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Delta, ConstantRampAndLeastSquares) {
  EXPECT_EQ(delta(Matrix::Constant(9, 3, 2.5)).cwiseAbs().maxCoeff(), 0.0);
  Matrix ramp(10, 1);
  for (int t = 0; t < 10; ++t) ramp(t, 0) = 1.5 * t - 2.0;
  const Matrix d = delta(ramp);
  for (int t = 2; t < 8; ++t) EXPECT_NEAR(d(t, 0), 1.5, 1e-12);

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x(5, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::normal_distribution<double>()(rng);
    const int win = 1 + trial % 3;
    const Matrix dx = delta(x, win);
    for (int c = 0; c < 2; ++c)
      for (int t = 0; t < 5; ++t) EXPECT_NEAR(dx(t, c), oracle::ls_slope(x.col(c), t, win), 1e-12);
  }
  EXPECT_THROW(delta(ramp, 0), DomainError);
}

TEST(Snr, OracleTrack) {
  const auto s = white(2000, 1), n = white(2000, 1);
  const Vector eq = oracle_frame_snr(s, n);
  EXPECT_LT(eq.cwiseAbs().maxCoeff(), 1e-12);
  const Vector cap = oracle_frame_snr(s, std::vector<double>(2000, 0.0));
  EXPECT_EQ(cap.minCoeff(), kSnrCapDb);
  EXPECT_THROW(oracle_frame_snr(s, white(1999, 2)), ShapeError);
}

TEST(Snr, EstimatorFollowsOracleOnVoicedFrames) {
  // Minimum tracking on short utterances compresses the range: the estimate
  // moves about two thirds of a dB per true dB and reads low at high SNR.
  const auto w = synth::build_world(synth::WorldConfig{}, 3);
  auto voiced_bias = [&](double snr) {
    double err_sum = 0.0;
    long count = 0;
    for (int i = 0; i < 5; ++i) {
      const auto u = synth::mix_noise(synth::sample_utterance(w, 4, 50 + i), synth::NoiseKind::White, snr, 60 + i);
      const Vector oracle = oracle_frame_snr(u.clean, u.noise);
      const Vector est = estimate_frame_snr(u.mixture());
      const auto pitch = pitch_nccf(u.clean);
      EXPECT_EQ(oracle.size(), est.size());
      for (Eigen::Index t = 0; t < oracle.size(); ++t)
        if (pitch.voicing(t) >= 0.5) {
          err_sum += est(t) - oracle(t);
          ++count;
        }
    }
    EXPECT_GT(count, 100);
    return err_sum / static_cast<double>(count);
  };
  const double low = voiced_bias(-9.0), high = voiced_bias(9.0);
  EXPECT_LT(std::abs(low), 8.0);
  EXPECT_LT(std::abs(high), 8.0);
  // estimated rise over an 18 dB true rise
  EXPECT_GT(18.0 + high - low, 9.0);
}

TEST(Snr, EstimatorMonotoneInTrueSnr) {
  const std::vector<double> grid = {-9, -6, -3, 0, 3, 6, 9};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = synth::build_world(synth::WorldConfig{}, seed);
    const auto clean = synth::sample_utterance(w, 4, seed * 7);
    std::vector<double> est;
    for (double g : grid) {
      const auto u = synth::mix_noise(clean, synth::NoiseKind::White, g, seed * 11);
      est.push_back(estimate_frame_snr(u.mixture()).mean());
    }
    EXPECT_GE(oracle::spearman(grid, est), 0.9) << "seed " << seed;
  }
}

TEST(Pitch, Sawtooth) {
  std::vector<double> x(8000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 2.0 * std::fmod(static_cast<double>(i) * 100.0 / 16000.0, 1.0) - 1.0;
  const auto p = pitch_nccf(x);
  ASSERT_GT(p.f0.size(), 10);
  for (Eigen::Index t = 0; t < p.f0.size() - 4; ++t) EXPECT_NEAR(p.f0(t), 100.0, 1.0) << "frame " << t;
}

TEST(Pitch, WhiteNoiseAndSilence) {
  const auto p = pitch_nccf(white(16000, 9));
  int low = 0;
  for (Eigen::Index t = 0; t < p.voicing.size(); ++t) low += p.voicing(t) < 0.5;
  EXPECT_GE(low, static_cast<int>(0.9 * static_cast<double>(p.voicing.size())));
  EXPECT_GE(p.voicing.minCoeff(), 0.0);
  EXPECT_LE(p.voicing.maxCoeff(), 1.0);
  const auto s = pitch_nccf(std::vector<double>(4000, 0.0));
  EXPECT_EQ(s.voicing.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(s.f0.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Image, ConstantAndBrightness) {
  const Image c = Image::Constant(32, 32, 0.4);
  const Vector f = idct_features(c);
  EXPECT_NEAR(f(0), 32.0 * 0.4, 1e-12);
  EXPECT_LT(f.tail(4).cwiseAbs().maxCoeff(), 1e-12);
  std::mt19937_64 rng(3);
  Image img(32, 32);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = std::uniform_real_distribution<double>()(rng);
  const Vector a = idct_features(img, 10), b = idct_features((img.array() + 0.25).matrix(), 10);
  EXPECT_NEAR(b(0) - a(0), 32.0 * 0.25, 1e-12);
  EXPECT_LT((b.tail(9) - a.tail(9)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(idct_features(Image::Zero(8, 8)), ShapeError);
}

TEST(Image, DctMatchesNaiveSum) {
  std::mt19937_64 rng(8);
  for (int n : {4, 5, 8}) {
    Image img(n, n);
    for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = std::normal_distribution<double>()(rng);
    EXPECT_LT((dct2(img) - oracle::naive_dct2(img)).cwiseAbs().maxCoeff(), 1e-12);
  }
  const auto z = zigzag_order(4);
  const std::vector<std::pair<int, int>> head = {{0, 0}, {0, 1}, {1, 0}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < head.size(); ++i) EXPECT_EQ(z[i], head[i]);
}

TEST(Image, DistortionMeasures) {
  const auto d = image_distortion(Image::Constant(32, 32, 0.3));
  EXPECT_NEAR(d.brightness, 0.3, 1e-12);
  EXPECT_EQ(d.blur, 0.0);
  EXPECT_EQ(d.rotation, 1.0);

  Image sym(32, 32);
  std::mt19937_64 rng(2);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 16; ++c) sym(r, c) = sym(r, 31 - c) = std::uniform_real_distribution<double>()(rng);
  EXPECT_NEAR(image_distortion(sym).rotation, 1.0, 1e-12);

  Image board(32, 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) board(r, c) = (r + c) % 2;
  // Interior Laplacian response is -4 on ones and +4 on zeros, half each.
  EXPECT_NEAR(image_distortion(board).blur, 16.0, 1e-12);
}

}  // namespace
}  // namespace avf::signal
