// tests/test_reliability.cpp

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

#include <algorithm>
#include <cmath>
#include <random>

#include "avfusion/reliability/model_measures.hpp"
#include "avfusion/reliability/reliability_vector.hpp"

namespace avf::reliability {
namespace {

using V = std::vector<double>;

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(V{.25, .25, .25, .25}), std::log(4.0), 1e-12);
  const Matrix oh = normalize_rows((Matrix(1, 4) << 1, 0, 0, 0).finished());
  EXPECT_LT(entropy(V(oh.data(), oh.data() + 4)), 1e-6);
  const double h = -(0.7 * std::log(0.7) + 0.2 * std::log(0.2) + 0.1 * std::log(0.1));
  EXPECT_NEAR(entropy(V{.7, .2, .1}), h, 1e-12);
  EXPECT_NEAR(entropy(V{.7, .2, .1}), 0.80182, 5e-6);
}

TEST(Dispersion, Examples) {
  EXPECT_NEAR(dispersion(V{.25, .25, .25, .25}), 0.0, 1e-15);
  EXPECT_NEAR(dispersion(V{.5, .3, .2}, 2), std::log(5.0 / 3.0), 1e-12);
  const double k3 = (std::log(5.0 / 3.0) + std::log(5.0 / 2.0) + std::log(3.0 / 2.0)) / 3.0;
  EXPECT_NEAR(dispersion(V{.5, .3, .2}, 3), k3, 1e-12);
  EXPECT_NEAR(dispersion(V{.2, .5, .3}, 3), k3, 1e-12);
  EXPECT_NEAR(k3, 0.6109, 5e-5);
  // K larger than S is clamped to S.
  EXPECT_NEAR(dispersion(V{.5, .3, .2}), k3, 1e-12);
}

TEST(PosteriorDifference, Examples) {
  EXPECT_NEAR(posterior_difference(V{.25, .25, .25, .25}), 0.0, 1e-15);
  const double d = (std::log(5.0 / 3.0) + std::log(5.0 / 2.0)) / 2.0;
  EXPECT_NEAR(posterior_difference(V{.5, .3, .2}, 3), d, 1e-12);
  EXPECT_NEAR(d, 0.7136, 5e-5);
  const double eps = 1e-8;
  const double big = (std::log((1 - 2 * eps) / eps) * 2) / 2.0;
  EXPECT_NEAR(posterior_difference(V{1 - 2 * eps, eps, eps}, 3), big, 1e-9);
}

TEST(Kl, Examples) {
  const double d = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(kl_divergence(V{.5, .5}, V{.25, .75}), d, 1e-12);
  EXPECT_NEAR(d, 0.14384, 5e-6);
  EXPECT_EQ(kl_divergence(V{.3, .7}, V{.3, .7}), 0.0);
  EXPECT_THROW(kl_divergence(V{1}, V{.5, .5}), ShapeError);
}

TEST(Ratios, Examples) {
  auto eh = entropy_ratio(V{1, 2, 3});
  EXPECT_NEAR(eh[0], 1.0 / 10003.0, 1e-15);
  EXPECT_NEAR(eh[1], 2.0 / 10003.0, 1e-15);
  EXPECT_NEAR(eh[2], 10000.0 / 10003.0, 1e-15);
  eh = entropy_ratio(V{0, 0, 3});
  EXPECT_EQ(eh, (V{0, 0, 1}));
  for (double w : entropy_ratio(V{0.7, 0.7, 0.7})) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);

  auto dr = dispersion_ratio(V{1, 2, 3});
  EXPECT_NEAR(dr[0], 1e-4 / 5.0001, 1e-15);
  EXPECT_NEAR(dr[1], 2.0 / 5.0001, 1e-15);
  EXPECT_NEAR(dr[2], 3.0 / 5.0001, 1e-15);
  dr = dispersion_ratio(V{5, 0, 0});
  EXPECT_NEAR(dr[0], 5.0 / 5.0002, 1e-15);
  EXPECT_NEAR(dr[1], 1e-4 / 5.0002, 1e-15);
  for (double w : dispersion_ratio(V{2, 2, 2})) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
  // All-zero entropies fall back to uniform.
  for (double w : entropy_ratio(V{0, 0, 0})) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(TemporalDivergence, StaticIsZeroAndTailHolds) {
  Matrix p = Matrix::Constant(40, 3, 1.0 / 3.0);
  auto d = temporal_divergence(p, 25, 5);
  EXPECT_FALSE(d.too_short);
  EXPECT_EQ(d.values.cwiseAbs().maxCoeff(), 0.0);

  // Two-frame toy: lag 1, window 1.
  Matrix q(2, 2);
  q << .5, .5, .25, .75;
  d = temporal_divergence(q, 1, 1);
  const double expect = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  EXPECT_NEAR(d.values(0), expect, 1e-12);
  EXPECT_NEAR(d.values(1), expect, 1e-12);  // held

  d = temporal_divergence(q, 2, 1);
  EXPECT_TRUE(d.too_short);
  EXPECT_EQ(d.values.size(), 2);
}

TEST(TemporalDivergence, WindowMeans) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Matrix raw(13, 4);
  for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = u(rng);
  const Matrix p = normalize_rows(raw);
  const auto d = temporal_divergence(p, 3, 5);
  std::vector<double> kl(13);
  for (int t = 0; t < 13; ++t) {
    const int a = std::min(t, 9), b = a + 3;
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += p(a, k) * std::log(p(a, k) / p(b, k));
    kl[static_cast<std::size_t>(t)] = s;
  }
  for (int start : {0, 5, 10}) {
    const int len = std::min(5, 13 - start);
    double m = 0.0;
    for (int t = start; t < start + len; ++t) m += kl[static_cast<std::size_t>(t)];
    m /= len;
    for (int t = start; t < start + len; ++t) EXPECT_NEAR(d.values(t), m, 1e-12);
  }
}

TEST(ModelMeasures, RandomBoundsAndPermutationInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int S = 2 + trial % 30;
    Matrix raw(2, S);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = std::pow(u(rng), 4.0);
    raw(0, 0) += 1e-3;
    raw(1, 0) += 1e-3;
    const Matrix p = normalize_rows(raw);
    V a, b;
    for (int s = 0; s < S; ++s) {
      a.push_back(p(0, s));
      b.push_back(p(1, s));
    }
    const double h = entropy(a);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(S) + 1e-12);
    EXPECT_GE(dispersion(a), 0.0);
    EXPECT_GE(posterior_difference(a), 0.0);
    EXPECT_GE(kl_divergence(a, b), 0.0);
    V shuffled = a;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_NEAR(dispersion(shuffled), dispersion(a), 1e-12);
    EXPECT_NEAR(posterior_difference(shuffled), posterior_difference(a), 1e-12);
    const V hs = {h, entropy(b), u(rng)};
    for (const auto& w : {entropy_ratio(hs), dispersion_ratio(hs)}) {
      double sum = 0.0;
      for (double x : w) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(ModelMeasures, ComputeAllStreams) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<PosteriorSequence> streams;
  for (StreamId s : kAllStreams) {
    Matrix raw(60, 5);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = u(rng);
    streams.emplace_back(s, raw);
  }
  const auto m = compute_model_reliability(streams);
  EXPECT_FALSE(m.divergence_too_short);
  for (int i = 0; i < kNumStreams; ++i) {
    EXPECT_EQ(m.per_stream[static_cast<std::size_t>(i)].rows(), 60);
    EXPECT_EQ(m.per_stream[static_cast<std::size_t>(i)].cols(), kNumModelMeasures);
  }
  for (Eigen::Index t = 0; t < 60; ++t) {
    double se = 0.0, sd = 0.0;
    for (const auto& b : m.per_stream) {
      se += b(t, static_cast<int>(ModelMeasure::EntropyRatio));
      sd += b(t, static_cast<int>(ModelMeasure::DispersionRatio));
    }
    EXPECT_NEAR(se, 1.0, 1e-12);
    EXPECT_NEAR(sd, 1.0, 1e-12);
  }
  std::vector<PosteriorSequence> short_streams;
  for (StreamId s : kAllStreams) short_streams.emplace_back(s, Matrix::Ones(10, 3));
  EXPECT_TRUE(compute_model_reliability(short_streams).divergence_too_short);
}

TEST(Layout, DimensionAndRoundTrip) {
  const ReliabilityLayout layout;
  EXPECT_EQ(layout.dim(), 41);
  EXPECT_EQ(static_cast<Eigen::Index>(layout.column_names().size()), 41);
  // Input dimension of the fusion network at 3856 tied states.
  EXPECT_EQ(3 * 3856 + layout.dim(), 11609);

  const int T = 7;
  std::mt19937_64 rng(9);
  auto rnd = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::normal_distribution<double>()(rng);
    return m;
  };
  AudioSignalFeatures a{rnd(T, 5), rnd(T, 5), rnd(T, 1), rnd(T, 1), rnd(T, 1), rnd(T, 1)};
  VideoSignalFeatures v{rnd(T, 1), rnd(T, 5), rnd(T, 1), rnd(T, 1), rnd(T, 1)};
  ModelReliability m;
  for (auto& b : m.per_stream) b = rnd(T, kNumModelMeasures);
  const Matrix r = assemble_reliability_vector(layout, a, v, m);
  ASSERT_EQ(r.cols(), 41);
  EXPECT_EQ(layout.extract(r, "audio.mfcc"), a.mfcc);
  EXPECT_EQ(layout.extract(r, "audio.delta_mfcc"), a.delta_mfcc);
  EXPECT_EQ(layout.extract(r, "audio.voicing"), Matrix(a.voicing));
  EXPECT_EQ(layout.extract(r, "video.idct"), v.idct);
  EXPECT_EQ(layout.extract(r, "video.rotation"), Matrix(v.rotation));
  EXPECT_EQ(layout.extract(r, "model.VA"), m.per_stream[1]);
  EXPECT_THROW(layout.slice("nope"), ShapeError);

  AudioSignalFeatures za{Matrix::Zero(T, 5), Matrix::Zero(T, 5), Vector::Zero(T), Vector::Zero(T), Vector::Zero(T),
                         Vector::Zero(T)};
  VideoSignalFeatures zv{Vector::Zero(T), Matrix::Zero(T, 5), Vector::Zero(T), Vector::Zero(T), Vector::Zero(T)};
  ModelReliability zm;
  for (auto& b : zm.per_stream) b = Matrix::Zero(T, kNumModelMeasures);
  EXPECT_EQ(assemble_reliability_vector(layout, za, zv, zm), Matrix::Zero(T, 41));

  a.mfcc = rnd(T + 1, 5);
  EXPECT_THROW(assemble_reliability_vector(layout, a, v, m), ShapeError);
}

}  // namespace
}  // namespace avf::reliability
