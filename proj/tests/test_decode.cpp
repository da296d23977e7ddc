// tests/test_decode.cpp

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

#include <random>
#include <string>

#include "avfusion/decode/graph.hpp"
#include "avfusion/decode/viterbi.hpp"
#include "avfusion/decode/wer.hpp"
#include "oracles.hpp"

namespace avf::decode {
namespace {

DecodingGraph graph_of(const oracle::ToyModel& m) {
  return DecodingGraph(m.lexicon, m.num_states, m.self_loop, m.lm_start, m.lm_bigram, m.lm_scale);
}

Matrix random_scores(std::mt19937_64& rng, int T, int S) {
  std::normal_distribution<double> n(0.0, 2.0);
  Matrix m(T, S);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(Graph, SingleWordLoop) {
  Vector start(1);
  start << 1.0;
  const Matrix bigram = Matrix::Ones(1, 1);
  const DecodingGraph g({{0, 1}}, 2, 0.75, start, bigram);
  // self loops on both states, 0->1, and the loop from 1 back to 0
  ASSERT_EQ(g.arcs().size(), 4u);
  int loops = 0;
  for (const auto& a : g.arcs())
    if (a.word_entry == 0) {
      ++loops;
      EXPECT_EQ(a.from, 1);
      EXPECT_EQ(a.to, 0);
    }
  EXPECT_EQ(loops, 1);
  EXPECT_NEAR(g.outgoing_mass(0), 1.0, 1e-12);
  EXPECT_NEAR(g.outgoing_mass(1), 1.0, 1e-12);
  EXPECT_EQ(g.start_score(1), kNegInf);
}

TEST(Graph, TwoWordHandCount) {
  // word 0 = states {0,1}, word 1 = state {2}
  Vector start(2);
  start << 0.4, 0.6;
  Matrix bigram(2, 2);
  bigram << 0.3, 0.7, 0.9, 0.1;
  const DecodingGraph g({{0, 1}, {2}}, 3, 0.5, start, bigram);
  // 3 self loops + 1 internal + 2x2 word transitions
  EXPECT_EQ(g.arcs().size(), 8u);
  EXPECT_EQ(g.num_states(), 3);
  EXPECT_EQ(g.num_words(), 2);
  for (int s = 0; s < 3; ++s) EXPECT_NEAR(g.outgoing_mass(s), 1.0, 1e-12);
  EXPECT_NEAR(g.start_score(0), std::log(0.4), 1e-15);
  EXPECT_NEAR(g.start_score(2), std::log(0.6), 1e-15);
  EXPECT_TRUE(g.is_word_final(1));
  EXPECT_FALSE(g.is_word_final(0));
  EXPECT_TRUE(g.is_word_final(2));
}

TEST(Graph, Errors) {
  Vector start = Vector::Constant(2, 0.5);
  Matrix bigram = Matrix::Constant(2, 2, 0.5);
  EXPECT_THROW(DecodingGraph({{0}, {1}}, 3, 0.5, start, bigram), DomainError);
  EXPECT_THROW(DecodingGraph({{0}, {0}}, 1, 0.5, start, bigram), DomainError);
  EXPECT_THROW(DecodingGraph({{0}, {1}}, 2, 1.0, start, bigram), DomainError);
  EXPECT_THROW(DecodingGraph({{0}, {1}, {2}}, 3, 0.5, start, bigram), ShapeError);
}

TEST(Viterbi, SingleFrameOneHot) {
  Vector start = Vector::Constant(2, 0.5);
  Matrix bigram = Matrix::Constant(2, 2, 0.5);
  const DecodingGraph g({{0, 1}, {2, 3}}, 4, 0.5, start, bigram);
  Matrix e = Matrix::Constant(1, 4, std::log(1e-8));
  e(0, 2) = 0.0;
  const auto r = viterbi_decode(e, g);
  EXPECT_EQ(r.words, std::vector<int>{1});
  EXPECT_EQ(r.states, std::vector<int>{2});
}

TEST(Viterbi, MatchesBruteForce) {
  std::mt19937_64 rng(101);
  int compared_paths = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto m = oracle::random_toy_model(rng);
    const int T = 1 + trial % 6;
    const Matrix e = random_scores(rng, T, m.num_states);
    const auto want = oracle::brute_viterbi(e, m);
    const auto got = viterbi_decode(e, graph_of(m));
    ASSERT_NEAR(got.score, want.score, 1e-9) << "trial " << trial;
    if (want.num_optimal == 1) {
      EXPECT_EQ(got.states, want.states) << "trial " << trial;
      EXPECT_EQ(got.words, want.words) << "trial " << trial;
      ++compared_paths;
    }
  }
  EXPECT_GT(compared_paths, 300);
}

TEST(Viterbi, UniformEmissionsFollowGraph) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_toy_model(rng);
    const int T = 1 + trial % 6;
    const Matrix e = Matrix::Constant(T, m.num_states, -std::log(static_cast<double>(m.num_states)));
    const auto want = oracle::brute_viterbi(e, m);
    const auto got = viterbi_decode(e, graph_of(m));
    EXPECT_NEAR(got.score, want.score, 1e-9);
    if (want.num_optimal == 1) {
      EXPECT_EQ(got.states, want.states);
    }
  }
}

TEST(Viterbi, AcousticScaleAndPriors) {
  std::mt19937_64 rng(3);
  const auto m = oracle::random_toy_model(rng);
  const Matrix e = random_scores(rng, 5, m.num_states);
  DecodeOptions opt;
  opt.acoustic_scale = 0.5;
  EXPECT_NEAR(viterbi_decode(e, graph_of(m), opt).score, oracle::brute_viterbi(0.5 * e, m).score, 1e-9);
  opt.acoustic_scale = 1.0;
  Vector prior = Vector::LinSpaced(m.num_states, -1.0, -2.0);
  opt.log_priors = prior;
  const Matrix shifted = e.rowwise() - prior.transpose();
  EXPECT_NEAR(viterbi_decode(e, graph_of(m), opt).score, oracle::brute_viterbi(shifted, m).score, 1e-9);
  EXPECT_THROW(viterbi_decode(Matrix::Zero(2, m.num_states + 1), graph_of(m)), ShapeError);
  EXPECT_TRUE(viterbi_decode(Matrix::Zero(0, m.num_states), graph_of(m)).words.empty());
}

TEST(ForcedAlign, MatchesBruteForce) {
  std::mt19937_64 rng(202);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto m = oracle::random_toy_model(rng);
    const int V = static_cast<int>(m.lexicon.size());
    std::vector<int> transcript;
    const int len = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) transcript.push_back(static_cast<int>(rng() % static_cast<unsigned>(V)));
    int L = 0;
    for (int w : transcript) L += static_cast<int>(m.lexicon[static_cast<std::size_t>(w)].size());
    if (L > 6) continue;
    const int T = L + static_cast<int>(rng() % static_cast<unsigned>(7 - L));
    const Matrix lp = random_scores(rng, T, m.num_states);
    const auto want = oracle::brute_forced_align(transcript, lp, m);
    const auto got = forced_align(transcript, lp, graph_of(m));
    ASSERT_EQ(static_cast<int>(got.size()), T);
    if (want.num_optimal == 1) {
      EXPECT_EQ(got.states(), want.states) << "trial " << trial;
    }
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(ForcedAlign, SingleStateWordAndMonotone) {
  Vector start = Vector::Constant(2, 0.5);
  Matrix bigram = Matrix::Constant(2, 2, 0.5);
  const DecodingGraph g({{0}, {1, 2, 3}}, 4, 0.6, start, bigram);
  std::mt19937_64 rng(1);
  const Matrix lp = random_scores(rng, 9, 4);
  EXPECT_EQ(forced_align({0}, lp, g).states(), std::vector<int>(9, 0));
  const auto a = forced_align({1, 0, 1}, lp, g);
  const std::vector<int> chain = {1, 2, 3, 0, 1, 2, 3};
  std::size_t j = 0;
  EXPECT_EQ(a[0], chain[0]);
  for (std::size_t t = 1; t < a.size(); ++t) {
    if (a[t] != chain[j]) {
      ++j;
      ASSERT_LT(j, chain.size());
      EXPECT_EQ(a[t], chain[j]);
    }
  }
  EXPECT_EQ(j, chain.size() - 1);
  EXPECT_EQ(forced_align({1, 1, 1}, lp, g).size(), 9u);
  EXPECT_THROW(forced_align({1, 1, 1}, lp.topRows(8), g), DomainError);
  EXPECT_THROW(forced_align({}, lp, g), DomainError);
  EXPECT_THROW(forced_align({5}, lp, g), DomainError);
}

TEST(Wer, Examples) {
  using W = std::vector<std::string>;
  auto r = wer(W{"a", "b", "c"}, W{"a", "x", "c"});
  EXPECT_EQ(r.substitutions, 1);
  EXPECT_NEAR(r.wer(), 1.0 / 3.0, 1e-15);
  r = wer(W{"a", "b"}, W{});
  EXPECT_EQ(r.deletions, 2);
  EXPECT_DOUBLE_EQ(r.wer(), 1.0);
  EXPECT_EQ(wer(W{"a", "b"}, W{"a", "b"}).wer(), 0.0);
  r = wer(W{"a"}, W{"b", "a", "c"});
  EXPECT_EQ(r.insertions, 2);
  EXPECT_EQ(r.substitutions + r.deletions, 0);
}

TEST(Wer, RandomAgainstEditDistanceAndRenaming) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> a, b;
    for (int i = 0; i < static_cast<int>(rng() % 7); ++i) a.push_back(static_cast<int>(rng() % 4));
    for (int i = 0; i < static_cast<int>(rng() % 7); ++i) b.push_back(static_cast<int>(rng() % 4));
    const auto r = wer(a, b);
    EXPECT_EQ(r.substitutions + r.deletions + r.insertions, oracle::edit_distance(a, b));
    EXPECT_EQ(r.reference_length - r.deletions + r.insertions, static_cast<int>(b.size()));
    std::vector<int> ra = a, rb = b;
    for (int& x : ra) x = (x * 3 + 1) % 4;
    for (int& x : rb) x = (x * 3 + 1) % 4;
    EXPECT_EQ(wer(ra, rb).wer(), r.wer());
    EXPECT_EQ(wer(a, a).wer(), 0.0);
  }
}

TEST(Wer, Accumulates) {
  WerReport total;
  total += wer(std::vector<int>{1, 2, 3}, std::vector<int>{1, 3});
  total += wer(std::vector<int>{4}, std::vector<int>{5});
  EXPECT_EQ(total.reference_length, 4);
  EXPECT_DOUBLE_EQ(total.wer(), 0.5);
}

}  // namespace
}  // namespace avf::decode
