// include/avfusion/decode/graph.hpp

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
#include <limits>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/synth/world.hpp"

namespace avf::decode {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Arc {
  int from = 0;
  int to = 0;
  double log_prob = 0.0;
  int word_entry = -1;  // word started by taking this arc, or -1
};

/// Word-loop decoding graph: one emitting node per tied state, word-internal
/// left-to-right chains with self-loops, and bigram-weighted arcs from each
/// word's last state to every word's first state.
class DecodingGraph {
 public:
  DecodingGraph(std::vector<std::vector<int>> lexicon, int num_states, double self_loop_prob, const Vector& lm_start,
                const Matrix& lm_bigram, double lm_scale = 1.0)
      : lexicon_(std::move(lexicon)), num_states_(num_states), lm_scale_(lm_scale) {
    const int V = static_cast<int>(lexicon_.size());
    if (V < 1) throw DomainError("decoding graph needs at least one word");
    if (lm_start.size() != V || lm_bigram.rows() != V || lm_bigram.cols() != V)
      throw ShapeError("language model does not match the lexicon size");
    if (!(self_loop_prob >= 0.0 && self_loop_prob < 1.0)) throw DomainError("self-loop probability must be in [0, 1)");
    node_word_.assign(static_cast<std::size_t>(num_states), -1);
    for (int w = 0; w < V; ++w) {
      const auto& chain = lexicon_[static_cast<std::size_t>(w)];
      if (chain.empty()) throw DomainError("word " + std::to_string(w) + " has no states");
      for (int s : chain) {
        if (s < 0 || s >= num_states) throw DomainError("lexicon state out of range");
        if (node_word_[static_cast<std::size_t>(s)] != -1) throw DomainError("state shared between words");
        node_word_[static_cast<std::size_t>(s)] = w;
      }
    }
    for (int s = 0; s < num_states; ++s)
      if (node_word_[static_cast<std::size_t>(s)] < 0) throw DomainError("state " + std::to_string(s) + " is unreachable");

    const double log_self = self_loop_prob > 0.0 ? std::log(self_loop_prob) : kNegInf;
    const double log_leave = std::log(1.0 - self_loop_prob);
    for (int w = 0; w < V; ++w) {
      const auto& chain = lexicon_[static_cast<std::size_t>(w)];
      for (std::size_t p = 0; p < chain.size(); ++p) {
        if (log_self > kNegInf) arcs_.push_back({chain[p], chain[p], log_self, -1});
        if (p + 1 < chain.size()) arcs_.push_back({chain[p], chain[p + 1], log_leave, -1});
      }
      for (int u = 0; u < V; ++u)
        arcs_.push_back({chain.back(), lexicon_[static_cast<std::size_t>(u)].front(),
                         log_leave + lm_scale * std::log(lm_bigram(w, u)), u});
    }
    start_.resize(static_cast<std::size_t>(V));
    for (int w = 0; w < V; ++w) start_[static_cast<std::size_t>(w)] = lm_scale * std::log(lm_start(w));

    incoming_.resize(static_cast<std::size_t>(num_states));
    for (std::size_t a = 0; a < arcs_.size(); ++a) incoming_[static_cast<std::size_t>(arcs_[a].to)].push_back(static_cast<int>(a));
    // Predecessors ordered by source state, plain arcs before word entries.
    for (auto& in : incoming_)
      std::sort(in.begin(), in.end(), [&](int x, int y) {
        const auto &ax = arcs_[static_cast<std::size_t>(x)], &ay = arcs_[static_cast<std::size_t>(y)];
        if (ax.from != ay.from) return ax.from < ay.from;
        return ax.word_entry < ay.word_entry;
      });
  }

  int num_states() const { return num_states_; }
  int num_words() const { return static_cast<int>(lexicon_.size()); }
  double lm_scale() const { return lm_scale_; }
  const std::vector<std::vector<int>>& lexicon() const { return lexicon_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(int a) const { return arcs_[static_cast<std::size_t>(a)]; }
  const std::vector<int>& incoming(int state) const { return incoming_[static_cast<std::size_t>(state)]; }
  int word_of(int state) const { return node_word_[static_cast<std::size_t>(state)]; }
  bool is_word_final(int state) const { return lexicon_[static_cast<std::size_t>(word_of(state))].back() == state; }

  /// Log-score of starting in `state` (only word-initial states can start).
  double start_score(int state) const {
    const int w = word_of(state);
    return lexicon_[static_cast<std::size_t>(w)].front() == state ? start_[static_cast<std::size_t>(w)] : kNegInf;
  }

  /// Probability-domain sum over the outgoing arcs of `state`, excluding LM
  /// scaling effects only when lm_scale == 1.
  double outgoing_mass(int state) const {
    double m = 0.0;
    for (const auto& a : arcs_)
      if (a.from == state) m += std::exp(a.log_prob);
    return m;
  }

 private:
  std::vector<std::vector<int>> lexicon_;
  int num_states_;
  double lm_scale_;
  std::vector<int> node_word_;
  std::vector<Arc> arcs_;
  std::vector<double> start_;
  std::vector<std::vector<int>> incoming_;
};

inline DecodingGraph build_decoding_graph(const synth::World& w, double lm_scale = 1.0) {
  return DecodingGraph(w.lexicon, w.num_states(), w.self_loop_prob(), w.lm_start, w.lm_bigram, lm_scale);
}

}  // namespace avf::decode
