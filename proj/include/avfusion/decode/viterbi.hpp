// include/avfusion/decode/viterbi.hpp

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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avfusion/decode/graph.hpp"

namespace avf::decode {

struct DecodeOptions {
  double acoustic_scale = 1.0;
  /// Pruning beam in log units; infinity keeps the search exact.
  double beam = std::numeric_limits<double>::infinity();
  /// Optional log state priors subtracted from the emissions (scaled
  /// likelihood convention). Off by default.
  std::optional<Vector> log_priors;
};

struct DecodeResult {
  std::vector<int> words;
  std::vector<int> states;
  double score = kNegInf;
};

/// Exact Viterbi search over the word-loop graph. Ties go to the lowest
/// predecessor state, then to the plain arc over a word-entry arc.
inline DecodeResult viterbi_decode(const Matrix& scores, const DecodingGraph& graph, const DecodeOptions& opts = {}) {
  const Eigen::Index T = scores.rows();
  const int S = graph.num_states();
  if (scores.cols() != S)
    throw ShapeError("score matrix has " + std::to_string(scores.cols()) + " states, graph has " + std::to_string(S));
  if (opts.log_priors && opts.log_priors->size() != S) throw ShapeError("prior vector does not match the graph");
  DecodeResult result;
  if (T == 0) return result;

  auto emission = [&](Eigen::Index t, int s) {
    double e = opts.acoustic_scale * scores(t, s);
    if (opts.log_priors) e -= (*opts.log_priors)(s);
    return e;
  };

  std::vector<double> prev(static_cast<std::size_t>(S)), cur(static_cast<std::size_t>(S));
  std::vector<int> back(static_cast<std::size_t>(T * S), -1);  // incoming arc index
  for (int s = 0; s < S; ++s) prev[static_cast<std::size_t>(s)] = graph.start_score(s) + emission(0, s);

  for (Eigen::Index t = 1; t < T; ++t) {
    double best_prev = kNegInf;
    for (double v : prev) best_prev = std::max(best_prev, v);
    const double threshold = best_prev - opts.beam;
    for (int s = 0; s < S; ++s) {
      double best = kNegInf;
      int best_arc = -1;
      for (int a : graph.incoming(s)) {
        const Arc& arc = graph.arc(a);
        const double p = prev[static_cast<std::size_t>(arc.from)];
        if (p == kNegInf || p < threshold) continue;
        const double v = p + arc.log_prob;
        if (v > best) {
          best = v;
          best_arc = a;
        }
      }
      cur[static_cast<std::size_t>(s)] = best_arc >= 0 ? best + emission(t, s) : kNegInf;
      back[static_cast<std::size_t>(t * S + s)] = best_arc;
    }
    std::swap(prev, cur);
  }

  int end = -1;
  double best = kNegInf;
  for (int s = 0; s < S; ++s)
    if (graph.is_word_final(s) && prev[static_cast<std::size_t>(s)] > best) {
      best = prev[static_cast<std::size_t>(s)];
      end = s;
    }
  if (end < 0)  // no complete word fits; fall back to the best partial path
    for (int s = 0; s < S; ++s)
      if (prev[static_cast<std::size_t>(s)] > best) {
        best = prev[static_cast<std::size_t>(s)];
        end = s;
      }
  if (end < 0) throw DomainError("viterbi_decode: no surviving path");

  result.score = best;
  result.states.assign(static_cast<std::size_t>(T), 0);
  std::vector<int> entries;  // word entries in reverse order
  int s = end;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    result.states[static_cast<std::size_t>(t)] = s;
    if (t == 0) {
      entries.push_back(graph.word_of(s));
      break;
    }
    const int a = back[static_cast<std::size_t>(t * S + s)];
    const Arc& arc = graph.arc(a);
    if (arc.word_entry >= 0) entries.push_back(arc.word_entry);
    s = arc.from;
  }
  result.words.assign(entries.rbegin(), entries.rend());
  return result;
}

inline DecodeResult viterbi_decode(const FusedLogPosterior& fused, const DecodingGraph& graph,
                                   const DecodeOptions& opts = {}) {
  return viterbi_decode(fused.scores(), graph, opts);
}

/// Viterbi restricted to the left-to-right chain of the transcript's states.
/// Returns the state per frame; the path starts in the first state and ends
/// in the last.
inline AlignmentTarget forced_align(const std::vector<int>& transcript, const Matrix& log_probs,
                                    const DecodingGraph& graph) {
  if (transcript.empty()) throw DomainError("forced_align: empty transcript");
  std::vector<int> chain;
  std::vector<double> enter;  // log-prob of entering chain[j] from chain[j-1]
  double log_self = kNegInf, log_leave = 0.0;
  for (const auto& a : graph.arcs())
    if (a.word_entry < 0 && a.from == a.to) log_self = a.log_prob;
  for (const auto& a : graph.arcs())
    if (a.word_entry < 0 && a.from != a.to) log_leave = a.log_prob;
  for (std::size_t k = 0; k < transcript.size(); ++k) {
    const int w = transcript[k];
    if (w < 0 || w >= graph.num_words()) throw DomainError("forced_align: word index " + std::to_string(w) + " is out of vocabulary");
    const auto& states = graph.lexicon()[static_cast<std::size_t>(w)];
    for (std::size_t p = 0; p < states.size(); ++p) {
      double e = log_leave;
      if (p == 0 && k > 0) {
        e = kNegInf;
        for (int a : graph.incoming(states[0])) {
          const Arc& arc = graph.arc(a);
          if (arc.word_entry == w && arc.from == graph.lexicon()[static_cast<std::size_t>(transcript[k - 1])].back())
            e = arc.log_prob;
        }
      }
      chain.push_back(states[p]);
      enter.push_back(e);
    }
  }
  const Eigen::Index T = log_probs.rows();
  const auto L = static_cast<Eigen::Index>(chain.size());
  if (log_probs.cols() != graph.num_states()) throw ShapeError("forced_align: posterior width does not match the graph");
  if (T < L)
    throw DomainError("forced_align: " + std::to_string(T) + " frames cannot cover " + std::to_string(L) + " states");

  std::vector<double> prev(static_cast<std::size_t>(L), kNegInf), cur(static_cast<std::size_t>(L));
  std::vector<char> advanced(static_cast<std::size_t>(T * L), 0);
  prev[0] = log_probs(0, chain[0]);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      const double stay = prev[static_cast<std::size_t>(j)] + log_self;
      const double adv = j > 0 ? prev[static_cast<std::size_t>(j - 1)] + enter[static_cast<std::size_t>(j)] : kNegInf;
      // Ties prefer the lower chain position as predecessor.
      const bool take_adv = adv >= stay && adv > kNegInf;
      const double best = take_adv ? adv : stay;
      cur[static_cast<std::size_t>(j)] = best > kNegInf ? best + log_probs(t, chain[static_cast<std::size_t>(j)]) : kNegInf;
      advanced[static_cast<std::size_t>(t * L + j)] = take_adv;
    }
    std::swap(prev, cur);
  }
  if (prev[static_cast<std::size_t>(L - 1)] == kNegInf) throw DomainError("forced_align: no complete path");
  std::vector<int> path(static_cast<std::size_t>(T));
  Eigen::Index j = L - 1;
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    path[static_cast<std::size_t>(t)] = chain[static_cast<std::size_t>(j)];
    if (t > 0 && advanced[static_cast<std::size_t>(t * L + j)]) --j;
  }
  return AlignmentTarget(std::move(path), graph.num_states());
}

}  // namespace avf::decode
