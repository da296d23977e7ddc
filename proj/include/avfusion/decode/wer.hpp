// include/avfusion/decode/wer.hpp

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
#include <string>
#include <vector>

namespace avf::decode {

struct WerReport {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int reference_length = 0;
  /// Set when the reference is empty; wer is then 0 for an empty hypothesis
  /// and 1 otherwise.
  bool empty_reference = false;

  int errors() const { return substitutions + deletions + insertions; }
  double wer() const {
    if (reference_length == 0) return insertions > 0 ? 1.0 : 0.0;
    return static_cast<double>(errors()) / reference_length;
  }

  WerReport& operator+=(const WerReport& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    reference_length += o.reference_length;
    empty_reference = reference_length == 0;
    return *this;
  }
};

/// Unit-cost Levenshtein alignment; on equal cost the backtrace prefers
/// match/substitution, then deletion, then insertion.
template <class Token>
WerReport wer(const std::vector<Token>& ref, const std::vector<Token>& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1), d[i - 1][j] + 1, d[i][j - 1] + 1});

  WerReport r;
  r.reference_length = static_cast<int>(n);
  r.empty_reference = n == 0;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++r.substitutions;
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++r.deletions;
      --i;
    } else {
      ++r.insertions;
      --j;
    }
  }
  return r;
}

}  // namespace avf::decode
