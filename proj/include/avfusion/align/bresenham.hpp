// include/avfusion/align/bresenham.hpp

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

#include <cstddef>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf {

/// For each target (audio-rate) frame t, the source (video-rate) frame v(t).
struct FrameMap {
  std::vector<int> source;
  int num_sources = 0;

  std::size_t size() const { return source.size(); }
  int operator[](std::size_t t) const { return source[t]; }
};

/// Spreads `sources` frames over `targets` slots with the integer
/// line-drawing recurrence. The error term tracks t*V mod T, so v(t) equals
/// floor(t*V/T) without any division in the loop.
inline FrameMap bresenham_map(int targets, int sources) {
  if (sources < 1) throw DomainError("bresenham_map: need at least one source frame");
  if (sources > targets)
    throw DomainError("bresenham_map: source count " + std::to_string(sources) +
                      " exceeds target count " + std::to_string(targets));
  FrameMap map;
  map.num_sources = sources;
  map.source.resize(static_cast<std::size_t>(targets));
  int v = 0;
  long long err = 0;
  for (int t = 0; t < targets; ++t) {
    map.source[static_cast<std::size_t>(t)] = v;
    err += sources;
    if (err >= targets) {
      err -= targets;
      ++v;
    }
  }
  return map;
}

/// Row t of the result is row v(t) of `features` (first-order hold).
inline Matrix align_stream(const Matrix& features, const FrameMap& map) {
  if (features.rows() != map.num_sources)
    throw ShapeError("align_stream: map expects " + std::to_string(map.num_sources) +
                     " source frames, got " + std::to_string(features.rows()));
  Matrix out(static_cast<Eigen::Index>(map.size()), features.cols());
  for (std::size_t t = 0; t < map.size(); ++t) out.row(static_cast<Eigen::Index>(t)) = features.row(map[t]);
  return out;
}

}  // namespace avf
