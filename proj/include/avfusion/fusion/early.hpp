// include/avfusion/fusion/early.hpp

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

#include <array>
#include <span>
#include <vector>

#include "avfusion/core/types.hpp"

namespace avf::fusion {

/// Feature-level fusion: o_t = [o_t^A; o_t^VS; o_t^VA]. All streams must
/// already run at the audio frame rate.
inline Matrix early_integration(const Matrix& audio, const Matrix& shape, const Matrix& appearance) {
  if (audio.rows() != shape.rows() || audio.rows() != appearance.rows())
    throw ShapeError("early_integration: streams have different frame counts (" + std::to_string(audio.rows()) +
                     ", " + std::to_string(shape.rows()) + ", " + std::to_string(appearance.rows()) +
                     "); align video to the audio rate first");
  Matrix out(audio.rows(), audio.cols() + shape.cols() + appearance.cols());
  out << audio, shape, appearance;
  return out;
}

/// Inverse of early_integration given the per-stream widths (A, VS, VA).
inline std::array<Matrix, 3> split_early_integration(const Matrix& joint, std::array<Eigen::Index, 3> widths) {
  if (widths[0] + widths[1] + widths[2] != joint.cols()) throw ShapeError("split_early_integration: width mismatch");
  return {joint.leftCols(widths[0]), joint.middleCols(widths[0], widths[1]), joint.rightCols(widths[2])};
}

}  // namespace avf::fusion
