// include/avfusion/signal/image.hpp

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
#include <utility>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/signal/mfcc.hpp"

namespace avf::signal {

/// Grayscale frame, rows are image rows, values nominally in [0, 1].
using Image = Eigen::MatrixXd;

inline constexpr int kFrameSize = 32;

/// Orthonormal separable 2D DCT-II.
inline Matrix dct2(const Image& img) {
  const Matrix cr = dct_matrix(static_cast<int>(img.rows()));
  const Matrix cc = dct_matrix(static_cast<int>(img.cols()));
  return cr * img * cc.transpose();
}

/// (row, col) pairs of an n x n block in JPEG zigzag order.
inline std::vector<std::pair<int, int>> zigzag_order(int n) {
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(n * n));
  for (int d = 0; d < 2 * n - 1; ++d) {
    const int lo = std::max(0, d - n + 1), hi = std::min(d, n - 1);
    if (d % 2 == 0)
      for (int r = hi; r >= lo; --r) order.emplace_back(r, d - r);
    else
      for (int r = lo; r <= hi; ++r) order.emplace_back(r, d - r);
  }
  return order;
}

/// DCT coefficients of a frame in zigzag order, skipping the first `offset`.
inline Vector dct_zigzag(const Image& img, int count, int offset = 0) {
  const Matrix c = dct2(img);
  const auto order = zigzag_order(static_cast<int>(std::min(img.rows(), img.cols())));
  if (offset + count > static_cast<int>(order.size())) throw DomainError("dct_zigzag: too many coefficients requested");
  Vector out(count);
  for (int i = 0; i < count; ++i) {
    const auto [r, col] = order[static_cast<std::size_t>(offset + i)];
    out(i) = c(r, col);
  }
  return out;
}

/// First `count` zigzag DCT coefficients starting at DC, of a 32x32 frame.
inline Vector idct_features(const Image& img, int count = 5) {
  if (img.rows() != kFrameSize || img.cols() != kFrameSize)
    throw ShapeError("idct_features expects a 32x32 frame, got " + std::to_string(img.rows()) + "x" +
                     std::to_string(img.cols()));
  return dct_zigzag(img, count);
}

/// Response of the 3x3 Laplacian [0 1 0; 1 -4 1; 0 1 0] on interior pixels.
inline Matrix laplacian(const Image& img) {
  if (img.rows() < 3 || img.cols() < 3) return Matrix(0, 0);
  Matrix out(img.rows() - 2, img.cols() - 2);
  for (Eigen::Index r = 1; r + 1 < img.rows(); ++r)
    for (Eigen::Index c = 1; c + 1 < img.cols(); ++c)
      out(r - 1, c - 1) = img(r - 1, c) + img(r + 1, c) + img(r, c - 1) + img(r, c + 1) - 4.0 * img(r, c);
  return out;
}

struct ImageDistortion {
  double brightness = 0.0;
  double blur = 0.0;      // variance of the high-pass response; low means blurred
  double rotation = 1.0;  // correlation with the horizontal mirror image
};

inline ImageDistortion image_distortion(const Image& img) {
  ImageDistortion d;
  if (img.size() == 0) return d;
  d.brightness = img.mean();
  const Matrix lap = laplacian(img);
  if (lap.size() > 0) d.blur = (lap.array() - lap.mean()).square().mean();

  const Eigen::ArrayXXd centered = img.array() - d.brightness;
  const Eigen::ArrayXXd mirrored = centered.rowwise().reverse();
  const double energy = centered.square().sum();
  if (energy <= 1e-18) {
    d.rotation = 1.0;
  } else {
    d.rotation = std::clamp((centered * mirrored).sum() / energy, -1.0, 1.0);
  }
  return d;
}

}  // namespace avf::signal
