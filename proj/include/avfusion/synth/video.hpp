// include/avfusion/synth/video.hpp

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
#include <numbers>
#include <vector>

#include "avfusion/core/rng.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/signal/image.hpp"

namespace avf::synth {

using signal::Image;
using signal::kFrameSize;

struct TextureWave {
  double kx = 0.0, ky = 0.0, phase = 0.0, amplitude = 0.0;
};

/// Mouth-region glyph of one viseme: a dark ellipse on a textured background.
struct GlyphSpec {
  double cx = 16.0, cy = 16.0;
  double semi_x = 8.0, semi_y = 4.0;
  double mouth_level = 0.25;
  double background = 0.65;
  std::vector<TextureWave> texture;
};

/// Per-frame articulation variability applied when rendering a glyph.
struct GlyphJitter {
  double shift = 0.0;  // pixels
  double scale = 0.0;  // relative size change
};

inline Image render_glyph(const GlyphSpec& g, double dx = 0.0, double dy = 0.0, double scale = 1.0) {
  Image img(kFrameSize, kFrameSize);
  const double sx = g.semi_x * scale, sy = g.semi_y * scale;
  for (int r = 0; r < kFrameSize; ++r) {
    for (int c = 0; c < kFrameSize; ++c) {
      double bg = g.background;
      for (const auto& w : g.texture) bg += w.amplitude * std::cos(w.kx * c + w.ky * r + w.phase);
      const double ex = (c + 0.5 - g.cx - dx) / sx, ey = (r + 0.5 - g.cy - dy) / sy;
      const double dist = std::sqrt(ex * ex + ey * ey);
      const double inside = 1.0 / (1.0 + std::exp((dist - 1.0) * 8.0));
      img(r, c) = inside * g.mouth_level + (1.0 - inside) * bg;
    }
  }
  return img;
}

inline Image render_noisy_glyph(const GlyphSpec& g, const GlyphJitter& jitter, double pixel_noise, Rng& rng) {
  const double dx = jitter.shift * standard_normal(rng), dy = jitter.shift * standard_normal(rng);
  const double scale = 1.0 + jitter.scale * standard_normal(rng);
  Image img = render_glyph(g, dx, dy, std::max(scale, 0.3));
  for (Eigen::Index i = 0; i < img.size(); ++i)
    img.data()[i] = std::clamp(img.data()[i] + pixel_noise * standard_normal(rng), 0.0, 1.0);
  return img;
}

struct DistortionSegment {
  int begin = 0;  // first video frame
  int end = 0;    // one past the last video frame
  double brightness = 0.0;
  int blur_width = 1;
  double rotation_deg = 0.0;

  /// Overall severity, used by the synthetic face-detector confidence.
  double magnitude() const {
    return std::abs(brightness) / 0.3 + static_cast<double>(std::max(blur_width - 1, 0)) / 4.0 +
           std::abs(rotation_deg) / 15.0;
  }
};

struct DistortionSpec {
  std::vector<DistortionSegment> segments;
};

inline Image adjust_brightness(const Image& img, double offset) {
  return (img.array() + offset).max(0.0).min(1.0).matrix();
}

/// Separable box blur of odd width with edge replication.
inline Image box_blur(const Image& img, int width) {
  if (width <= 1) return img;
  const int half = width / 2;
  const Eigen::Index R = img.rows(), C = img.cols();
  Image tmp(R, C), out(R, C);
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c) {
      double s = 0.0;
      for (int k = -half; k <= half; ++k) s += img(r, std::clamp<Eigen::Index>(c + k, 0, C - 1));
      tmp(r, c) = s / (2 * half + 1);
    }
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c) {
      double s = 0.0;
      for (int k = -half; k <= half; ++k) s += tmp(std::clamp<Eigen::Index>(r + k, 0, R - 1), c);
      out(r, c) = s / (2 * half + 1);
    }
  return out;
}

/// Rotation about the image center with bilinear sampling; samples falling
/// outside the frame take the nearest edge pixel.
inline Image rotate(const Image& img, double degrees) {
  if (degrees == 0.0) return img;
  const double a = degrees * std::numbers::pi / 180.0, ca = std::cos(a), sa = std::sin(a);
  const double cy = (static_cast<double>(img.rows()) - 1.0) / 2.0, cx = (static_cast<double>(img.cols()) - 1.0) / 2.0;
  Image out(img.rows(), img.cols());
  auto at = [&](Eigen::Index r, Eigen::Index c) {
    return img(std::clamp<Eigen::Index>(r, 0, img.rows() - 1), std::clamp<Eigen::Index>(c, 0, img.cols() - 1));
  };
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double x = ca * (c - cx) + sa * (r - cy) + cx;
      const double y = -sa * (c - cx) + ca * (r - cy) + cy;
      const auto x0 = static_cast<Eigen::Index>(std::floor(x)), y0 = static_cast<Eigen::Index>(std::floor(y));
      const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
      out(r, c) = (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
                  fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
    }
  return out;
}

/// Applies rotation, blur and brightness (in that order) to every frame
/// covered by a segment.
inline std::vector<Image> corrupt_video(const std::vector<Image>& frames, const DistortionSpec& spec) {
  std::vector<Image> out = frames;
  for (const auto& seg : spec.segments) {
    for (int v = std::max(seg.begin, 0); v < std::min<int>(seg.end, static_cast<int>(out.size())); ++v) {
      Image img = rotate(out[static_cast<std::size_t>(v)], seg.rotation_deg);
      img = box_blur(img, seg.blur_width);
      if (seg.brightness != 0.0) img = adjust_brightness(img, seg.brightness);
      out[static_cast<std::size_t>(v)] = std::move(img);
    }
  }
  return out;
}

/// Stand-in for a face detector score: one minus a saturating function of
/// the applied distortion, plus jitter.
inline Vector synthetic_confidence(int num_frames, const DistortionSpec& spec, Rng& rng, double noise = 0.03) {
  Vector severity = Vector::Zero(num_frames);
  for (const auto& seg : spec.segments)
    for (int v = std::max(seg.begin, 0); v < std::min(seg.end, num_frames); ++v) severity(v) += seg.magnitude();
  Vector conf(num_frames);
  for (int v = 0; v < num_frames; ++v)
    conf(v) = std::clamp(1.0 - std::tanh(severity(v)) + noise * standard_normal(rng), 0.0, 1.0);
  return conf;
}

/// Appearance features: zigzag DCT coefficients after DC.
inline Vector appearance_features(const Image& img, int dims) { return signal::dct_zigzag(img, dims, 1); }

inline constexpr int kShapeDims = 8;

/// Shape features: four landmark points (x, y) at the ends of the principal
/// axes of the mouth blob, estimated from darkness-weighted moments.
inline Vector shape_features(const Image& img) {
  std::vector<double> vals(img.data(), img.data() + img.size());
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2), vals.end());
  const double median = vals[vals.size() / 2];
  double w_sum = 0.0, mx = 0.0, my = 0.0;
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double w = std::max(median - img(r, c), 0.0);
      w_sum += w;
      mx += w * (c + 0.5);
      my += w * (r + 0.5);
    }
  Vector out = Vector::Zero(kShapeDims);
  if (w_sum <= 1e-12) {
    for (int i = 0; i < 4; ++i) {
      out(2 * i) = kFrameSize / 2.0;
      out(2 * i + 1) = kFrameSize / 2.0;
    }
    return out;
  }
  mx /= w_sum;
  my /= w_sum;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c) {
      const double w = std::max(median - img(r, c), 0.0);
      const double dx = c + 0.5 - mx, dy = r + 0.5 - my;
      sxx += w * dx * dx;
      syy += w * dy * dy;
      sxy += w * dx * dy;
    }
  sxx /= w_sum;
  syy /= w_sum;
  sxy /= w_sum;
  const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
  const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
  const double l1 = tr / 2.0 + disc, l2 = std::max(tr / 2.0 - disc, 0.0);
  double ex = 1.0, ey = 0.0;
  if (std::abs(sxy) > 1e-12) {
    ex = l1 - syy;
    ey = sxy;
  } else if (syy > sxx) {
    ex = 0.0;
    ey = 1.0;
  }
  const double norm = std::hypot(ex, ey);
  ex /= norm;
  ey /= norm;
  if (ex < 0.0 || (ex == 0.0 && ey < 0.0)) {
    ex = -ex;
    ey = -ey;
  }
  const double a = std::sqrt(l1), b = std::sqrt(l2);
  const double pts[4][2] = {{mx + a * ex, my + a * ey},
                            {mx - a * ex, my - a * ey},
                            {mx - b * ey, my + b * ex},
                            {mx + b * ey, my - b * ex}};
  for (int i = 0; i < 4; ++i) {
    out(2 * i) = pts[i][0];
    out(2 * i + 1) = pts[i][1];
  }
  return out;
}

}  // namespace avf::synth
