// include/avfusion/synth/corpus.hpp

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

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "avfusion/core/rng.hpp"
#include "avfusion/synth/noise.hpp"
#include "avfusion/synth/world.hpp"

namespace avf::synth {

/// One synthetic audio-visual recording with its ground truth.
struct Utterance {
  std::string id;
  std::vector<int> words;
  std::vector<int> path;       // generating state per audio frame
  std::vector<double> clean;   // 16 kHz
  std::vector<double> noise;   // empty when clean
  std::optional<double> snr_db;
  NoiseKind noise_kind = NoiseKind::White;
  std::vector<Image> video;     // rendered frames, 25 fps
  DistortionSpec distortion;
  std::vector<Image> observed_video;  // after distortion
  Vector confidence;                  // per video frame

  int num_frames() const { return static_cast<int>(path.size()); }
  int num_video_frames() const { return static_cast<int>(video.size()); }
  bool is_clean() const { return !snr_db.has_value(); }

  std::vector<double> mixture() const {
    if (noise.empty()) return clean;
    std::vector<double> m(clean.size());
    for (std::size_t i = 0; i < clean.size(); ++i) m[i] = clean[i] + noise[i];
    return m;
  }

  std::string condition() const {
    if (!snr_db) return "clean";
    const double v = *snr_db;
    return std::to_string(static_cast<int>(std::lround(v)));
  }
};

/// ceil(duration * 25) frames at 10 ms per audio frame.
inline int video_frame_count(int audio_frames) { return (audio_frames + 3) / 4; }

/// Audio frame whose state a video frame shows (near the frame's midpoint).
inline int video_source_frame(int video_frame, int audio_frames) { return std::min(audio_frames - 1, 4 * video_frame + 1); }

inline int sample_duration(double mean, Rng& rng) {
  if (mean <= 1.0) return 1;
  std::geometric_distribution<int> geo(1.0 / mean);
  return 1 + geo(rng);
}

inline std::vector<int> sample_words(const World& w, int length, Rng& rng) {
  std::vector<int> words;
  std::discrete_distribution<int> first(w.lm_start.data(), w.lm_start.data() + w.lm_start.size());
  words.push_back(first(rng));
  while (static_cast<int>(words.size()) < length) {
    const Eigen::RowVectorXd row = w.lm_bigram.row(words.back());
    std::discrete_distribution<int> next(row.data(), row.data() + row.size());
    words.push_back(next(rng));
  }
  return words;
}

/// Clean utterance: LM-sampled words, geometric state durations, rendered
/// audio and video.
inline Utterance sample_utterance(const World& w, int length_words, std::uint64_t seed, std::string id = "utt") {
  if (length_words < 1) throw DomainError("utterance length must be at least one word");
  Rng rng(seed);
  Utterance u;
  u.id = std::move(id);
  u.words = sample_words(w, length_words, rng);
  for (int word : u.words)
    for (int s : w.lexicon[static_cast<std::size_t>(word)]) {
      const int d = sample_duration(w.config.mean_duration, rng);
      u.path.insert(u.path.end(), static_cast<std::size_t>(d), s);
    }
  u.clean = render_waveform(w.audio, u.path, w.config.excitation_noise, rng);
  const int V = video_frame_count(u.num_frames());
  for (int v = 0; v < V; ++v) {
    const int s = u.path[static_cast<std::size_t>(video_source_frame(v, u.num_frames()))];
    u.video.push_back(render_noisy_glyph(w.glyphs[static_cast<std::size_t>(w.viseme[static_cast<std::size_t>(s)])],
                                         w.jitter(), w.config.pixel_noise, rng));
  }
  u.observed_video = u.video;
  u.confidence = synthetic_confidence(V, u.distortion, rng);
  return u;
}

/// Adds noise of the given kind at an exact global SNR.
inline Utterance mix_noise(const Utterance& clean, NoiseKind kind, double snr_db, std::uint64_t seed) {
  Utterance u = clean;
  Rng rng(seed);
  u.noise = generate_noise(kind, u.clean.size(), rng);
  scale_to_snr(u.clean, u.noise, snr_db);
  u.snr_db = snr_db;
  u.noise_kind = kind;
  return u;
}

inline Utterance apply_distortion(const Utterance& src, const DistortionSpec& spec, std::uint64_t seed) {
  Utterance u = src;
  Rng rng(seed);
  u.distortion = spec;
  u.observed_video = corrupt_video(u.video, spec);
  u.confidence = synthetic_confidence(u.num_video_frames(), spec, rng);
  return u;
}

/// One distorted segment over 30-70% of the video, with random brightness,
/// blur and rotation.
inline DistortionSpec random_distortion(int num_video_frames, Rng& rng) {
  DistortionSpec spec;
  if (num_video_frames < 1) return spec;
  const int len = std::max(1, static_cast<int>(std::lround(num_video_frames * uniform(rng, 0.3, 0.7))));
  const int begin = std::uniform_int_distribution<int>(0, num_video_frames - len)(rng);
  DistortionSegment seg;
  seg.begin = begin;
  seg.end = begin + len;
  seg.brightness = uniform(rng, -0.3, 0.3);
  seg.blur_width = 1 + 2 * std::uniform_int_distribution<int>(0, 2)(rng);
  seg.rotation_deg = uniform(rng, -20.0, 20.0);
  spec.segments.push_back(seg);
  return spec;
}

}  // namespace avf::synth
