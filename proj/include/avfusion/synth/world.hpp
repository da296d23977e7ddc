// include/avfusion/synth/world.hpp

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
#include <numeric>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/json_reader.hpp"
#include "avfusion/core/rng.hpp"
#include "avfusion/core/types.hpp"
#include "avfusion/signal/mfcc.hpp"
#include "avfusion/synth/audio.hpp"
#include "avfusion/synth/gaussian.hpp"
#include "avfusion/synth/video.hpp"

namespace avf::synth {

struct WorldConfig {
  int vocab_size = 10;
  int states_per_word = 3;
  int num_states = 0;  // 0: derived from the lexicon
  double mean_duration = 5.0;  // frames, geometric
  int num_visemes = 0;         // 0: one viseme per three states
  double f0_min = 90.0;
  double f0_max = 280.0;
  int num_formants = 2;
  double excitation_noise = 0.05;
  double audio_var_floor = 0.01;
  double audio_var_scale = 1.0;
  double pixel_noise = 0.1;
  double glyph_shift = 0.8;
  double glyph_scale = 0.08;
  double video_var_scale = 1.0;
  int appearance_dims = 6;
  double lm_spread = 1.5;
  int model_frames = 40;
  int num_mels = 23;

  int derived_num_states() const { return vocab_size * states_per_word; }
  int derived_num_visemes() const {
    return num_visemes > 0 ? num_visemes : std::max(2, (derived_num_states() + 2) / 3);
  }

  void validate() const {
    if (vocab_size < 1) throw ConfigError("world.vocab_size", "must be >= 1");
    if (states_per_word < 1) throw ConfigError("world.states_per_word", "must be >= 1");
    const int needed = derived_num_states();
    if (num_states != 0 && num_states < needed)
      throw ConfigError("world.num_states", std::to_string(num_states) + " states cannot hold a lexicon needing " +
                                                std::to_string(needed));
    if (num_states != 0 && num_states > needed)
      throw ConfigError("world.num_states", std::to_string(num_states - needed) + " states would be unreachable");
    if (needed < 2) throw ConfigError("world", "the world needs at least two states");
    if (mean_duration < 1.0) throw ConfigError("world.mean_duration", "must be >= 1 frame");
    if (!(f0_min >= 50.0 && f0_max <= 500.0 && f0_min < f0_max))
      throw ConfigError("world.f0_min", "f0 range must lie inside [50, 500] Hz");
    if (num_formants < 1) throw ConfigError("world.num_formants", "must be >= 1");
    if (appearance_dims < 1 || appearance_dims > 64) throw ConfigError("world.appearance_dims", "must be in [1, 64]");
    if (model_frames < 4) throw ConfigError("world.model_frames", "must be >= 4");
    if (num_mels < 4) throw ConfigError("world.num_mels", "must be >= 4");
    if (pixel_noise < 0 || excitation_noise < 0) throw ConfigError("world", "noise levels must be nonnegative");
    if (num_visemes < 0 || num_visemes > needed) throw ConfigError("world.num_visemes", "must be in [0, S]");
  }
};

inline WorldConfig parse_world_config(const Json& j, const std::string& path = "world") {
  WorldConfig c;
  JsonReader r(j, path);
  r.get("vocab_size", c.vocab_size);
  r.get("states_per_word", c.states_per_word);
  r.get("num_states", c.num_states);
  r.get("mean_duration", c.mean_duration);
  r.get("num_visemes", c.num_visemes);
  r.get("f0_min", c.f0_min);
  r.get("f0_max", c.f0_max);
  r.get("num_formants", c.num_formants);
  r.get("excitation_noise", c.excitation_noise);
  r.get("audio_var_floor", c.audio_var_floor);
  r.get("audio_var_scale", c.audio_var_scale);
  r.get("pixel_noise", c.pixel_noise);
  r.get("glyph_shift", c.glyph_shift);
  r.get("glyph_scale", c.glyph_scale);
  r.get("video_var_scale", c.video_var_scale);
  r.get("appearance_dims", c.appearance_dims);
  r.get("lm_spread", c.lm_spread);
  r.get("model_frames", c.model_frames);
  r.get("num_mels", c.num_mels);
  r.finish();
  c.validate();
  return c;
}

inline Json to_json(const WorldConfig& c) {
  return Json{{"vocab_size", c.vocab_size},         {"states_per_word", c.states_per_word},
              {"num_states", c.num_states},         {"mean_duration", c.mean_duration},
              {"num_visemes", c.num_visemes},       {"f0_min", c.f0_min},
              {"f0_max", c.f0_max},                 {"num_formants", c.num_formants},
              {"excitation_noise", c.excitation_noise}, {"audio_var_floor", c.audio_var_floor},
              {"audio_var_scale", c.audio_var_scale},   {"pixel_noise", c.pixel_noise},
              {"glyph_shift", c.glyph_shift},       {"glyph_scale", c.glyph_scale},
              {"video_var_scale", c.video_var_scale}, {"appearance_dims", c.appearance_dims},
              {"lm_spread", c.lm_spread},           {"model_frames", c.model_frames},
              {"num_mels", c.num_mels}};
}

/// The generative toy world: lexicon of state chains, per-state audio and
/// video sources, bigram LM, and the per-stream observation models fitted on
/// clean renderings.
struct World {
  WorldConfig config;
  std::uint64_t seed = 0;
  std::vector<std::string> vocabulary;
  std::vector<std::vector<int>> lexicon;
  StateSpace states;
  std::vector<int> state_word;
  std::vector<int> state_position;
  std::vector<AudioStateSpec> audio;
  std::vector<int> viseme;
  std::vector<GlyphSpec> glyphs;
  Vector lm_start;   // P(w | <s>)
  Matrix lm_bigram;  // P(w' | w), rows stochastic
  DiagonalGaussians audio_model;
  DiagonalGaussians appearance_model;
  DiagonalGaussians shape_model;

  int num_states() const { return states.num_states(); }
  int vocab_size() const { return static_cast<int>(vocabulary.size()); }
  double self_loop_prob() const { return 1.0 - 1.0 / config.mean_duration; }
  signal::MelConfig mel_config() const {
    signal::MelConfig m;
    m.num_mels = config.num_mels;
    return m;
  }
  GlyphJitter jitter() const { return {config.glyph_shift, config.glyph_scale}; }

  int word_index(const std::string& w) const {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), w);
    if (it == vocabulary.end()) throw DomainError("word '" + w + "' is not in the vocabulary");
    return static_cast<int>(it - vocabulary.begin());
  }
};

namespace detail {

inline std::string word_name(int i) {
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u"};
  constexpr int no = 14, nv = 5;
  std::string w;
  int x = i;
  do {
    w += kOnsets[x % no];
    x /= no;
    w += kVowels[x % nv];
    x /= nv;
  } while (x > 0);
  return w + kOnsets[(i * 7 + 3) % no];
}

inline Vector softmax(const Vector& logits) {
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace detail

inline Matrix audio_model_features(const World& w, std::span<const double> waveform) {
  return signal::log_mel(waveform, w.mel_config());
}

inline Matrix appearance_model_features(const World& w, const std::vector<Image>& frames) {
  Matrix f(static_cast<Eigen::Index>(frames.size()), w.config.appearance_dims);
  for (std::size_t v = 0; v < frames.size(); ++v)
    f.row(static_cast<Eigen::Index>(v)) = appearance_features(frames[v], w.config.appearance_dims).transpose();
  return f;
}

inline Matrix shape_model_features(const std::vector<Image>& frames) {
  Matrix f(static_cast<Eigen::Index>(frames.size()), kShapeDims);
  for (std::size_t v = 0; v < frames.size(); ++v) f.row(static_cast<Eigen::Index>(v)) = shape_features(frames[v]).transpose();
  return f;
}

inline World build_world(const WorldConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, "world"));
  const int V = cfg.vocab_size, P = cfg.states_per_word, S = cfg.derived_num_states();

  std::vector<std::string> vocab;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> lexicon(static_cast<std::size_t>(V));
  std::vector<int> state_word, state_position;
  for (int w = 0; w < V; ++w) {
    vocab.push_back(detail::word_name(w));
    for (int p = 0; p < P; ++p) {
      const int s = w * P + p;
      lexicon[static_cast<std::size_t>(w)].push_back(s);
      labels.push_back(vocab.back() + "_" + std::to_string(p));
      state_word.push_back(w);
      state_position.push_back(p);
    }
  }

  // Stratified fundamentals keep neighbouring states apart in pitch.
  std::vector<int> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  static constexpr double kFormantBands[3][2] = {{250.0, 900.0}, {900.0, 2500.0}, {2500.0, 3800.0}};
  std::vector<AudioStateSpec> audio(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) {
    auto& a = audio[static_cast<std::size_t>(s)];
    a.f0 = cfg.f0_min + (cfg.f0_max - cfg.f0_min) * (order[static_cast<std::size_t>(s)] + uniform(rng, 0.2, 0.8)) / S;
    a.gain = uniform(rng, 0.6, 1.0);
    for (int k = 0; k < cfg.num_formants; ++k) {
      const auto& band = kFormantBands[k % 3];
      a.formants.push_back({uniform(rng, band[0], band[1]), uniform(rng, 80.0, 250.0)});
    }
  }

  const int num_visemes = cfg.derived_num_visemes();
  std::vector<int> viseme(static_cast<std::size_t>(S));
  std::shuffle(order.begin(), order.end(), rng);
  for (int s = 0; s < S; ++s) viseme[static_cast<std::size_t>(s)] = order[static_cast<std::size_t>(s)] % num_visemes;
  std::vector<GlyphSpec> glyphs(static_cast<std::size_t>(num_visemes));
  for (auto& g : glyphs) {
    g.cx = uniform(rng, 13.0, 19.0);
    g.cy = uniform(rng, 13.0, 19.0);
    g.semi_x = uniform(rng, 5.0, 11.0);
    g.semi_y = uniform(rng, 1.5, 6.0);
    g.mouth_level = uniform(rng, 0.1, 0.35);
    g.background = uniform(rng, 0.55, 0.75);
    for (int k = 0; k < 2; ++k)
      g.texture.push_back({uniform(rng, 0.1, 0.6), uniform(rng, 0.1, 0.6), uniform(rng, 0.0, 6.28), uniform(rng, 0.02, 0.06)});
  }

  Vector lm_start(V);
  Matrix lm_bigram(V, V);
  {
    Vector logits(V);
    for (int w = 0; w < V; ++w) logits(w) = 0.5 * cfg.lm_spread * standard_normal(rng);
    lm_start = detail::softmax(logits);
    for (int w = 0; w < V; ++w) {
      for (int u = 0; u < V; ++u) logits(u) = cfg.lm_spread * standard_normal(rng);
      lm_bigram.row(w) = detail::softmax(logits).transpose();
    }
  }

  World world{cfg,   seed,   std::move(vocab), std::move(lexicon), StateSpace(std::move(labels)),
              std::move(state_word), std::move(state_position), std::move(audio), std::move(viseme),
              std::move(glyphs), lm_start, lm_bigram, {}, {}, {}};

  // Observation models are fitted on clean steady-state renderings.
  Rng model_rng(derive_seed(seed, "observation-models"));
  std::vector<Matrix> audio_samples, app_samples, shape_samples;
  for (int s = 0; s < S; ++s) {
    const std::vector<int> path(static_cast<std::size_t>(cfg.model_frames + 4), s);
    const auto wave = render_waveform(world.audio, path, cfg.excitation_noise, model_rng);
    const Matrix feats = audio_model_features(world, wave);
    audio_samples.push_back(feats.middleRows(2, cfg.model_frames));
  }
  world.audio_model = DiagonalGaussians::fit(audio_samples, cfg.audio_var_floor, cfg.audio_var_scale);
  for (int v = 0; v < num_visemes; ++v) {
    std::vector<Image> frames;
    for (int i = 0; i < cfg.model_frames; ++i)
      frames.push_back(render_noisy_glyph(world.glyphs[static_cast<std::size_t>(v)], world.jitter(), cfg.pixel_noise, model_rng));
    app_samples.push_back(appearance_model_features(world, frames));
    shape_samples.push_back(shape_model_features(frames));
  }
  const auto app_v = DiagonalGaussians::fit(app_samples, 1e-6, cfg.video_var_scale);
  const auto shape_v = DiagonalGaussians::fit(shape_samples, 1e-6, cfg.video_var_scale);
  world.appearance_model = {Matrix(S, app_v.dim()), Matrix(S, app_v.dim())};
  world.shape_model = {Matrix(S, shape_v.dim()), Matrix(S, shape_v.dim())};
  for (int s = 0; s < S; ++s) {
    const int v = world.viseme[static_cast<std::size_t>(s)];
    world.appearance_model.mean.row(s) = app_v.mean.row(v);
    world.appearance_model.var.row(s) = app_v.var.row(v);
    world.shape_model.mean.row(s) = shape_v.mean.row(v);
    world.shape_model.var.row(s) = shape_v.var.row(v);
  }
  return world;
}

/// World manifest: everything needed to inspect or rebuild the world.
inline Json world_manifest(const World& w) {
  Json states = Json::array();
  for (int s = 0; s < w.num_states(); ++s) {
    const auto& a = w.audio[static_cast<std::size_t>(s)];
    Json formants = Json::array();
    for (const auto& f : a.formants) formants.push_back({{"freq", f.freq}, {"bandwidth", f.bandwidth}});
    states.push_back({{"label", w.states.label(s)},
                      {"word", w.state_word[static_cast<std::size_t>(s)]},
                      {"position", w.state_position[static_cast<std::size_t>(s)]},
                      {"f0", a.f0},
                      {"gain", a.gain},
                      {"formants", formants},
                      {"viseme", w.viseme[static_cast<std::size_t>(s)]}});
  }
  Json glyphs = Json::array();
  for (const auto& g : w.glyphs)
    glyphs.push_back({{"cx", g.cx}, {"cy", g.cy}, {"semi_x", g.semi_x}, {"semi_y", g.semi_y},
                      {"mouth_level", g.mouth_level}, {"background", g.background}});
  Json bigram = Json::array();
  for (int i = 0; i < w.lm_bigram.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < w.lm_bigram.cols(); ++j) row.push_back(w.lm_bigram(i, j));
    bigram.push_back(row);
  }
  Json start = Json::array();
  for (int i = 0; i < w.lm_start.size(); ++i) start.push_back(w.lm_start(i));
  return Json{{"config", to_json(w.config)}, {"seed", w.seed},        {"vocabulary", w.vocabulary},
              {"lexicon", w.lexicon},        {"states", states},      {"glyphs", glyphs},
              {"lm", {{"start", start}, {"bigram", bigram}}}};
}

}  // namespace avf::synth
