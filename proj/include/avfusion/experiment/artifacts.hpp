// include/avfusion/experiment/artifacts.hpp

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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "avfusion/core/matrix_io.hpp"
#include "avfusion/experiment/sweep.hpp"

/// On-disk layout of the staged pipeline. Everything for one seed lives under
/// <out>/seed_<n>/:
///
///   corpus.json              synth      plans, vocabulary, media file names
///   audio/<id>.wav           synth      observed mixture, 16-bit PCM
///   video/<id>.u8            synth      observed frames, 8-bit row-major
///   truth/<id>.path.avpf     synth      generating state per audio frame
///   features.json            extract    per-utterance metadata and targets
///   features/<id>.avpf       extract    [log pA | log pVA | log pVS | log pEI | R]
///   model_based/<id>.avpf    extract    model-based reliability block (optional)
///   models/<strategy>/       train      checkpoints, plus training.json
///   fused/<strategy>/<id>.avpf  fuse    fused frame scores of test utterances
///   decoded/<strategy>.json  decode     hypotheses and error counts
///   evaluation.json          evaluate   per-condition WER of this seed
namespace avf::experiment {

namespace fs = std::filesystem;

inline fs::path seed_dir(const fs::path& out, std::uint64_t seed) { return out / ("seed_" + std::to_string(seed)); }

/// Throws a message naming the subcommand that produces `path`.
inline void require_artifact(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path))
    throw Error("missing " + path.string() + "; run the '" + producer + "' subcommand first");
}

inline Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

inline void write_json_file(const fs::path& path, const Json& j) { write_text_file(path, j.dump(1) + "\n"); }

// ---------------------------------------------------------------- media

/// Mono 16-bit PCM WAV; samples are clipped to [-1, 1].
inline std::vector<unsigned char> encode_wav16(const std::vector<double>& samples, int rate) {
  const auto data_bytes = static_cast<std::uint32_t>(2 * samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>(v >> 8));
  };
  auto u32 = [&](std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xff));
  };
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(1);  // PCM
  u16(1);  // mono
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(2 * rate));
  u16(2);
  u16(16);
  tag("data");
  u32(data_bytes);
  for (double x : samples) {
    const double c = std::clamp(x, -1.0, 1.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  return out;
}

/// Reads back what encode_wav16 writes (canonical 44-byte header only).
inline std::vector<double> decode_wav16(const std::vector<unsigned char>& b, int* rate = nullptr) {
  auto u16 = [&](std::size_t o) { return static_cast<std::uint16_t>(b[o] | (b[o + 1] << 8)); };
  auto u32 = [&](std::size_t o) { return static_cast<std::uint32_t>(u16(o) | (static_cast<std::uint32_t>(u16(o + 2)) << 16)); };
  if (b.size() < 44 || std::string(b.begin(), b.begin() + 4) != "RIFF" || std::string(b.begin() + 8, b.begin() + 12) != "WAVE")
    throw FormatError("not a RIFF/WAVE file", 0);
  if (u16(20) != 1 || u16(22) != 1 || u16(34) != 16) throw FormatError("only mono 16-bit PCM is supported", 20);
  const std::uint32_t n = u32(40);
  if (44 + static_cast<std::size_t>(n) > b.size()) throw FormatError("truncated WAV data", 40);
  if (rate) *rate = static_cast<int>(u32(24));
  std::vector<double> s(n / 2);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int16_t>(u16(44 + 2 * i)) / 32767.0;
  return s;
}

inline void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

inline std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Frames concatenated, each row-major, intensity [0, 1] mapped to 0..255.
inline std::vector<unsigned char> encode_frames_u8(const std::vector<signal::Image>& frames) {
  std::vector<unsigned char> out;
  for (const auto& f : frames)
    for (Eigen::Index r = 0; r < f.rows(); ++r)
      for (Eigen::Index c = 0; c < f.cols(); ++c)
        out.push_back(static_cast<unsigned char>(std::lround(255.0 * std::clamp(f(r, c), 0.0, 1.0))));
  return out;
}

// ---------------------------------------------------------------- synth

/// Renders every planned utterance of one seed and writes media, ground
/// truth and the corpus manifest.
inline void write_corpus(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, int threads) {
  const auto ctx = make_seed_context(cfg, seed);
  const auto plans = plan_corpus(cfg, seed);
  std::vector<Json> entries(plans.size());
  parallel_for(plans.size(), threads, [&](std::size_t, std::size_t i) {
    const auto r = realize(plans[i], ctx.world);
    const auto& u = r.observed;
    const std::string id = plans[i].id;
    write_bytes(dir / "audio" / (id + ".wav"), encode_wav16(u.mixture(), synth::kSampleRate));
    write_bytes(dir / "video" / (id + ".u8"), encode_frames_u8(u.observed_video));
    io::write_index_sequence(dir / "truth" / (id + ".path.avpf"), u.path);
    Json e = to_json(plans[i]);
    std::vector<std::string> words;
    for (int w : u.words) words.push_back(ctx.world.vocabulary[static_cast<std::size_t>(w)]);
    e["words"] = words;
    e["frames"] = u.num_frames();
    e["video_frames"] = u.num_video_frames();
    e["video_height"] = u.observed_video.empty() ? 0 : u.observed_video.front().rows();
    e["video_width"] = u.observed_video.empty() ? 0 : u.observed_video.front().cols();
    e["audio"] = "audio/" + id + ".wav";
    e["video"] = "video/" + id + ".u8";
    e["path"] = "truth/" + id + ".path.avpf";
    entries[i] = std::move(e);
  });
  Json conds = Json::array();
  for (const auto& c : cfg.conditions()) conds.push_back(condition_name(c));
  write_json_file(dir / "corpus.json", {{"seed", seed},
                                        {"num_states", ctx.world.num_states()},
                                        {"vocabulary", ctx.world.vocabulary},
                                        {"conditions", conds},
                                        {"utterances", entries}});
}

inline std::vector<UtterancePlan> read_corpus_plans(const fs::path& dir) {
  require_artifact(dir / "corpus.json", "synth");
  const Json j = read_json_file(dir / "corpus.json");
  std::vector<UtterancePlan> plans;
  for (const auto& e : j.at("utterances")) plans.push_back(plan_from_json(e));
  return plans;
}

// ---------------------------------------------------------------- features

inline void write_features(const fs::path& dir, const std::vector<UtteranceFeatures>& feats, bool model_based) {
  Json entries = Json::array();
  for (const auto& f : feats) {
    const auto T = f.num_frames();
    const auto S = f.log_posteriors[0].cols();
    Matrix packed(T, 4 * S + f.reliability.cols());
    packed << f.log_posteriors[0], f.log_posteriors[1], f.log_posteriors[2], f.early, f.reliability;
    io::write_matrix(dir / "features" / (f.id + ".avpf"), packed);
    if (model_based)
      io::write_matrix(dir / "model_based" / (f.id + ".avpf"), f.reliability.leftCols(3 * reliability::kNumModelMeasures));
    entries.push_back({{"id", f.id},
                       {"split", f.split},
                       {"condition", f.condition},
                       {"words", f.words},
                       {"target", f.target},
                       {"frames", T},
                       {"num_states", S},
                       {"reliability_dims", f.reliability.cols()},
                       {"divergence_too_short", f.divergence_too_short}});
  }
  write_json_file(dir / "features.json", {{"utterances", entries}});
}

/// Loads stored features; `keep` filters on the metadata entry before any
/// matrix is read.
template <typename Keep>
std::vector<UtteranceFeatures> read_features(const fs::path& dir, Keep keep) {
  require_artifact(dir / "features.json", "extract");
  const Json j = read_json_file(dir / "features.json");
  std::vector<UtteranceFeatures> out;
  try {
    for (const auto& e : j.at("utterances")) {
      if (!keep(e)) continue;
      UtteranceFeatures f;
      f.id = e.at("id").get<std::string>();
      f.split = e.at("split").get<std::string>();
      f.condition = e.at("condition").get<std::string>();
      f.words = e.at("words").get<std::vector<int>>();
      f.target = e.at("target").get<std::vector<int>>();
      f.divergence_too_short = e.at("divergence_too_short").get<bool>();
      const auto S = e.at("num_states").get<Eigen::Index>();
      const auto R = e.at("reliability_dims").get<Eigen::Index>();
      const fs::path p = dir / "features" / (f.id + ".avpf");
      require_artifact(p, "extract");
      const Matrix m = io::read_matrix(p);
      if (m.cols() != 4 * S + R || m.rows() != e.at("frames").get<Eigen::Index>())
        throw FormatError(p.string() + ": shape does not match features.json", 0);
      for (int k = 0; k < 3; ++k) f.log_posteriors[static_cast<std::size_t>(k)] = m.middleCols(k * S, S);
      f.early = m.middleCols(3 * S, S);
      f.reliability = m.rightCols(R);
      out.push_back(std::move(f));
    }
  } catch (const Json::exception& e) {
    throw FormatError((dir / "features.json").string() + ": " + e.what(), 0);
  }
  return out;
}

// ---------------------------------------------------------------- models

inline void write_models(const fs::path& dir, const Models& m) {
  Models copy = m;  // checkpoint writers take non-const networks
  if (copy.dsw_mse) copy.dsw_mse->save(dir / "dsw-mse");
  if (copy.dsw_ce) copy.dsw_ce->save(dir / "dsw-ce");
  if (copy.dfn_lstm) copy.dfn_lstm->save(dir / "dfn-lstm");
  if (copy.dfn_blstm) copy.dfn_blstm->save(dir / "dfn-blstm");
  write_json_file(dir / "training.json", m.training);
}

/// Loads the checkpoints that `strategies` need.
inline Models read_models(const fs::path& dir, const std::vector<std::string>& strategies) {
  Models m;
  for (const auto& s : strategies) {
    if (!strategy_needs_model(s)) continue;
    require_artifact(dir / s / "topology.json", "train");
    if (s == "dsw-mse") m.dsw_mse = fusion::WeightEstimator::load(dir / s);
    if (s == "dsw-ce") m.dsw_ce = fusion::WeightEstimator::load(dir / s);
    if (s == "dfn-lstm") m.dfn_lstm = fusion::DfnModel::load(dir / s);
    if (s == "dfn-blstm") m.dfn_blstm = fusion::DfnModel::load(dir / s);
  }
  if (fs::exists(dir / "training.json")) m.training = read_json_file(dir / "training.json");
  return m;
}

// ---------------------------------------------------------------- results

inline Json decoded_json(const UtteranceResult& r, const synth::World& world) {
  std::vector<std::string> hyp;
  for (int w : r.hypothesis) hyp.push_back(world.vocabulary[static_cast<std::size_t>(w)]);
  return {{"id", r.id},
          {"condition", r.condition},
          {"hypothesis_ids", r.hypothesis},
          {"hypothesis", hyp},
          {"substitutions", r.wer.substitutions},
          {"deletions", r.wer.deletions},
          {"insertions", r.wer.insertions},
          {"reference_length", r.wer.reference_length}};
}

inline UtteranceResult decoded_from_json(const Json& j) {
  UtteranceResult r;
  try {
    r.id = j.at("id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.hypothesis = j.at("hypothesis_ids").get<std::vector<int>>();
    r.wer.substitutions = j.at("substitutions").get<int>();
    r.wer.deletions = j.at("deletions").get<int>();
    r.wer.insertions = j.at("insertions").get<int>();
    r.wer.reference_length = j.at("reference_length").get<int>();
    r.wer.empty_reference = r.wer.reference_length == 0;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("decoded entry: ") + e.what(), 0);
  }
  return r;
}

inline SeedResult seed_result_from_json(const Json& j) {
  SeedResult s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    s.strategies = j.at("strategies").get<std::vector<std::string>>();
    s.conditions = j.at("conditions").get<std::vector<std::string>>();
    s.wer.resize(static_cast<Eigen::Index>(s.strategies.size()), static_cast<Eigen::Index>(s.conditions.size()));
    for (std::size_t k = 0; k < s.strategies.size(); ++k)
      for (std::size_t c = 0; c < s.conditions.size(); ++c)
        s.wer(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
            j.at("wer").at(s.strategies[k]).at(s.conditions[c]).get<double>();
    s.training = j.value("training", Json::object());
    s.utterances = j.value("utterances", Json::array());
  } catch (const Json::exception& e) {
    throw FormatError(std::string("evaluation file: ") + e.what(), 0);
  }
  return s;
}

/// results.csv, results.json and wer_vs_snr.csv under `out`.
inline SweepTable write_report(const fs::path& out, const std::vector<SeedResult>& seeds) {
  const SweepTable t = aggregate(seeds);
  write_text_file(out / "results.csv", results_csv(t));
  write_text_file(out / "wer_vs_snr.csv", wer_vs_snr_csv(t));
  write_json_file(out / "results.json", results_json(t, seeds));
  return t;
}

}  // namespace avf::experiment
