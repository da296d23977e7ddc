// include/avfusion/reliability/reliability_vector.hpp

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

// Fixed column layout of the per-frame reliability vector R_t.
//
// With the default 5 MFCCs and 5 DCT coefficients the layout has 41 columns:
//   per stream (A, VA, VS): entropy, dispersion, posterior difference,
//     temporal divergence, entropy ratio, dispersion ratio        3 x 6 = 18
//   audio: mfcc[5], delta_mfcc[5], snr, f0, delta_f0, voicing         14
//   video: confidence, idct[5], brightness, blur, rotation            9

#include <map>
#include <string>
#include <vector>

#include "avfusion/core/types.hpp"
#include "avfusion/reliability/model_measures.hpp"

namespace avf::reliability {

struct Slice {
  Eigen::Index offset = 0;
  Eigen::Index length = 0;
};

class ReliabilityLayout {
 public:
  explicit ReliabilityLayout(int num_mfcc = 5, int num_idct = 5) : num_mfcc_(num_mfcc), num_idct_(num_idct) {
    if (num_mfcc < 1 || num_idct < 1) throw ConfigError("reliability", "coefficient counts must be positive");
    static constexpr const char* kMeasureNames[kNumModelMeasures] = {
        "entropy", "dispersion", "posterior_difference", "temporal_divergence", "entropy_ratio", "dispersion_ratio"};
    for (StreamId s : kAllStreams)
      add("model." + std::string(to_string(s)), kNumModelMeasures, [&](int i) {
        return std::string(to_string(s)) + "." + kMeasureNames[i];
      });
    add("audio.mfcc", num_mfcc, [](int i) { return "mfcc" + std::to_string(i); });
    add("audio.delta_mfcc", num_mfcc, [](int i) { return "delta_mfcc" + std::to_string(i); });
    add("audio.snr", 1, [](int) { return std::string("snr"); });
    add("audio.f0", 1, [](int) { return std::string("f0"); });
    add("audio.delta_f0", 1, [](int) { return std::string("delta_f0"); });
    add("audio.voicing", 1, [](int) { return std::string("voicing"); });
    add("video.confidence", 1, [](int) { return std::string("confidence"); });
    add("video.idct", num_idct, [](int i) { return "idct" + std::to_string(i); });
    add("video.brightness", 1, [](int) { return std::string("brightness"); });
    add("video.blur", 1, [](int) { return std::string("blur"); });
    add("video.rotation", 1, [](int) { return std::string("rotation"); });
  }

  Eigen::Index dim() const { return dim_; }
  int num_mfcc() const { return num_mfcc_; }
  int num_idct() const { return num_idct_; }
  const std::vector<std::string>& column_names() const { return columns_; }
  const std::vector<std::string>& block_names() const { return order_; }

  Slice slice(const std::string& name) const {
    const auto it = blocks_.find(name);
    if (it == blocks_.end()) throw ShapeError("unknown reliability block '" + name + "'");
    return it->second;
  }

  Matrix extract(const Matrix& r, const std::string& name) const {
    const Slice s = slice(name);
    return r.middleCols(s.offset, s.length);
  }

 private:
  template <class NameFn>
  void add(const std::string& block, int length, NameFn&& column) {
    blocks_[block] = Slice{dim_, length};
    order_.push_back(block);
    for (int i = 0; i < length; ++i) columns_.push_back(column(i));
    dim_ += length;
  }

  int num_mfcc_, num_idct_;
  Eigen::Index dim_ = 0;
  std::map<std::string, Slice> blocks_;
  std::vector<std::string> order_;
  std::vector<std::string> columns_;
};

/// Audio-rate signal features, each with T rows.
struct AudioSignalFeatures {
  Matrix mfcc;        // T x num_mfcc
  Matrix delta_mfcc;  // T x num_mfcc
  Vector snr_db;
  Vector f0;
  Vector delta_f0;
  Vector voicing;
};

/// Video features already aligned to the audio rate, each with T rows.
struct VideoSignalFeatures {
  Vector confidence;
  Matrix idct;  // T x num_idct
  Vector brightness;
  Vector blur;
  Vector rotation;
};

inline Matrix assemble_reliability_vector(const ReliabilityLayout& layout, const AudioSignalFeatures& audio,
                                          const VideoSignalFeatures& video, const ModelReliability& model) {
  const Eigen::Index T = audio.mfcc.rows();
  Matrix r(T, layout.dim());
  auto put = [&](const std::string& name, const Matrix& block) {
    const Slice s = layout.slice(name);
    if (block.rows() != T || block.cols() != s.length)
      throw ShapeError("reliability block '" + name + "' is " + std::to_string(block.rows()) + "x" +
                       std::to_string(block.cols()) + ", expected " + std::to_string(T) + "x" +
                       std::to_string(s.length));
    r.middleCols(s.offset, s.length) = block;
  };
  for (StreamId s : kAllStreams)
    put("model." + std::string(to_string(s)), model.per_stream[static_cast<std::size_t>(index_of(s))]);
  put("audio.mfcc", audio.mfcc);
  put("audio.delta_mfcc", audio.delta_mfcc);
  put("audio.snr", audio.snr_db);
  put("audio.f0", audio.f0);
  put("audio.delta_f0", audio.delta_f0);
  put("audio.voicing", audio.voicing);
  put("video.confidence", video.confidence);
  put("video.idct", video.idct);
  put("video.brightness", video.brightness);
  put("video.blur", video.blur);
  put("video.rotation", video.rotation);
  return r;
}

}  // namespace avf::reliability
