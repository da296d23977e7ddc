// include/avfusion/nn/network.hpp

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

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "avfusion/core/matrix_io.hpp"
#include "avfusion/nn/layers.hpp"

namespace avf::nn {

/// One entry of a network topology. `units` is the output width of dense,
/// lstm and blstm (per direction) layers; `p` is the dropout rate.
struct LayerSpec {
  std::string kind;
  int units = 0;
  double p = 0.0;

  static LayerSpec dense(int units) { return {"dense", units, 0.0}; }
  static LayerSpec relu() { return {"relu", 0, 0.0}; }
  static LayerSpec tanh() { return {"tanh", 0, 0.0}; }
  static LayerSpec layer_norm() { return {"layer_norm", 0, 0.0}; }
  static LayerSpec dropout(double p) { return {"dropout", 0, p}; }
  static LayerSpec lstm(int h) { return {"lstm", h, 0.0}; }
  static LayerSpec blstm(int h) { return {"blstm", h, 0.0}; }
  static LayerSpec log_softmax() { return {"log_softmax", 0, 0.0}; }
  static LayerSpec softmax() { return {"softmax", 0, 0.0}; }
};

inline std::unique_ptr<Layer> make_layer(const LayerSpec& s, int in) {
  if (s.kind == "dense") return std::make_unique<Dense>(in, s.units);
  if (s.kind == "relu") return std::make_unique<Relu>(in);
  if (s.kind == "tanh") return std::make_unique<Tanh>(in);
  if (s.kind == "layer_norm") return std::make_unique<LayerNorm>(in);
  if (s.kind == "dropout") return std::make_unique<Dropout>(in, s.p);
  if (s.kind == "lstm") return std::make_unique<Lstm>(in, s.units);
  if (s.kind == "blstm") return std::make_unique<Blstm>(in, s.units);
  if (s.kind == "log_softmax") return std::make_unique<LogSoftmax>(in);
  if (s.kind == "softmax") return std::make_unique<Softmax>(in);
  throw DomainError("unknown layer kind '" + s.kind + "'");
}

class Network {
 public:
  Network() = default;
  Network(int input_dim, const std::vector<LayerSpec>& specs) : input_dim_(input_dim) {
    if (input_dim < 1) throw ShapeError("network input dimension must be positive");
    int d = input_dim;
    for (const auto& s : specs) {
      layers_.push_back(make_layer(s, d));
      d = layers_.back()->output_dim();
    }
  }
  Network(const Network& o) : input_dim_(o.input_dim_) {
    for (const auto& l : o.layers_) layers_.push_back(l->clone());
  }
  Network& operator=(const Network& o) {
    if (this != &o) {
      Network tmp(o);
      std::swap(layers_, tmp.layers_);
      input_dim_ = o.input_dim_;
    }
    return *this;
  }
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  int input_dim() const { return input_dim_; }
  int output_dim() const { return layers_.empty() ? input_dim_ : layers_.back()->output_dim(); }
  std::size_t size() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }

  /// Glorot weights, zero biases; dropout layers get derived seeds.
  void init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, "init"));
    for (auto& l : layers_) l->init(rng);
  }

  Matrix forward(const Matrix& x, Mode mode) {
    Matrix h = x;
    for (auto& l : layers_) h = l->forward(h, mode);
    return h;
  }

  Matrix backward(const Matrix& dy) {
    Matrix g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<Param*> params() {
    std::vector<Param*> out;
    for (auto& l : layers_)
      for (auto* p : l->params()) out.push_back(p);
    return out;
  }

  void zero_grad() {
    for (auto* p : params()) p->grad.setZero();
  }

  std::vector<Matrix> snapshot() {
    std::vector<Matrix> out;
    for (auto* p : params()) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Matrix>& values) {
    auto ps = params();
    if (ps.size() != values.size()) throw ShapeError("parameter snapshot does not match the network");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i]->value.rows() != values[i].rows() || ps[i]->value.cols() != values[i].cols())
        throw ShapeError("parameter '" + ps[i]->name + "' has the wrong shape");
      ps[i]->value = values[i];
    }
  }

  std::size_t num_parameters() {
    std::size_t n = 0;
    for (auto* p : params()) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

  Json topology() const {
    Json layers = Json::array();
    for (const auto& l : layers_) layers.push_back(l->spec());
    return {{"input_dim", input_dim_}, {"layers", layers}};
  }

  static Network from_topology(const Json& j, const std::string& path = "topology") {
    JsonReader r(j, path);
    const int in = r.require<int>("input_dim");
    std::vector<LayerSpec> specs;
    const Json* layers = r.child("layers");
    if (!layers || !layers->is_array()) throw ConfigError(path + ".layers", "must be an array");
    for (std::size_t i = 0; i < layers->size(); ++i) {
      JsonReader lr((*layers)[i], path + ".layers[" + std::to_string(i) + "]");
      LayerSpec s;
      s.kind = lr.require<std::string>("kind");
      lr.get("units", s.units);
      lr.get("p", s.p);
      lr.finish();
      specs.push_back(s);
    }
    r.finish();
    return Network(in, specs);
  }

 private:
  int input_dim_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Checkpoint: `<dir>/topology.json` plus one AVPF file per parameter and
/// per named extra matrix (e.g. input normalization statistics).
inline void save_checkpoint(Network& net, const std::filesystem::path& dir, const Json& meta = Json::object(),
                            const std::vector<std::pair<std::string, Matrix>>& extras = {}) {
  std::filesystem::create_directories(dir);
  Json j = net.topology();
  j["meta"] = meta;
  Json extra_names = Json::array();
  for (const auto& [name, m] : extras) {
    io::write_matrix(dir / ("extra_" + name + ".avpf"), m);
    extra_names.push_back(name);
  }
  j["extras"] = extra_names;
  const auto ps = net.params();
  for (std::size_t i = 0; i < ps.size(); ++i)
    io::write_matrix(dir / ("param_" + std::to_string(i) + ".avpf"), ps[i]->value);
  std::ofstream out(dir / "topology.json");
  out << j.dump(2) << "\n";
  if (!out) throw Error("cannot write checkpoint " + dir.string());
}

struct Checkpoint {
  Network net;
  Json meta;
  std::vector<std::pair<std::string, Matrix>> extras;

  const Matrix& extra(const std::string& name) const {
    for (const auto& [n, m] : extras)
      if (n == name) return m;
    throw Error("checkpoint has no matrix '" + name + "'");
  }
};

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "topology.json");
  if (!in) throw Error("cannot read checkpoint " + (dir / "topology.json").string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw ConfigError((dir / "topology.json").string(), e.what());
  }
  Checkpoint ck;
  ck.meta = j.value("meta", Json::object());
  const Json names = j.value("extras", Json::array());
  j.erase("meta");
  j.erase("extras");
  ck.net = Network::from_topology(j, (dir / "topology.json").string());
  std::vector<Matrix> values;
  for (std::size_t i = 0; i < ck.net.params().size(); ++i)
    values.push_back(io::read_matrix(dir / ("param_" + std::to_string(i) + ".avpf")));
  ck.net.restore(values);
  for (const auto& n : names) {
    const auto name = n.get<std::string>();
    ck.extras.emplace_back(name, io::read_matrix(dir / ("extra_" + name + ".avpf")));
  }
  return ck;
}

}  // namespace avf::nn
