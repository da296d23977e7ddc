// include/avfusion/nn/train.hpp

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
#include <concepts>
#include <limits>
#include <numeric>
#include <vector>

#include "avfusion/core/json_reader.hpp"
#include "avfusion/nn/adam.hpp"
#include "avfusion/nn/network.hpp"

namespace avf::nn {

struct TrainConfig {
  double lr0 = 5e-4;
  double lr_decay = 0.8;
  int batch = 10;
  int check_interval = 100;  // optimizer steps between validation checks
  int patience = 300;        // steps without improvement before stopping
  long max_steps = 100000;
  double clip_norm = 0.0;  // 0 disables gradient clipping
  std::uint64_t seed = 0;

  void validate(const std::string& path = "train") const {
    if (!(lr0 > 0.0)) throw ConfigError(path + ".lr0", "must be > 0");
    if (!(lr_decay > 0.0 && lr_decay < 1.0)) throw ConfigError(path + ".lr_decay", "must be in (0, 1)");
    if (batch < 1) throw ConfigError(path + ".batch", "must be >= 1");
    if (check_interval < 1) throw ConfigError(path + ".check_interval", "must be >= 1");
    if (patience < 0) throw ConfigError(path + ".patience", "must be >= 0");
    if (max_steps < 1) throw ConfigError(path + ".max_steps", "must be >= 1");
  }
};

inline TrainConfig parse_train_config(const Json& j, const std::string& path = "train", TrainConfig c = {}) {
  JsonReader r(j, path);
  r.get("lr0", c.lr0);
  r.get("lr_decay", c.lr_decay);
  r.get("batch", c.batch);
  r.get("check_interval", c.check_interval);
  r.get("patience", c.patience);
  r.get("max_steps", c.max_steps);
  r.get("clip_norm", c.clip_norm);
  r.get("seed", c.seed);
  r.finish();
  c.validate(path);
  return c;
}

inline Json to_json(const TrainConfig& c) {
  return {{"lr0", c.lr0},           {"lr_decay", c.lr_decay}, {"batch", c.batch},
          {"check_interval", c.check_interval}, {"patience", c.patience}, {"max_steps", c.max_steps},
          {"clip_norm", c.clip_norm}, {"seed", c.seed}};
}

struct CheckRecord {
  long step = 0;
  double train_loss = 0.0;  // frame-averaged over steps since the previous check
  double valid_loss = 0.0;
  double lr = 0.0;
  bool improved = false;
};

struct TrainResult {
  std::vector<CheckRecord> history;  // entry 0 is the untrained network
  double best_valid = std::numeric_limits<double>::infinity();
  long best_step = 0;
  long steps = 0;
  bool early_stopped = false;
};

/// A training objective over examples of type E.
///   frames(e)                    number of loss terms in e
///   loss_sum(net, e, mode, g)    summed loss; when g > 0 also backpropagates
///                                g * d(sum)/d(params) into the gradients
template <class O, class E>
concept Objective = requires(const O& o, Network& net, const E& e) {
  { o.frames(e) } -> std::convertible_to<long>;
  { o.loss_sum(net, e, Mode::Eval, 0.0) } -> std::convertible_to<double>;
};

template <class E, Objective<E> O>
double mean_loss(Network& net, const std::vector<E>& data, const O& obj) {
  double total = 0.0;
  long frames = 0;
  for (const auto& e : data) {
    total += obj.loss_sum(net, e, Mode::Eval, 0.0);
    frames += obj.frames(e);
  }
  return frames > 0 ? total / static_cast<double>(frames) : 0.0;
}

/// Mini-batch ADAM with validation checks every `check_interval` steps.
/// A check without improvement multiplies the learning rate by `lr_decay`;
/// `patience` steps without improvement stop training. The best validated
/// parameters are restored on return. Batch losses are averaged over all
/// frames of the batch, as with padded and masked sequences.
template <class E, Objective<E> O>
TrainResult train(Network& net, const std::vector<E>& train_set, const std::vector<E>& valid_set, const TrainConfig& cfg,
                  const O& obj) {
  cfg.validate();
  if (train_set.empty()) throw DomainError("train: empty training set");
  const std::vector<E>& valid = valid_set.empty() ? train_set : valid_set;

  TrainResult res;
  auto params = net.params();
  AdamState adam;
  double lr = cfg.lr0;
  Rng rng(derive_seed(cfg.seed, "shuffle"));

  res.best_valid = mean_loss(net, valid, obj);
  res.history.push_back({0, res.best_valid, res.best_valid, lr, true});
  std::vector<Matrix> best = net.snapshot();
  long since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  double run_loss = 0.0;
  long run_frames = 0;

  while (res.steps < cfg.max_steps) {
    net.zero_grad();
    std::vector<std::size_t> batch;
    while (static_cast<int>(batch.size()) < cfg.batch && batch.size() < train_set.size()) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    long frames = 0;
    for (auto i : batch) frames += obj.frames(train_set[i]);
    if (frames > 0) {
      for (auto i : batch) run_loss += obj.loss_sum(net, train_set[i], Mode::Train, 1.0 / static_cast<double>(frames));
      run_frames += frames;
      if (cfg.clip_norm > 0.0) clip_grad_norm(params, cfg.clip_norm);
      adam_step(params, adam, lr);
    }
    ++res.steps;

    if (res.steps % cfg.check_interval == 0) {
      CheckRecord rec;
      rec.step = res.steps;
      rec.train_loss = run_frames > 0 ? run_loss / static_cast<double>(run_frames) : 0.0;
      rec.valid_loss = mean_loss(net, valid, obj);
      run_loss = 0.0;
      run_frames = 0;
      if (rec.valid_loss < res.best_valid) {
        res.best_valid = rec.valid_loss;
        res.best_step = res.steps;
        best = net.snapshot();
        since_best = 0;
        rec.improved = true;
      } else {
        lr *= cfg.lr_decay;
        since_best += cfg.check_interval;
      }
      rec.lr = lr;
      res.history.push_back(rec);
      if (since_best >= cfg.patience) {
        res.early_stopped = true;
        break;
      }
    }
  }
  net.restore(best);
  return res;
}

}  // namespace avf::nn
