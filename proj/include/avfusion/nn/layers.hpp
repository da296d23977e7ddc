// include/avfusion/nn/layers.hpp

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
#include <memory>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/json_reader.hpp"
#include "avfusion/core/rng.hpp"
#include "avfusion/core/types.hpp"

namespace avf::nn {

enum class Mode { Train, Eval };

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}
};

/// Sequence layer: rows are frames. forward() caches what backward() needs;
/// backward() accumulates parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual Matrix forward(const Matrix& x, Mode mode) = 0;
  virtual Matrix backward(const Matrix& dy) = 0;
  virtual std::vector<Param*> params() { return {}; }
  virtual void init(Rng&) {}
  virtual Json spec() const { return {{"kind", kind()}}; }
  virtual std::unique_ptr<Layer> clone() const = 0;

 protected:
  void check_input(const Matrix& x) const {
    if (x.cols() != input_dim())
      throw ShapeError(kind() + " layer expects " + std::to_string(input_dim()) + " inputs, got " + std::to_string(x.cols()));
  }
  void check_cache(bool present, const Matrix& dy) const {
    if (!present) throw Error(kind() + " backward called without a forward cache");
    if (dy.cols() != output_dim()) throw ShapeError(kind() + " backward: gradient width mismatch");
  }
};

inline void glorot_uniform(Matrix& w, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -limit, limit);
}

/// y = x W + b with W of shape in x out.
class Dense final : public Layer {
 public:
  Dense(int in, int out) : in_(in), out_(out), w_("W", in, out), b_("b", 1, out) {
    if (in < 1 || out < 1) throw ShapeError("dense layer dimensions must be positive");
  }
  std::string kind() const override { return "dense"; }
  int input_dim() const override { return in_; }
  int output_dim() const override { return out_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    x_ = x;
    cached_ = true;
    return (x * w_.value).rowwise() + b_.value.row(0);
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    w_.grad.noalias() += x_.transpose() * dy;
    b_.grad += dy.colwise().sum();
    return dy * w_.value.transpose();
  }
  std::vector<Param*> params() override { return {&w_, &b_}; }
  void init(Rng& rng) override {
    glorot_uniform(w_.value, in_, out_, rng);
    b_.value.setZero();
  }
  Json spec() const override { return {{"kind", kind()}, {"units", out_}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dense>(*this); }

  Param& weight() { return w_; }
  Param& bias() { return b_; }

 private:
  int in_, out_;
  Param w_, b_;
  Matrix x_;
  bool cached_ = false;
};

class Relu final : public Layer {
 public:
  explicit Relu(int dim) : dim_(dim) {}
  std::string kind() const override { return "relu"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    x_ = x;
    cached_ = true;
    return x.cwiseMax(0.0);
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    return (x_.array() > 0.0).select(dy, 0.0);
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Relu>(*this); }

 private:
  int dim_;
  Matrix x_;
  bool cached_ = false;
};

class Tanh final : public Layer {
 public:
  explicit Tanh(int dim) : dim_(dim) {}
  std::string kind() const override { return "tanh"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    y_ = x.array().tanh().matrix();
    cached_ = true;
    return y_;
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    return (dy.array() * (1.0 - y_.array().square())).matrix();
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Tanh>(*this); }

 private:
  int dim_;
  Matrix y_;
  bool cached_ = false;
};

/// Per-frame normalization over the feature axis with learned gain and bias.
class LayerNorm final : public Layer {
 public:
  explicit LayerNorm(int dim, double eps = 1e-5) : dim_(dim), eps_(eps), gamma_("gamma", 1, dim), beta_("beta", 1, dim) {
    gamma_.value.setOnes();
  }
  std::string kind() const override { return "layer_norm"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    const Vector mean = x.rowwise().mean();
    xhat_ = x.colwise() - mean;
    inv_std_ = ((xhat_.array().square().rowwise().sum() / dim_) + eps_).rsqrt().matrix();
    xhat_ = inv_std_.asDiagonal() * xhat_;
    cached_ = true;
    return (xhat_.array().rowwise() * gamma_.value.row(0).array()).matrix().rowwise() + beta_.value.row(0);
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    gamma_.grad += (dy.array() * xhat_.array()).colwise().sum().matrix();
    beta_.grad += dy.colwise().sum();
    const Matrix dxhat = (dy.array().rowwise() * gamma_.value.row(0).array()).matrix();
    const Vector sum_d = dxhat.rowwise().sum();
    const Vector sum_dx = (dxhat.array() * xhat_.array()).rowwise().sum().matrix();
    Matrix dx = dim_ * dxhat;
    dx.colwise() -= sum_d;
    dx -= (xhat_.array().colwise() * sum_dx.array()).matrix();
    return (inv_std_ / dim_).asDiagonal() * dx;
  }
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  void init(Rng&) override {
    gamma_.value.setOnes();
    beta_.value.setZero();
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LayerNorm>(*this); }

 private:
  int dim_;
  double eps_;
  Param gamma_, beta_;
  Matrix xhat_;
  Vector inv_std_;
  bool cached_ = false;
};

/// Inverted dropout; identity in Eval mode.
class Dropout final : public Layer {
 public:
  Dropout(int dim, double p, std::uint64_t seed = 0) : dim_(dim), p_(p), rng_(seed) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("dropout rate must be in [0, 1), got " + std::to_string(p));
  }
  std::string kind() const override { return "dropout"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  double rate() const { return p_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }
  /// Reuse the last mask while the input shape is unchanged (gradient checks).
  void freeze_mask(bool on) { frozen_ = on; }

  Matrix forward(const Matrix& x, Mode mode) override {
    check_input(x);
    cached_ = true;
    if (mode == Mode::Eval || p_ == 0.0) {
      mask_ = Matrix::Ones(x.rows(), x.cols());
      return x;
    }
    if (!(frozen_ && mask_.rows() == x.rows() && mask_.cols() == x.cols())) {
      mask_.resize(x.rows(), x.cols());
      std::bernoulli_distribution keep(1.0 - p_);
      const double scale = 1.0 / (1.0 - p_);
      for (Eigen::Index i = 0; i < mask_.size(); ++i) mask_.data()[i] = keep(rng_) ? scale : 0.0;
    }
    return x.cwiseProduct(mask_);
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    return dy.cwiseProduct(mask_);
  }
  void init(Rng& rng) override { rng_.seed(rng()); }
  Json spec() const override { return {{"kind", kind()}, {"p", p_}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Dropout>(*this); }

 private:
  int dim_;
  double p_;
  Rng rng_;
  Matrix mask_;
  bool frozen_ = false;
  bool cached_ = false;
};

class LogSoftmax final : public Layer {
 public:
  explicit LogSoftmax(int dim) : dim_(dim) {}
  std::string kind() const override { return "log_softmax"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    y_ = log_softmax_rows(x);
    cached_ = true;
    return y_;
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    const Vector s = dy.rowwise().sum();
    return dy - (y_.array().exp().colwise() * s.array()).matrix();
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<LogSoftmax>(*this); }

  static Matrix log_softmax_rows(const Matrix& x) {
    const Vector mx = x.rowwise().maxCoeff();
    Matrix z = x.colwise() - mx;
    const Vector lse = z.array().exp().rowwise().sum().log().matrix();
    z.colwise() -= lse;
    return z;
  }

 private:
  int dim_;
  Matrix y_;
  bool cached_ = false;
};

class Softmax final : public Layer {
 public:
  explicit Softmax(int dim) : dim_(dim) {}
  std::string kind() const override { return "softmax"; }
  int input_dim() const override { return dim_; }
  int output_dim() const override { return dim_; }
  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    y_ = LogSoftmax::log_softmax_rows(x).array().exp().matrix();
    cached_ = true;
    return y_;
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    const Vector s = (dy.array() * y_.array()).rowwise().sum().matrix();
    return (y_.array() * (dy.colwise() - s).array()).matrix();
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Softmax>(*this); }

 private:
  int dim_;
  Matrix y_;
  bool cached_ = false;
};

/// Single-direction LSTM, gate order [i, f, g, o]. With reverse = true the
/// sequence is processed from the last frame to the first.
class Lstm final : public Layer {
 public:
  Lstm(int in, int hidden, bool reverse = false)
      : in_(in), h_(hidden), reverse_(reverse), wx_("Wx", in, 4 * hidden), wh_("Wh", hidden, 4 * hidden), b_("b", 1, 4 * hidden) {
    if (in < 1 || hidden < 1) throw ShapeError("lstm dimensions must be positive");
  }
  std::string kind() const override { return "lstm"; }
  int input_dim() const override { return in_; }
  int output_dim() const override { return h_; }
  int hidden() const { return h_; }

  Matrix forward(const Matrix& x, Mode) override {
    check_input(x);
    const Eigen::Index T = x.rows();
    x_ = x;
    gates_ = (x * wx_.value).rowwise() + b_.value.row(0);
    c_.resize(T, h_);
    tanh_c_.resize(T, h_);
    h_out_.resize(T, h_);
    const RowMajor wht = wh_.value;
    RowVector z(4 * h_);
    for (Eigen::Index k = 0; k < T; ++k) {
      const Eigen::Index t = reverse_ ? T - 1 - k : k;
      const Eigen::Index tp = reverse_ ? t + 1 : t - 1;
      auto gate = gates_.row(t);
      if (k > 0) gate.noalias() += h_out_.row(tp) * wht;
      gate.segment(0, 2 * h_) = sigmoid(gate.segment(0, 2 * h_));
      gate.segment(2 * h_, h_) = gate.segment(2 * h_, h_).array().tanh().matrix();
      gate.segment(3 * h_, h_) = sigmoid(gate.segment(3 * h_, h_));
      auto c = c_.row(t);
      c = gate.segment(0, h_).cwiseProduct(gate.segment(2 * h_, h_));
      if (k > 0) c += gate.segment(h_, h_).cwiseProduct(c_.row(tp));
      tanh_c_.row(t) = c.array().tanh().matrix();
      h_out_.row(t) = gate.segment(3 * h_, h_).cwiseProduct(tanh_c_.row(t));
    }
    cached_ = true;
    return h_out_;
  }

  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    const Eigen::Index T = x_.rows();
    if (dy.rows() != T) throw ShapeError("lstm backward: sequence length mismatch");
    RowMajor dz(T, 4 * h_);
    const RowMajor whT = wh_.value.transpose();
    RowVector dh(h_), dc(h_), dh_next = RowVector::Zero(h_), dc_next = RowVector::Zero(h_);
    for (Eigen::Index k = T - 1; k >= 0; --k) {
      const Eigen::Index t = reverse_ ? T - 1 - k : k;
      const bool first = k == 0;
      const Eigen::Index tp = reverse_ ? t + 1 : t - 1;
      const auto gate = gates_.row(t);
      const auto i = gate.segment(0, h_).array(), f = gate.segment(h_, h_).array(), g = gate.segment(2 * h_, h_).array(),
                 o = gate.segment(3 * h_, h_).array();
      const auto tc = tanh_c_.row(t).array();
      dh = dy.row(t) + dh_next;
      dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
      auto dzt = dz.row(t);
      dzt.segment(0, h_) = (dc.array() * g * i * (1.0 - i)).matrix();
      if (first)
        dzt.segment(h_, h_).setZero();
      else
        dzt.segment(h_, h_) = (dc.array() * c_.row(tp).array() * f * (1.0 - f)).matrix();
      dzt.segment(2 * h_, h_) = (dc.array() * i * (1.0 - g.square())).matrix();
      dzt.segment(3 * h_, h_) = (dh.array() * tc * o * (1.0 - o)).matrix();
      dc_next = (dc.array() * f).matrix();
      dh_next.noalias() = dzt * whT;
    }
    // h_{t-1} against dz_t, skipping the first processed frame
    if (T > 1) {
      if (reverse_)
        wh_.grad.noalias() += h_out_.bottomRows(T - 1).transpose() * dz.topRows(T - 1);
      else
        wh_.grad.noalias() += h_out_.topRows(T - 1).transpose() * dz.bottomRows(T - 1);
    }
    wx_.grad.noalias() += x_.transpose() * dz;
    b_.grad += dz.colwise().sum();
    return dz * wx_.value.transpose();
  }

  std::vector<Param*> params() override { return {&wx_, &wh_, &b_}; }
  void init(Rng& rng) override {
    glorot_uniform(wx_.value, in_, 4 * h_, rng);
    glorot_uniform(wh_.value, h_, 4 * h_, rng);
    b_.value.setZero();
    b_.value.block(0, h_, 1, h_).setOnes();  // forget-gate bias
  }
  Json spec() const override { return {{"kind", kind()}, {"units", h_}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Lstm>(*this); }

 private:
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  template <typename V>
  static RowVector sigmoid(const V& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }

  int in_, h_;
  bool reverse_;
  Param wx_, wh_, b_;
  Matrix x_;
  RowMajor gates_, c_, tanh_c_, h_out_;
  bool cached_ = false;
};

/// Bidirectional LSTM; output frame t is [h_fwd(t); h_bwd(t)].
class Blstm final : public Layer {
 public:
  Blstm(int in, int hidden) : fwd_(in, hidden, false), bwd_(in, hidden, true) {}
  std::string kind() const override { return "blstm"; }
  int input_dim() const override { return fwd_.input_dim(); }
  int output_dim() const override { return 2 * fwd_.hidden(); }
  Matrix forward(const Matrix& x, Mode mode) override {
    check_input(x);
    Matrix y(x.rows(), output_dim());
    y.leftCols(fwd_.hidden()) = fwd_.forward(x, mode);
    y.rightCols(fwd_.hidden()) = bwd_.forward(x, mode);
    cached_ = true;
    return y;
  }
  Matrix backward(const Matrix& dy) override {
    check_cache(cached_, dy);
    return fwd_.backward(dy.leftCols(fwd_.hidden())) + bwd_.backward(dy.rightCols(fwd_.hidden()));
  }
  std::vector<Param*> params() override {
    auto p = fwd_.params();
    for (auto* q : bwd_.params()) p.push_back(q);
    return p;
  }
  void init(Rng& rng) override {
    fwd_.init(rng);
    bwd_.init(rng);
  }
  Json spec() const override { return {{"kind", kind()}, {"units", fwd_.hidden()}}; }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<Blstm>(*this); }

 private:
  Lstm fwd_, bwd_;
  bool cached_ = false;
};

}  // namespace avf::nn
