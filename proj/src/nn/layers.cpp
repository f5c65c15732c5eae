// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/nn/layers.hpp"

#include <cmath>

#include "tsample/pointcloud.hpp"

namespace tsample::nn {

void ParameterSet::add_param(std::string name, Var var) {
  params_.push_back({std::move(name), std::move(var)});
}

void ParameterSet::add_buffer(std::string name, Mat* value) {
  buffers_.push_back({std::move(name), value});
}

std::vector<Var> ParameterSet::trainable() const {
  std::vector<Var> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.var);
  return out;
}

Index ParameterSet::count() const {
  Index total = 0;
  for (const auto& p : params_) total += p.var.value().size();
  return total;
}

uint64_t ParameterSet::checksum() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const Mat& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (size_t i = 0; i < static_cast<size_t>(m.size()) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : params_) mix(p.var.value());
  for (const auto& b : buffers_) mix(*b.value);
  return h;
}

Linear::Linear(int in, int out, std::mt19937_64& rng, double gain) {
  if (in < 1 || out < 1) throw ConfigError("linear layer widths must be positive");
  std::normal_distribution<double> normal(0.0, std::sqrt(gain / in));
  Mat w(in, out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  weight_ = Var(std::move(w), true);
  bias_ = Var(Mat::Zero(1, out), true);
}

Var Linear::forward(const Var& x) const {
  if (x.cols() != weight_.rows()) {
    throw ConfigError("linear layer expects " + std::to_string(weight_.rows()) +
                      " input channels, got " + std::to_string(x.cols()));
  }
  return add_bias(matmul(x, weight_), bias_);
}

void Linear::collect(ParameterSet& set, const std::string& prefix) {
  set.add_param(prefix + ".weight", weight_);
  set.add_param(prefix + ".bias", bias_);
}

BatchNorm::BatchNorm(int channels)
    : gamma_(Mat::Ones(1, channels), true),
      beta_(Mat::Zero(1, channels), true),
      stats_{Mat::Zero(1, channels), Mat::Ones(1, channels)} {}

Var BatchNorm::forward(const Var& x, bool training) {
  return batch_norm(x, gamma_, beta_, stats_, training);
}

void BatchNorm::collect(ParameterSet& set, const std::string& prefix) {
  set.add_param(prefix + ".gamma", gamma_);
  set.add_param(prefix + ".beta", beta_);
  set.add_buffer(prefix + ".running_mean", &stats_.running_mean);
  set.add_buffer(prefix + ".running_var", &stats_.running_var);
}

Mlp::Mlp(int in, std::vector<int> widths, MlpOptions options, std::mt19937_64& rng)
    : in_(in), widths_(std::move(widths)), options_(options) {
  if (in < 1) throw ConfigError("MLP input width must be positive");
  int prev = in;
  for (size_t i = 0; i < widths_.size(); ++i) {
    if (widths_[i] < 1) throw ConfigError("MLP widths must be positive");
    const bool last = i + 1 == widths_.size();
    const bool activated = !last || options_.activate_last;
    layers_.emplace_back(prev, widths_[i], rng, activated ? 2.0 : 1.0);
    if (activated && options_.batch_norm) norms_.emplace_back(widths_[i]);
    prev = widths_[i];
  }
}

Var Mlp::forward(const Var& x, bool training) {
  Var h = x;
  size_t norm = 0;
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    const bool last = i + 1 == layers_.size();
    if (last && !options_.activate_last) break;
    if (options_.batch_norm) h = norms_[norm++].forward(h, training);
    h = relu(h);
  }
  return h;
}

void Mlp::collect(ParameterSet& set, const std::string& prefix) {
  size_t norm = 0;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const std::string name = prefix + ".layer" + std::to_string(i);
    layers_[i].collect(set, name);
    const bool last = i + 1 == layers_.size();
    if ((!last || options_.activate_last) && options_.batch_norm) {
      norms_[norm++].collect(set, name + ".norm");
    }
  }
}

}  // namespace tsample::nn
