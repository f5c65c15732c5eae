// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsample/nn/ops.hpp"

namespace tsample::nn {

struct NamedParam {
  std::string name;
  Var var;
};

struct NamedBuffer {
  std::string name;
  Mat* value;
};

/// Flat registry of a model's trainable parameters and non-trainable
/// buffers (normalization statistics), keyed by dotted names.
class ParameterSet {
 public:
  void add_param(std::string name, Var var);
  void add_buffer(std::string name, Mat* value);

  const std::vector<NamedParam>& params() const { return params_; }
  const std::vector<NamedBuffer>& buffers() const { return buffers_; }
  std::vector<Var> trainable() const;
  /// Number of trainable scalars.
  Index count() const;
  /// FNV-1a over the raw bytes of every parameter and buffer.
  uint64_t checksum() const;

 private:
  std::vector<NamedParam> params_;
  std::vector<NamedBuffer> buffers_;
};

class Linear {
 public:
  Linear() = default;
  /// Weights ~ N(0, gain / fan_in), zero bias.
  Linear(int in, int out, std::mt19937_64& rng, double gain = 2.0);

  Var forward(const Var& x) const;
  void collect(ParameterSet& set, const std::string& prefix);
  int in_dim() const { return static_cast<int>(weight_.rows()); }
  int out_dim() const { return static_cast<int>(weight_.cols()); }

  Var& weight() { return weight_; }
  Var& bias() { return bias_; }

 private:
  Var weight_;  // in x out
  Var bias_;    // 1 x out
};

class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(int channels);

  Var forward(const Var& x, bool training);
  void collect(ParameterSet& set, const std::string& prefix);

 private:
  Var gamma_;
  Var beta_;
  BatchNormStats stats_;
};

struct MlpOptions {
  bool batch_norm = true;
  // Apply normalization + ReLU after the last layer too (PointNet-style
  // shared feature maps); otherwise the last layer is purely linear.
  bool activate_last = true;
};

/// Stack of Linear [-> BatchNorm] -> ReLU layers applied row-wise.
class Mlp {
 public:
  Mlp() = default;
  Mlp(int in, std::vector<int> widths, MlpOptions options, std::mt19937_64& rng);

  Var forward(const Var& x, bool training);
  void collect(ParameterSet& set, const std::string& prefix);
  int in_dim() const { return in_; }
  int out_dim() const { return widths_.empty() ? in_ : widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  std::vector<Linear>& layers() { return layers_; }

 private:
  int in_ = 0;
  std::vector<int> widths_;
  MlpOptions options_;
  std::vector<Linear> layers_;
  std::vector<BatchNorm> norms_;
};

}  // namespace tsample::nn
