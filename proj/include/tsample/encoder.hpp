// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "tsample/nn/layers.hpp"
#include "tsample/pointcloud.hpp"

namespace tsample {

/// Per-point features: [local | global], global part identical on every row.
struct FeatureMap {
  nn::Mat features;  // n x (local_dim + global_dim)
  int local_dim = 0;
  int global_dim = 0;
};

inline const std::vector<int> kDefaultEncoderWidths = {64, 64, 64, 128, 128};

/// Shared per-point MLP; the last layer's output is max-pooled into a global
/// descriptor that is concatenated back onto every point's local feature.
class PointEncoder {
 public:
  PointEncoder() = default;
  PointEncoder(std::vector<int> widths, std::mt19937_64& rng);

  /// points: (B*n x 3) stacked clouds of n points -> (B*n x 2*width).
  nn::Var forward(const nn::Var& points, nn::Index n, bool training);
  void collect(nn::ParameterSet& set, const std::string& prefix);

  int local_dim() const { return mlp_.out_dim(); }
  int feature_dim() const { return 2 * mlp_.out_dim(); }
  const std::vector<int>& widths() const { return mlp_.widths(); }

 private:
  nn::Mlp mlp_;
};

/// Inference-mode features of a single cloud.
FeatureMap extract_features(const PointCloud& cloud, PointEncoder& encoder);

}  // namespace tsample
