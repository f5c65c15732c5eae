// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/encoder.hpp"

namespace tsample {

PointEncoder::PointEncoder(std::vector<int> widths, std::mt19937_64& rng) {
  if (widths.empty()) throw ConfigError("encoder needs at least one layer");
  mlp_ = nn::Mlp(3, std::move(widths), {.batch_norm = true, .activate_last = true}, rng);
}

nn::Var PointEncoder::forward(const nn::Var& points, nn::Index n, bool training) {
  if (points.cols() != 3) throw ConfigError("encoder input must have 3 columns");
  if (n < 1 || points.rows() % n != 0) {
    throw ArgumentError("encoder: rows not divisible by cloud size");
  }
  nn::Var local = mlp_.forward(points, training);
  nn::Var global = nn::repeat_rows(nn::segment_max(local, n), n);
  return nn::concat_cols({local, global});
}

void PointEncoder::collect(nn::ParameterSet& set, const std::string& prefix) {
  mlp_.collect(set, prefix + ".mlp");
}

FeatureMap extract_features(const PointCloud& cloud, PointEncoder& encoder) {
  nn::Var input(nn::Mat(cloud.points()));
  nn::Var f = encoder.forward(input, cloud.size(), false);
  return {f.value(), encoder.local_dim(), encoder.local_dim()};
}

}  // namespace tsample
