// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <variant>
#include <vector>

#include "tsample/heads.hpp"
#include "tsample/nn/tensor.hpp"
#include "tsample/pointcloud.hpp"

namespace tsample {

struct LossWeights {
  double alpha = 30.0;  // subset-loss weight

  void validate() const;
};

struct ClassTarget {
  int label = 0;
};

struct ReconTarget {
  Points original;
  double lambda_emd = 0.1;
};

/// The sampled set passed alongside is the source; this carries the sampled
/// target cloud and the ground-truth source-to-target transform.
struct PoseTarget {
  Points target_sampled;
  RigidTransform gt;
  double translation_weight = 1.0;
};

using TaskTarget = std::variant<ClassTarget, ReconTarget, PoseTarget>;

namespace loss {

/// Mean cross entropy of (B x C) logits against labels.
nn::Var cross_entropy(const nn::Var& logits, const std::vector<int>& labels);
/// Batch mean of the symmetric squared Chamfer distance.
nn::Var chamfer(const nn::Var& a, nn::Index ka, const nn::Var& b, nn::Index kb);
/// Batch mean of the mean-distance EMD; equal sizes k per item.
nn::Var earth_mover(const nn::Var& a, const nn::Var& b, nn::Index k);
/// Batch mean of (1/m) sum_i min_p |q_i - p|^2; sources are constants.
nn::Var subset(const nn::Mat& sources, nn::Index n, const nn::Var& generated, nn::Index m);
/// Batch mean of |q - q*|^2 (q* sign-aligned to q) + w |t - t*|^2.
nn::Var pose(const nn::Var& pred, const std::vector<RigidTransform>& gt,
             double translation_weight);

}  // namespace loss

/// Differentiable single-item task loss on a sampled set (k x 3).
nn::Var task_loss_var(TaskHead& head, const nn::Var& sampled, const TaskTarget& target,
                      bool training = false);
nn::Var total_loss_var(TaskHead& head, const nn::Var& sampled, const TaskTarget& target,
                       const PointCloud& source, const LossWeights& weights,
                       bool training = false);

double task_loss(TaskHead& head, const Points& sampled, const TaskTarget& target);
/// Mean over generated points of squared distance to the nearest source point.
double subset_loss(const PointCloud& source, const Points& generated);
double total_loss(TaskHead& head, const Points& sampled, const TaskTarget& target,
                  const PointCloud& source, const LossWeights& weights);

}  // namespace tsample
