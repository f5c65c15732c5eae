// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

namespace tsample {

using CostMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Exact minimum-cost perfect matching of a square cost matrix by shortest
/// augmenting paths with potentials, O(n^3). Returns col[row].
std::vector<int> solve_assignment(const CostMatrix& cost);

struct SinkhornOptions {
  // Final entropic regularization relative to the mean cost.
  double relative_epsilon = 2e-3;
  int iterations_per_stage = 40;
  int final_iterations = 200;
};

/// Entropy-regularized transport between uniform marginals, log-domain with
/// epsilon scaling. Returns the transport plan (entries sum to 1).
CostMatrix sinkhorn_plan(const CostMatrix& cost, const SinkhornOptions& options = {});

}  // namespace tsample
