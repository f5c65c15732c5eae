// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsample/pointcloud.hpp"

namespace tsample {

std::vector<int> solve_assignment(const CostMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw ArgumentError("assignment needs a square cost matrix");
  if (!cost.allFinite()) throw ArgumentError("assignment needs finite costs");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based arrays; row 0 / column 0 are the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      const double* row = cost.data() + static_cast<Eigen::Index>(i0 - 1) * n;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

namespace {

double log_sum_exp(const double* values, int count, int stride) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) best = std::max(best, values[k * stride]);
  double sum = 0.0;
  for (int k = 0; k < count; ++k) sum += std::exp(values[k * stride] - best);
  return best + std::log(sum);
}

}  // namespace

CostMatrix sinkhorn_plan(const CostMatrix& cost, const SinkhornOptions& options) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (n == 0 || m == 0) throw ArgumentError("sinkhorn needs a nonempty cost matrix");
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  const double mean_cost = cost.mean();
  const double target_eps = std::max(options.relative_epsilon * mean_cost, 1e-12);
  double eps = std::max(cost.maxCoeff(), target_eps);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  CostMatrix scratch(n, m);
  auto iterate = [&](int iterations) {
    for (int it = 0; it < iterations; ++it) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) scratch(i, j) = (g[j] - cost(i, j)) / eps;
        f[i] = eps * (log_a - log_sum_exp(&scratch(i, 0), m, 1));
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) scratch(i, j) = (f[i] - cost(i, j)) / eps;
      }
      for (int j = 0; j < m; ++j) {
        g[j] = eps * (log_b - log_sum_exp(&scratch(0, j), n, m));
      }
    }
  };
  while (eps > target_eps) {
    iterate(options.iterations_per_stage);
    eps = std::max(eps * 0.5, target_eps);
  }
  iterate(options.final_iterations);

  CostMatrix plan(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / eps);
  }
  plan /= plan.sum();
  return plan;
}

}  // namespace tsample
