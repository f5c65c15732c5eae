// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tsample/assignment.hpp"
#include "tsample/pointcloud.hpp"

namespace tsample {

struct NearestNeighbors {
  std::vector<int> index;  // nearest reference row per query, lowest index on ties
  Eigen::VectorXd sq_dist;
};

/// Exhaustive nearest-neighbor search, O(|queries| * |reference|).
NearestNeighbors nearest_neighbors(const Points& queries, const Points& reference);

/// Symmetric mean-of-squared-distances Chamfer distance:
/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2.
double chamfer_distance(const Points& a, const Points& b);
double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// Sizes up to this use the exact assignment solver.
inline constexpr int kExactEmdLimit = 256;

struct TransportEntry {
  int source;
  int target;
  double weight;
};

/// Optimal (or entropic, above kExactEmdLimit) coupling between equal-size
/// clouds. Weights sum to 1; cost = sum weight * |a_source - b_target|.
struct TransportSolution {
  double cost = 0.0;
  std::vector<TransportEntry> flow;
};

TransportSolution earth_mover_solution(const Points& a, const Points& b);

/// Mean per-point Euclidean distance under the optimal bijection.
double earth_mover_distance(const Points& a, const Points& b);
double earth_mover_distance(const PointCloud& a, const PointCloud& b);

enum class ReconMetric { kChamfer, kEarthMover };

const char* to_string(ReconMetric metric);

/// metric(original, recon_from_q) / metric(original, recon_from_p).
double nre(const PointCloud& original, const PointCloud& recon_from_q,
           const PointCloud& recon_from_p, ReconMetric metric);

/// Geodesic angle 2 acos(|<q1, q2>|) in degrees.
double rotation_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Mean geodesic rotation error in degrees.
double mean_rotation_error(const std::vector<RigidTransform>& pred,
                           const std::vector<RigidTransform>& gt);

}  // namespace tsample
