// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace tsample {

NearestNeighbors nearest_neighbors(const Points& queries, const Points& reference) {
  if (reference.rows() == 0) throw ArgumentError("nearest neighbor: empty reference");
  NearestNeighbors out;
  out.index.resize(queries.rows());
  out.sq_dist.resize(queries.rows());
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const double qx = queries(q, 0), qy = queries(q, 1), qz = queries(q, 2);
    double best = std::numeric_limits<double>::infinity();
    int best_idx = 0;
    for (Eigen::Index r = 0; r < reference.rows(); ++r) {
      const double dx = reference(r, 0) - qx;
      const double dy = reference(r, 1) - qy;
      const double dz = reference(r, 2) - qz;
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        best_idx = static_cast<int>(r);
      }
    }
    out.index[q] = best_idx;
    out.sq_dist[q] = best;
  }
  return out;
}

double chamfer_distance(const Points& a, const Points& b) {
  if (a.rows() == 0 || b.rows() == 0) throw ArgumentError("chamfer distance: empty cloud");
  // Sequential sums keep the value independent of vectorization.
  const auto mean = [](const Eigen::VectorXd& v) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) total += v[i];
    return total / static_cast<double>(v.size());
  };
  return mean(nearest_neighbors(a, b).sq_dist) + mean(nearest_neighbors(b, a).sq_dist);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  return chamfer_distance(a.points(), b.points());
}

namespace {

CostMatrix distance_matrix(const Points& a, const Points& b) {
  CostMatrix cost(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) cost(i, j) = (a.row(i) - b.row(j)).norm();
  }
  return cost;
}

}  // namespace

TransportSolution earth_mover_solution(const Points& a, const Points& b) {
  if (a.rows() != b.rows()) {
    throw ArgumentError("earth mover distance needs equal-size clouds");
  }
  if (a.rows() == 0) throw ArgumentError("earth mover distance: empty cloud");
  const int n = static_cast<int>(a.rows());
  const CostMatrix cost = distance_matrix(a, b);
  TransportSolution out;
  if (n <= kExactEmdLimit) {
    const std::vector<int> match = solve_assignment(cost);
    const double w = 1.0 / n;
    out.flow.reserve(n);
    for (int i = 0; i < n; ++i) {
      out.flow.push_back({i, match[i], w});
      out.cost += w * cost(i, match[i]);
    }
    return out;
  }
  const CostMatrix plan = sinkhorn_plan(cost);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (plan(i, j) > 1e-12) {
        out.flow.push_back({i, j, plan(i, j)});
        out.cost += plan(i, j) * cost(i, j);
      }
    }
  }
  return out;
}

double earth_mover_distance(const Points& a, const Points& b) {
  return earth_mover_solution(a, b).cost;
}

double earth_mover_distance(const PointCloud& a, const PointCloud& b) {
  return earth_mover_distance(a.points(), b.points());
}

const char* to_string(ReconMetric metric) {
  return metric == ReconMetric::kChamfer ? "CD" : "EMD";
}

double nre(const PointCloud& original, const PointCloud& recon_from_q,
           const PointCloud& recon_from_p, ReconMetric metric) {
  auto eval = [&](const PointCloud& recon) {
    return metric == ReconMetric::kChamfer ? chamfer_distance(original, recon)
                                           : earth_mover_distance(original, recon);
  };
  const double denominator = eval(recon_from_p);
  if (!(denominator > 0.0)) {
    throw DegenerateInputError(std::string("NRE denominator ") + to_string(metric) +
                               " is zero");
  }
  return eval(recon_from_q) / denominator;
}

double rotation_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  // 2 acos(|<a,b>|) as 4 atan2(min(|a-b|, |a+b|), max(...)) on unit
  // quaternions: exact zero for equal or opposite inputs, stable near zero.
  const Eigen::Vector4d qa = a.coeffs().normalized();
  const Eigen::Vector4d qb = b.coeffs().normalized();
  const double diff = (qa - qb).norm();
  const double sum = (qa + qb).norm();
  return 4.0 * std::atan2(std::min(diff, sum), std::max(diff, sum)) * 180.0 / std::numbers::pi;
}

double mean_rotation_error(const std::vector<RigidTransform>& pred,
                           const std::vector<RigidTransform>& gt) {
  if (pred.size() != gt.size()) throw ArgumentError("MRE: length mismatch");
  if (pred.empty()) throw ArgumentError("MRE: empty lists");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sum += rotation_angle_deg(pred[i].rotation, gt[i].rotation);
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace tsample
