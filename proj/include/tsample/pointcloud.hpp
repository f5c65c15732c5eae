// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsample {

/// Dense n x 3 coordinate array, one point per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using IndexList = std::vector<int>;

// Error hierarchy. Argument and configuration errors map to CLI exit code 2,
// divergence to exit code 3.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unordered set of 3D points. Row order carries no meaning.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(Points points, std::optional<int> label = std::nullopt,
                      std::string name = {});

  const Points& points() const { return points_; }
  int size() const { return static_cast<int>(points_.rows()); }
  const std::optional<int>& label() const { return label_; }
  const std::string& name() const { return name_; }

  void set_label(std::optional<int> label) { label_ = label; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Rows selected by `indices`, in the given order.
  PointCloud subset(const IndexList& indices) const;
  /// Same cloud with rows reordered so that row i is old row perm[i].
  PointCloud permuted(const IndexList& perm) const;

 private:
  Points points_;
  std::optional<int> label_;
  std::string name_;
};

/// Rotation as a unit quaternion plus a translation; maps p to R p + t.
struct RigidTransform {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RigidTransform() = default;
  RigidTransform(const Eigen::Quaterniond& q, const Eigen::Vector3d& t);

  Points apply(const Points& points) const;
  RigidTransform inverse() const;
};

/// The three sampled-set flavors produced by a learned sampler.
struct DownsampleResult {
  Points generated;     // m x 3, Q = S^T P
  IndexList matched;    // unique nearest-source indices, |matched| <= m
  IndexList completed;  // matched extended by farthest-point completion, |completed| = m
};

/// Centers the cloud at the origin and scales it to unit max radius.
Points normalize_unit_sphere(const Points& points);

void check_finite(const Points& points, const char* what);

}  // namespace tsample
