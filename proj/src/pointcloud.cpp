// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/pointcloud.hpp"

#include <cmath>

namespace tsample {

PointCloud::PointCloud(Points points, std::optional<int> label,
                       std::string name)
    : points_(std::move(points)), label_(label), name_(std::move(name)) {
  if (points_.rows() < 1) {
    throw ArgumentError("point cloud must contain at least one point");
  }
  check_finite(points_, "point cloud");
}

PointCloud PointCloud::subset(const IndexList& indices) const {
  Points out(static_cast<Eigen::Index>(indices.size()), 3);
  for (size_t i = 0; i < indices.size(); ++i) {
    const int idx = indices[i];
    if (idx < 0 || idx >= size()) {
      throw ArgumentError("subset index out of range");
    }
    out.row(static_cast<Eigen::Index>(i)) = points_.row(idx);
  }
  return PointCloud(std::move(out), label_, name_);
}

PointCloud PointCloud::permuted(const IndexList& perm) const {
  if (static_cast<int>(perm.size()) != size()) {
    throw ArgumentError("permutation length does not match cloud size");
  }
  std::vector<char> seen(perm.size(), 0);
  for (int idx : perm) {
    if (idx < 0 || idx >= size() || seen[idx]) throw ArgumentError("not a permutation");
    seen[idx] = 1;
  }
  return subset(perm);
}

RigidTransform::RigidTransform(const Eigen::Quaterniond& q,
                               const Eigen::Vector3d& t)
    : rotation(q), translation(t) {
  const double norm = rotation.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ArgumentError("rotation quaternion must be nonzero and finite");
  }
  rotation.normalize();
}

Points RigidTransform::apply(const Points& points) const {
  const Eigen::Matrix3d rot = rotation.toRotationMatrix();
  Points out = points * rot.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Quaterniond inv = rotation.conjugate();
  return RigidTransform(inv, -(inv * translation));
}

Points normalize_unit_sphere(const Points& points) {
  Points out = points;
  const Eigen::RowVector3d centroid = out.colwise().mean();
  out.rowwise() -= centroid;
  const double radius = out.rowwise().norm().maxCoeff();
  if (radius > 0.0) out /= radius;
  return out;
}

void check_finite(const Points& points, const char* what) {
  if (!points.allFinite()) {
    throw ArgumentError(std::string(what) + " contains non-finite coordinates");
  }
}

}  // namespace tsample
