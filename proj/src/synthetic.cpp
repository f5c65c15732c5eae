// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace tsample {
namespace {

constexpr double kTorusMajor = 0.7;
constexpr double kTorusMinor = 0.3;

Eigen::Vector3d sphere_point(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Eigen::Vector3d cube_point(std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(3.0);
  std::uniform_int_distribution<int> face(0, 5);
  std::uniform_real_distribution<double> coord(-a, a);
  const int f = face(rng);
  Eigen::Vector3d v(coord(rng), coord(rng), coord(rng));
  v[f / 2] = (f % 2 == 0) ? a : -a;
  return v;
}

Eigen::Vector3d torus_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Rejection on the tube angle makes the density uniform in area.
  double v = 0.0;
  while (true) {
    v = angle(rng);
    const double accept = (kTorusMajor + kTorusMinor * std::cos(v)) /
                          (kTorusMajor + kTorusMinor);
    if (unit(rng) <= accept) break;
  }
  const double u = angle(rng);
  const double ring = kTorusMajor + kTorusMinor * std::cos(v);
  return {ring * std::cos(u), ring * std::sin(u), kTorusMinor * std::sin(v)};
}

Eigen::Vector3d plane_point(std::mt19937_64& rng) {
  const double a = 1.0 / std::sqrt(2.0);
  std::uniform_real_distribution<double> coord(-a, a);
  const double x = coord(rng);
  const double y = coord(rng);
  return {x, y, 0.0};
}

}  // namespace

const char* to_string(Shape shape) {
  switch (shape) {
    case Shape::kSphere: return "sphere";
    case Shape::kCube: return "cube";
    case Shape::kTorus: return "torus";
    case Shape::kPlane: return "plane";
  }
  return "unknown";
}

Shape parse_shape(const std::string& text) {
  for (int s = 0; s < kNumShapes; ++s) {
    if (text == to_string(static_cast<Shape>(s))) return static_cast<Shape>(s);
  }
  throw ArgumentError("unknown shape '" + text + "'");
}

std::vector<std::string> shape_class_names() {
  std::vector<std::string> names;
  for (int s = 0; s < kNumShapes; ++s) names.emplace_back(to_string(static_cast<Shape>(s)));
  return names;
}

PointCloud make_synthetic(Shape shape, int n, uint64_t seed) {
  if (n < 8) throw ArgumentError("make_synthetic requires n >= 8");
  std::mt19937_64 rng(seed);
  Points points(n, 3);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d p;
    switch (shape) {
      case Shape::kSphere: p = sphere_point(rng); break;
      case Shape::kCube: p = cube_point(rng); break;
      case Shape::kTorus: p = torus_point(rng); break;
      case Shape::kPlane: p = plane_point(rng); break;
    }
    points.row(i) = p.transpose();
  }
  return PointCloud(std::move(points), static_cast<int>(shape), to_string(shape));
}

std::vector<PointCloud> make_toy_dataset(const ToyDatasetSpec& spec) {
  if (spec.shapes.empty() || spec.per_class < 1) {
    throw ArgumentError("toy dataset needs at least one shape and one instance");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> stretch(1.0 - spec.variation,
                                                 1.0 + spec.variation);
  std::vector<PointCloud> clouds;
  for (int i = 0; i < spec.per_class; ++i) {
    for (size_t c = 0; c < spec.shapes.size(); ++c) {
      const uint64_t instance_seed = rng();
      PointCloud base = make_synthetic(spec.shapes[c], spec.n, instance_seed);
      const Eigen::Vector3d scale(stretch(rng), stretch(rng), stretch(rng));
      Points pts = base.points() * scale.asDiagonal();
      clouds.emplace_back(normalize_unit_sphere(pts), static_cast<int>(c),
                          std::string(to_string(spec.shapes[c])) + "_" +
                              std::to_string(i));
    }
  }
  return clouds;
}

RigidTransform random_rigid_transform(std::mt19937_64& rng, double max_angle_deg,
                                      double max_translation) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::Vector3d axis = sphere_point(rng);
  const double angle = unit(rng) * max_angle_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d dir = sphere_point(rng);
  const double radius = max_translation * std::cbrt(unit(rng));
  return RigidTransform(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)),
                        radius * dir);
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double level,
                              uint64_t seed) {
  if (!(level >= 0.0)) throw ArgumentError("noise level must be >= 0");
  if (level == 0.0) return cloud;
  const Points& p = cloud.points();
  const Eigen::RowVector3d mean = p.colwise().mean();
  const Eigen::RowVector3d stddev =
      ((p.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(p.rows()))
          .sqrt();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Points noisy = p;
  for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
    for (int c = 0; c < 3; ++c) noisy(i, c) += level * stddev[c] * normal(rng);
  }
  return PointCloud(std::move(noisy), cloud.label(), cloud.name());
}

}  // namespace tsample
