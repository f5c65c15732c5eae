// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tsample/pointcloud.hpp"

namespace tsample {

enum class Shape { kSphere = 0, kCube = 1, kTorus = 2, kPlane = 3 };

inline constexpr int kNumShapes = 4;

const char* to_string(Shape shape);
Shape parse_shape(const std::string& text);
std::vector<std::string> shape_class_names();

/// Uniform-area samples on an ideal surface whose bounding sphere is the unit
/// sphere at the origin: sphere r = 1, cube half-edge 1/sqrt(3), torus
/// R = 0.7 / r = 0.3 in the xy-plane, square half-edge 1/sqrt(2) at z = 0.
/// Requires n >= 8. Bitwise deterministic for fixed arguments.
PointCloud make_synthetic(Shape shape, int n, uint64_t seed);

struct ToyDatasetSpec {
  std::vector<Shape> shapes = {Shape::kSphere, Shape::kCube, Shape::kTorus,
                               Shape::kPlane};
  int per_class = 16;
  int n = 256;
  // Per-instance anisotropic scale factors are drawn from [1-v, 1+v].
  double variation = 0.3;
  uint64_t seed = 0;
};

/// Labelled clouds; label = position of the shape in `spec.shapes`. Each
/// instance is stretched along the axes and renormalized to the unit sphere.
/// Clouds are interleaved by class (c0, c1, ..., c0, c1, ...).
std::vector<PointCloud> make_toy_dataset(const ToyDatasetSpec& spec);

/// Rotation axis uniform on the sphere, angle uniform in [0, max_angle_deg],
/// translation uniform in the ball of radius `max_translation`.
RigidTransform random_rigid_transform(std::mt19937_64& rng, double max_angle_deg,
                                      double max_translation);

/// Adds zero-mean Gaussian noise with per-dimension standard deviation equal
/// to `level` times the clean cloud's standard deviation along that axis.
PointCloud add_gaussian_noise(const PointCloud& cloud, double level,
                              uint64_t seed);

}  // namespace tsample
