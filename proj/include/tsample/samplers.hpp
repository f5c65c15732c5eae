// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tsample/pointcloud.hpp"

namespace tsample {

enum class SamplerKind { kRandom, kVoxel, kFps };

const char* to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& text);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kRandom;
  int m = 32;
  uint64_t seed = 0;
  // Fixed voxel grid resolution; searched for when absent.
  std::optional<int> voxel_resolution;
};

/// m distinct indices drawn uniformly without replacement.
IndexList random_sample(const PointCloud& cloud, int m, uint64_t seed);

/// Greedy max-min farthest point sampling from `start`. Euclidean distance,
/// ties broken by lowest index.
IndexList fps_sample(const PointCloud& cloud, int m, int start = 0);

/// One representative per occupied voxel (nearest to the voxel's point
/// centroid). The resolution is binary-searched so the occupied count best
/// approximates m; surplus voxels are dropped at random, a shortfall is
/// filled by fps_completion.
IndexList voxel_sample(const PointCloud& cloud, int m, uint64_t seed,
                       std::optional<int> resolution = std::nullopt);

/// Number of occupied voxels at a given grid resolution (cubic cells, edge =
/// longest bounding-box side / resolution).
int occupied_voxels(const PointCloud& cloud, int resolution);

/// Nearest source index for each generated point, deduplicated in order of
/// first occurrence.
IndexList match_to_subset(const PointCloud& source, const Points& generated);

/// Extends `partial` with farthest points until it holds m unique indices.
IndexList fps_completion(const PointCloud& source, const IndexList& partial, int m);

IndexList apply_sampler(const PointCloud& cloud, const SamplerSpec& spec);

}  // namespace tsample
