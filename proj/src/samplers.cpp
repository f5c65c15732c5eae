// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "tsample/metrics.hpp"

namespace tsample {
namespace {

void check_count(const PointCloud& cloud, int m, const char* who) {
  if (m < 1 || m > cloud.size()) {
    throw ArgumentError(std::string(who) + ": m must lie in [1, n], got m=" +
                        std::to_string(m) + " n=" + std::to_string(cloud.size()));
  }
}

inline double sq_dist(const Points& p, Eigen::Index a, Eigen::Index b) {
  const double dx = p(a, 0) - p(b, 0);
  const double dy = p(a, 1) - p(b, 1);
  const double dz = p(a, 2) - p(b, 2);
  return dx * dx + dy * dy + dz * dz;
}

// Greedy max-min extension of `selected` up to m entries. Selected points get
// a sentinel distance of -1 so duplicates of chosen points stay eligible.
void extend_farthest(const Points& p, IndexList& selected, int m) {
  const Eigen::Index n = p.rows();
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  for (int s : selected) min_dist[s] = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (min_dist[i] < 0.0) continue;
    for (int s : selected) min_dist[i] = std::min(min_dist[i], sq_dist(p, i, s));
  }
  while (static_cast<int>(selected.size()) < m) {
    Eigen::Index best = -1;
    double best_dist = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    }
    selected.push_back(static_cast<int>(best));
    min_dist[best] = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (min_dist[i] < 0.0) continue;
      const double d = sq_dist(p, i, best);
      if (d < min_dist[i]) min_dist[i] = d;
    }
  }
}

struct VoxelGrid {
  Eigen::RowVector3d origin;
  double cell = 1.0;
  int resolution = 1;

  VoxelGrid(const Points& p, int res) : resolution(res) {
    origin = p.colwise().minCoeff();
    const double extent = (p.colwise().maxCoeff() - origin).maxCoeff();
    cell = extent > 0.0 ? extent / res : 1.0;
  }

  int64_t key(const Points& p, Eigen::Index i) const {
    int64_t k = 0;
    for (int c = 0; c < 3; ++c) {
      auto idx = static_cast<int64_t>(std::floor((p(i, c) - origin[c]) / cell));
      idx = std::clamp<int64_t>(idx, 0, resolution - 1);
      k = k * resolution + idx;
    }
    return k;
  }
};

std::map<int64_t, std::vector<int>> bucket(const Points& p, int resolution) {
  const VoxelGrid grid(p, resolution);
  std::map<int64_t, std::vector<int>> voxels;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    voxels[grid.key(p, i)].push_back(static_cast<int>(i));
  }
  return voxels;
}

}  // namespace

const char* to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kRandom: return "random";
    case SamplerKind::kVoxel: return "voxel";
    case SamplerKind::kFps: return "fps";
  }
  return "unknown";
}

SamplerKind parse_sampler_kind(const std::string& text) {
  if (text == "random" || text == "rs") return SamplerKind::kRandom;
  if (text == "voxel") return SamplerKind::kVoxel;
  if (text == "fps") return SamplerKind::kFps;
  throw ArgumentError("unknown sampler '" + text + "'");
}

IndexList random_sample(const PointCloud& cloud, int m, uint64_t seed) {
  check_count(cloud, m, "random_sample");
  IndexList idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m slots end up uniform without replacement.
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, cloud.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(m);
  return idx;
}

IndexList fps_sample(const PointCloud& cloud, int m, int start) {
  check_count(cloud, m, "fps_sample");
  if (start < 0 || start >= cloud.size()) throw ArgumentError("fps_sample: start out of range");
  IndexList selected{start};
  selected.reserve(m);
  extend_farthest(cloud.points(), selected, m);
  return selected;
}

IndexList fps_completion(const PointCloud& source, const IndexList& partial, int m) {
  check_count(source, m, "fps_completion");
  if (static_cast<int>(partial.size()) > m) {
    throw ArgumentError("fps_completion: partial set larger than m");
  }
  std::vector<char> seen(source.size(), 0);
  for (int idx : partial) {
    if (idx < 0 || idx >= source.size()) throw ArgumentError("fps_completion: index out of range");
    if (seen[idx]) throw ArgumentError("fps_completion: duplicate index in partial set");
    seen[idx] = 1;
  }
  if (static_cast<int>(partial.size()) == m) return partial;
  IndexList selected = partial;
  if (selected.empty()) selected.push_back(0);
  extend_farthest(source.points(), selected, m);
  return selected;
}

int occupied_voxels(const PointCloud& cloud, int resolution) {
  if (resolution < 1) throw ArgumentError("voxel resolution must be >= 1");
  return static_cast<int>(bucket(cloud.points(), resolution).size());
}

IndexList voxel_sample(const PointCloud& cloud, int m, uint64_t seed,
                       std::optional<int> resolution) {
  check_count(cloud, m, "voxel_sample");
  int res = 1;
  if (resolution) {
    res = *resolution;
    if (res < 1) throw ArgumentError("voxel resolution must be >= 1");
  } else {
    // Smallest resolution reaching m occupied voxels, bracketed by doubling.
    constexpr int kMaxResolution = 1 << 16;
    int lo = 1, hi = 1;
    while (hi < kMaxResolution && occupied_voxels(cloud, hi) < m) {
      lo = hi;
      hi *= 2;
    }
    if (occupied_voxels(cloud, hi) < m) {
      res = hi;
    } else {
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (occupied_voxels(cloud, mid) >= m) hi = mid;
        else lo = mid + 1;
      }
      res = hi;
      if (res > 1) {
        const int above = occupied_voxels(cloud, res) - m;
        const int below = m - occupied_voxels(cloud, res - 1);
        if (below < above) res -= 1;
      }
    }
  }

  const Points& p = cloud.points();
  IndexList reps;
  for (const auto& [key, members] : bucket(p, res)) {
    Eigen::RowVector3d centroid = Eigen::RowVector3d::Zero();
    for (int i : members) centroid += p.row(i);
    centroid /= static_cast<double>(members.size());
    int best = members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (int i : members) {
      const double d = (p.row(i) - centroid).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    reps.push_back(best);
  }
  if (static_cast<int>(reps.size()) > m) {
    std::mt19937_64 rng(seed);
    std::shuffle(reps.begin(), reps.end(), rng);
    reps.resize(m);
    return reps;
  }
  return fps_completion(cloud, reps, m);
}

IndexList match_to_subset(const PointCloud& source, const Points& generated) {
  if (generated.rows() == 0) throw ArgumentError("match_to_subset: empty generated set");
  const NearestNeighbors nn = nearest_neighbors(generated, source.points());
  std::vector<char> seen(source.size(), 0);
  IndexList out;
  for (int idx : nn.index) {
    if (!seen[idx]) {
      seen[idx] = 1;
      out.push_back(idx);
    }
  }
  return out;
}

IndexList apply_sampler(const PointCloud& cloud, const SamplerSpec& spec) {
  switch (spec.kind) {
    case SamplerKind::kRandom: return random_sample(cloud, spec.m, spec.seed);
    case SamplerKind::kVoxel: return voxel_sample(cloud, spec.m, spec.seed, spec.voxel_resolution);
    case SamplerKind::kFps: return fps_sample(cloud, spec.m, 0);
  }
  throw ArgumentError("unknown sampler kind");
}

}  // namespace tsample
