// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "test_util.hpp"
#include "tsample/samplers.hpp"

using namespace tsample;

namespace {

double sq(const Points& p, int a, int b) {
  const double dx = p(a, 0) - p(b, 0);
  const double dy = p(a, 1) - p(b, 1);
  const double dz = p(a, 2) - p(b, 2);
  return dx * dx + dy * dy + dz * dz;
}

// Recomputes every min-distance from scratch at each greedy step.
IndexList greedy_oracle(const Points& p, IndexList selected, int m) {
  const int n = static_cast<int>(p.rows());
  while (static_cast<int>(selected.size()) < m) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (std::find(selected.begin(), selected.end(), i) != selected.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (int s : selected) d = std::min(d, sq(p, i, s));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    selected.push_back(best);
  }
  return selected;
}

bool distinct(const IndexList& idx) {
  return std::set<int>(idx.begin(), idx.end()).size() == idx.size();
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("farthest point sampling matches the exhaustive greedy oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 63;
    const int m = 1 + static_cast<int>(rng() % n);
    const PointCloud cloud(testing::random_points(n, rng));
    const int start = static_cast<int>(rng() % n);
    CHECK(fps_sample(cloud, m, start) == greedy_oracle(cloud.points(), {start}, m));
  }
}

TEST_CASE("farthest point sampling breaks ties by lowest index") {
  Points p(4, 3);
  p << 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0;
  CHECK(fps_sample(PointCloud(p), 2, 0) == IndexList{0, 1});
}

TEST_CASE("farthest point sampling handles duplicate points") {
  Points p = Points::Zero(5, 3);
  p(4, 0) = 1.0;
  const IndexList idx = fps_sample(PointCloud(p), 5, 0);
  CHECK(idx.size() == 5);
  CHECK(distinct(idx));
  CHECK(idx[1] == 4);
}

TEST_CASE("completion extends the partial set with the greedy oracle") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + trial % 40;
    const PointCloud cloud(testing::random_points(n, rng));
    IndexList partial = testing::random_permutation(n, rng);
    partial.resize(1 + trial % 3);
    const int m = static_cast<int>(partial.size()) + 1 + static_cast<int>(rng() % (n - partial.size()));
    const IndexList out = fps_completion(cloud, partial, m);
    CHECK(out == greedy_oracle(cloud.points(), partial, m));
    CHECK(std::equal(partial.begin(), partial.end(), out.begin()));
  }
  const PointCloud cloud(testing::random_points(6, rng));
  CHECK(fps_completion(cloud, {}, 3) == fps_sample(cloud, 3, 0));
  CHECK(fps_completion(cloud, {2, 4}, 2) == IndexList{2, 4});
  CHECK_THROWS_AS(fps_completion(cloud, {1, 1}, 3), ArgumentError);
  CHECK_THROWS_AS(fps_completion(cloud, {1, 2, 3}, 2), ArgumentError);
  CHECK_THROWS_AS(fps_completion(cloud, {9}, 2), ArgumentError);
}

TEST_CASE("random sampling returns m distinct indices, reproducibly") {
  std::mt19937_64 rng(13);
  const PointCloud cloud(testing::random_points(50, rng));
  for (int m : {1, 7, 50}) {
    const IndexList a = random_sample(cloud, m, 99);
    CHECK(a.size() == static_cast<size_t>(m));
    CHECK(distinct(a));
    CHECK(a == random_sample(cloud, m, 99));
  }
  CHECK(random_sample(cloud, 10, 1) != random_sample(cloud, 10, 2));
  CHECK_THROWS_AS(random_sample(cloud, 0, 1), ArgumentError);
  CHECK_THROWS_AS(random_sample(cloud, 51, 1), ArgumentError);
}

TEST_CASE("random sampling is roughly uniform") {
  const PointCloud cloud(Points::Zero(10, 3));
  std::vector<int> hits(10, 0);
  for (uint64_t s = 0; s < 4000; ++s) {
    for (int i : random_sample(cloud, 3, s)) ++hits[i];
  }
  for (int h : hits) CHECK(std::abs(h - 1200) < 150);
}

TEST_CASE("voxel sampling returns exactly m distinct indices") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 20 + trial * 7;
    const PointCloud cloud(testing::random_points(n, rng));
    for (int m : {1, 5, n / 2, n}) {
      const IndexList idx = voxel_sample(cloud, m, 3);
      CHECK(idx.size() == static_cast<size_t>(m));
      CHECK(distinct(idx));
    }
  }
}

TEST_CASE("voxel sampling with a fixed grid keeps one point per occupied cell") {
  Points p(6, 3);
  p << 0, 0, 0, 0.1, 0.1, 0.1, 0.9, 0.9, 0.9, 1, 1, 1, 0, 1, 0, 0.05, 0.95, 0.0;
  const PointCloud cloud(p);
  CHECK(occupied_voxels(cloud, 2) == 3);
  const IndexList idx = voxel_sample(cloud, 3, 0, 2);
  CHECK(std::set<int>(idx.begin(), idx.end()).size() == 3);
  CHECK_THROWS_AS(occupied_voxels(cloud, 0), ArgumentError);
}

TEST_CASE("matching deduplicates in order of first occurrence") {
  Points src(3, 3);
  src << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  Points gen(4, 3);
  gen << 0.9, 0, 0, 0.1, 0, 0, 1.1, 0, 0, 0, 0.8, 0;
  CHECK(match_to_subset(PointCloud(src), gen) == IndexList{1, 0, 2});
  CHECK_THROWS_AS(match_to_subset(PointCloud(src), Points(0, 3)), ArgumentError);
}

TEST_CASE("sampler names round-trip") {
  for (SamplerKind k : {SamplerKind::kRandom, SamplerKind::kVoxel, SamplerKind::kFps}) {
    CHECK(parse_sampler_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_sampler_kind("bogus"), ArgumentError);
}

}
