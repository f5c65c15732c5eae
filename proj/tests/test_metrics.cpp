// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_util.hpp"
#include "tsample/metrics.hpp"

using namespace tsample;

namespace {

double brute_chamfer(const Points& a, const Points& b) {
  const auto one_way = [](const Points& x, const Points& y) {
    double total = 0.0;
    for (int i = 0; i < x.rows(); ++i) {
      double best = 1e300;
      for (int j = 0; j < y.rows(); ++j) best = std::min(best, (x.row(i) - y.row(j)).squaredNorm());
      total += best;
    }
    return total / static_cast<double>(x.rows());
  };
  return one_way(a, b) + one_way(b, a);
}

double brute_emd(const Points& a, const Points& b) {
  std::vector<int> perm(a.rows());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) s += (a.row(i) - b.row(perm[i])).norm();
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.rows());
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("nearest neighbors match exhaustive search, lowest index on ties") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Points q = testing::random_points(1 + trial % 13, rng);
    const Points r = testing::random_points(1 + trial % 17, rng);
    const NearestNeighbors nn = nearest_neighbors(q, r);
    for (int i = 0; i < q.rows(); ++i) {
      int best = 0;
      for (int j = 1; j < r.rows(); ++j) {
        if ((q.row(i) - r.row(j)).squaredNorm() < (q.row(i) - r.row(best)).squaredNorm()) best = j;
      }
      CHECK(nn.index[i] == best);
      CHECK(nn.sq_dist(i) == (q.row(i) - r.row(best)).squaredNorm());
    }
  }
  Points dup(2, 3);
  dup << 1, 0, 0, 1, 0, 0;
  CHECK(nearest_neighbors(Points::Zero(1, 3), dup).index[0] == 0);
  CHECK(nearest_neighbors(Points(0, 3), dup).index.empty());
  CHECK_THROWS_AS(nearest_neighbors(dup, Points(0, 3)), ArgumentError);
}

TEST_CASE("chamfer distance equals the brute-force value") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Points a = testing::random_points(1 + trial % 64, rng);
    const Points b = testing::random_points(1 + (trial * 7) % 64, rng);
    CHECK(chamfer_distance(a, b) == brute_chamfer(a, b));
  }
}

TEST_CASE("chamfer distance is symmetric, zero on identical sets, permutation invariant") {
  std::mt19937_64 rng(3);
  const Points a = testing::random_points(20, rng);
  const Points b = testing::random_points(15, rng);
  CHECK(chamfer_distance(a, b) == doctest::Approx(chamfer_distance(b, a)).epsilon(1e-14));
  CHECK(chamfer_distance(a, a) == 0.0);
  const PointCloud pa(a);
  const PointCloud shuffled = pa.permuted(testing::random_permutation(20, rng));
  CHECK(chamfer_distance(shuffled, PointCloud(b)) ==
        doctest::Approx(chamfer_distance(pa, PointCloud(b))).epsilon(1e-14));
}

TEST_CASE("earth mover distance matches exhaustive assignment") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 8;
    const Points a = testing::random_points(n, rng);
    const Points b = testing::random_points(n, rng);
    CHECK(earth_mover_distance(a, b) == doctest::Approx(brute_emd(a, b)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(earth_mover_distance(Points::Zero(2, 3), Points::Zero(3, 3)), ArgumentError);
}

TEST_CASE("earth mover transport is a bijection for exact sizes") {
  std::mt19937_64 rng(5);
  const Points a = testing::random_points(30, rng);
  const Points b = testing::random_points(30, rng);
  const TransportSolution sol = earth_mover_solution(a, b);
  REQUIRE(sol.flow.size() == 30);
  std::vector<int> seen(30, 0);
  double total = 0.0;
  for (const auto& f : sol.flow) {
    ++seen[f.target];
    total += f.weight;
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("entropic earth mover distance stays close to the exact value") {
  std::mt19937_64 rng(6);
  const Points a = testing::random_points(kExactEmdLimit + 44, rng);
  const Points b = testing::random_points(kExactEmdLimit + 44, rng);
  const double approx = earth_mover_distance(a, b);
  // Exact value on the same pair through a direct assignment solve.
  CostMatrix c(a.rows(), a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.rows(); ++j) c(i, j) = (a.row(i) - b.row(j)).norm();
  }
  const std::vector<int> col = solve_assignment(c);
  double exact = 0.0;
  for (int i = 0; i < a.rows(); ++i) exact += c(i, col[i]);
  exact /= static_cast<double>(a.rows());
  CHECK(approx >= exact * (1.0 - 1e-6));
  CHECK(approx <= exact * 1.02);
}

TEST_CASE("normalized reconstruction error") {
  std::mt19937_64 rng(7);
  const PointCloud p(testing::random_points(12, rng));
  const PointCloud rq(testing::random_points(12, rng));
  const PointCloud rp(testing::random_points(12, rng));
  CHECK(nre(p, rp, rp, ReconMetric::kChamfer) == 1.0);
  CHECK(nre(p, rp, rp, ReconMetric::kEarthMover) == 1.0);
  CHECK(nre(p, rq, rp, ReconMetric::kChamfer) ==
        chamfer_distance(p, rq) / chamfer_distance(p, rp));
  CHECK_THROWS_AS(nre(p, rq, p, ReconMetric::kChamfer), DegenerateInputError);
}

TEST_CASE("rotation error: zero on equality, sign-flip invariant, known angles") {
  const Eigen::Quaterniond q(Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, -1, 2).normalized()));
  CHECK(rotation_angle_deg(q, q) == 0.0);
  const Eigen::Quaterniond neg(-q.w(), -q.x(), -q.y(), -q.z());
  CHECK(rotation_angle_deg(q, neg) == 0.0);
  const Eigen::Quaterniond r = q * Eigen::Quaterniond(Eigen::AngleAxisd(0.5, Eigen::Vector3d::UnitZ()));
  CHECK(rotation_angle_deg(q, r) == doctest::Approx(0.5 * 180.0 / std::numbers::pi));
  const RigidTransform a(q, Eigen::Vector3d::Zero());
  const RigidTransform b(neg, Eigen::Vector3d::Zero());
  CHECK(mean_rotation_error({a, a}, {a, b}) == 0.0);
  CHECK_THROWS_AS(mean_rotation_error({a}, {}), ArgumentError);
  CHECK_THROWS_AS(mean_rotation_error({}, {}), ArgumentError);
}

}
