// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "test_util.hpp"
#include "tsample/heads.hpp"

using namespace tsample;

namespace {

nn::Index mfold_params(const MFoldConfig& cfg) {
  std::mt19937_64 rng(1);
  MFoldHead head(cfg, {64, 128}, rng);
  return head.parameter_count();
}

}  // namespace

TEST_SUITE("heads") {

TEST_CASE("classifier logits have one row per cloud and are order invariant") {
  std::mt19937_64 rng(41);
  ClassifierHead head(4, {16, 32}, {16}, rng);
  CHECK(head.num_classes() == 4);
  const Points p = testing::random_points(20, rng);
  const std::vector<double> a = classify(p, head);
  CHECK(a.size() == 4);
  const Points q = PointCloud(p).permuted(testing::random_permutation(20, rng)).points();
  const std::vector<double> b = classify(q, head);
  for (int c = 0; c < 4; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
  CHECK_THROWS_AS(classify(Points(0, 3), head), ArgumentError);
}

TEST_CASE("MLP reconstruction emits a fixed number of points") {
  std::mt19937_64 rng(42);
  MlpReconstructionHead head(50, {16, 32}, {64}, rng);
  CHECK(reconstruct_mlp(testing::random_points(10, rng), head).rows() == 50);
  CHECK(reconstruct_mlp(testing::random_points(30, rng), head).rows() == 50);
}

TEST_CASE("M-fold output count is M * g1 * g2") {
  std::mt19937_64 rng(43);
  const MFoldConfig small{4, 128, 16, 16};
  CHECK(small.output_points() == 1024);
  MFoldHead head(small, {32}, rng);
  CHECK(reconstruct_mfold(testing::random_points(32, rng), small, head).rows() == 1024);
  const MFoldConfig wide{128, 2048, 2, 4};
  CHECK(wide.local_dim() == 16);
  CHECK(wide.output_points() == 1024);
  MFoldHead big(wide, {32}, rng);
  CHECK(reconstruct_mfold(testing::random_points(16, rng), wide, big).rows() == 1024);
  CHECK_THROWS_AS(reconstruct_mfold(testing::random_points(16, rng), small, big), ConfigError);
}

TEST_CASE("M-fold parameter count ignores the grid and shrinks with M") {
  CHECK(mfold_params({4, 128, 16, 16}) == mfold_params({4, 128, 4, 4}));
  CHECK(mfold_params({4, 128, 16, 16}) == mfold_params({4, 128, 45, 45}));
  nn::Index previous = mfold_params({1, 128, 8, 8});
  for (int m : {2, 4, 8, 16, 32, 64, 128}) {
    const nn::Index now = mfold_params({m, 128, 8, 8});
    CHECK(now < previous);
    previous = now;
  }
}

TEST_CASE("M-fold configuration validation") {
  CHECK_THROWS_AS((MFoldConfig{3, 128, 4, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((MFoldConfig{0, 128, 4, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((MFoldConfig{4, 128, 0, 4}.validate()), ConfigError);
  CHECK_NOTHROW(MFoldConfig{}.validate());
}

TEST_CASE("registration head emits a unit quaternion") {
  std::mt19937_64 rng(44);
  RegistrationHead head({16, 32}, {16}, rng);
  const Points src = testing::random_points(20, rng);
  const RigidTransform t = register_clouds(src, src, head);
  CHECK(t.rotation.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.rotation.w() > 0.5);  // initialized near identity
  CHECK_THROWS_AS(register_clouds(src, Points(0, 3), head), ArgumentError);
}

TEST_CASE("rigid transforms compose with their inverse") {
  const RigidTransform t(Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitY())),
                         Eigen::Vector3d(0.1, -0.2, 0.3));
  std::mt19937_64 rng(45);
  const Points p = testing::random_points(10, rng);
  CHECK((t.inverse().apply(t.apply(p)) - p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("head kind names round-trip") {
  for (HeadKind k : {HeadKind::kClassification, HeadKind::kReconstructionMlp,
                     HeadKind::kReconstructionMfold, HeadKind::kRegistration}) {
    CHECK(parse_head_kind(to_string(k)) == k);
  }
  CHECK_THROWS(parse_head_kind("nope"));
}

}
