// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "tsample/nn/layers.hpp"
#include "tsample/pointcloud.hpp"

namespace tsample {

enum class HeadKind { kClassification, kReconstructionMlp, kReconstructionMfold, kRegistration };

const char* to_string(HeadKind kind);
HeadKind parse_head_kind(const std::string& text);

/// Downstream network a sampler is trained against. A frozen head runs in
/// inference mode and is never handed to an optimizer.
class TaskHead {
 public:
  virtual ~TaskHead() = default;
  virtual HeadKind kind() const = 0;
  virtual void collect(nn::ParameterSet& set, const std::string& prefix) = 0;

  nn::ParameterSet parameters(const std::string& prefix = "head");
  nn::Index parameter_count() { return parameters().count(); }

  bool frozen = true;
};

/// PointNet-vanilla classifier: shared point MLP, max-pool, FC stack.
class ClassifierHead : public TaskHead {
 public:
  ClassifierHead(int num_classes, std::vector<int> point_widths, std::vector<int> fc_widths,
                 std::mt19937_64& rng);

  HeadKind kind() const override { return HeadKind::kClassification; }
  void collect(nn::ParameterSet& set, const std::string& prefix) override;

  /// (B*k x 3) -> (B x C) logits.
  nn::Var logits(const nn::Var& points, nn::Index k, bool training);
  int num_classes() const { return num_classes_; }

 private:
  int num_classes_;
  nn::Mlp points_;
  nn::Mlp fc_;
};

/// Fixed-size decoder from a max-pooled global code.
class MlpReconstructionHead : public TaskHead {
 public:
  MlpReconstructionHead(int output_points, std::vector<int> encoder_widths,
                        std::vector<int> decoder_hidden, std::mt19937_64& rng);

  HeadKind kind() const override { return HeadKind::kReconstructionMlp; }
  void collect(nn::ParameterSet& set, const std::string& prefix) override;

  /// (B*k x 3) -> (B*output_points x 3).
  nn::Var reconstruct(const nn::Var& points, nn::Index k, bool training);
  int output_points() const { return output_points_; }

 private:
  int output_points_;
  nn::Mlp encoder_;
  nn::Mlp decoder_;
};

struct MFoldConfig {
  int patches = 4;      // M
  int code_dim = 128;   // d; the local code of each patch has d / M entries
  int grid_rows = 16;   // g1
  int grid_cols = 16;   // g2

  int local_dim() const { return code_dim / patches; }
  int output_points() const { return patches * grid_rows * grid_cols; }
  void validate() const;
  bool operator==(const MFoldConfig&) const = default;
};

/// Splits the global code into M local codes; each one is folded from a
/// shared 2D lattice on [0,1]^2 by one shared two-stage folding operator.
class MFoldHead : public TaskHead {
 public:
  MFoldHead(const MFoldConfig& config, std::vector<int> encoder_hidden, std::mt19937_64& rng);

  HeadKind kind() const override { return HeadKind::kReconstructionMfold; }
  void collect(nn::ParameterSet& set, const std::string& prefix) override;

  /// (B*k x 3) -> (B*M*g1*g2 x 3).
  nn::Var reconstruct(const nn::Var& points, nn::Index k, bool training);
  const MFoldConfig& config() const { return config_; }
  /// Parameters of the folding operator alone.
  nn::Index folding_parameter_count();

 private:
  MFoldConfig config_;
  nn::Mlp encoder_;
  nn::Mlp fold1_;
  nn::Mlp fold2_;
  nn::Mat grid_;  // (g1*g2) x 2
};

/// One-pass pose regressor: shared encoder on both clouds, concatenated
/// pooled codes, FC stack to (qw, qx, qy, qz, tx, ty, tz), unit quaternion.
class RegistrationHead : public TaskHead {
 public:
  RegistrationHead(std::vector<int> encoder_widths, std::vector<int> fc_hidden,
                   std::mt19937_64& rng);

  HeadKind kind() const override { return HeadKind::kRegistration; }
  void collect(nn::ParameterSet& set, const std::string& prefix) override;

  /// Stacked sources (B*ks x 3) and targets (B*kt x 3) -> (B x 7).
  nn::Var pose(const nn::Var& source, nn::Index ks, const nn::Var& target, nn::Index kt,
               bool training);

 private:
  nn::Mlp encoder_;
  nn::Mlp fc_;
};

std::vector<double> classify(const Points& points, ClassifierHead& head);
Points reconstruct_mlp(const Points& points, MlpReconstructionHead& head);
Points reconstruct_mfold(const Points& points, const MFoldConfig& cfg, MFoldHead& head);
/// Transform that maps `source` onto `target`.
RigidTransform register_clouds(const Points& source, const Points& target,
                               RegistrationHead& head);
RigidTransform pose_from_row(const nn::Mat& row);

}  // namespace tsample
