// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsample/heads.hpp"
#include "tsample/synthetic.hpp"

namespace tsample {

enum class Task { kClassification, kReconstruction, kRegistration };

const char* to_string(Task task);
Task parse_task(const std::string& text);

/// Experiment description. Serialized as INI with sections
/// [run] [data] [sampler] [loss] [optim] [head] [eval].
struct RunConfig {
  // [run]
  Task task = Task::kClassification;
  uint64_t seed = 0;
  std::string dataset = "synthetic";  // "synthetic" or a dataset root directory
  std::string head_checkpoint;

  // [data] (synthetic toy sets)
  std::vector<Shape> shapes = {Shape::kSphere, Shape::kCube, Shape::kTorus, Shape::kPlane};
  int n = 256;
  int train_per_class = 16;
  int test_per_class = 8;
  double variation = 0.3;
  uint64_t data_seed = 7;
  int classes = 0;  // 0: one class per synthetic shape

  // [sampler]
  int m = 16;
  int m_max = 64;
  bool flexible = false;
  std::vector<int> m_set = {8, 16, 32, 64};
  std::vector<int> encoder_widths = {64, 64, 64, 128, 128};
  std::vector<int> sampler_hidden = {512, 256, 128};
  double tau_min = 0.1;
  double anneal_fraction = 0.8;
  double sparsify_threshold = 0.01;

  // [loss]
  double alpha = 30.0;
  double lambda_emd = 0.1;
  double translation_weight = 1.0;

  // [optim]
  double lr_start = 5e-4;
  double lr_end = 1e-5;
  int epochs = 250;
  int batch_size = 8;
  bool joint_training = false;
  // Head pretraining schedule.
  double pretrain_lr_start = 1e-3;
  double pretrain_lr_end = 1e-4;
  int pretrain_epochs = 60;

  // [head]
  HeadKind head = HeadKind::kClassification;
  std::vector<int> head_point_widths = {64, 64, 64, 128, 1024};
  std::vector<int> head_fc_widths = {512, 256};
  MFoldConfig mfold;

  // [eval]
  std::vector<int> eval_m = {16};
  double noise_level = 0.0;
  std::vector<double> noise_levels = {0.0, 0.01, 0.02, 0.05, 0.1};
  std::vector<uint64_t> noise_seeds = {1};
  double max_angle_deg = 45.0;
  double max_translation = 0.3;
  int pairs_per_cloud = 4;

  /// Output width of the sampler network.
  int sampler_width() const { return flexible ? m_max : m; }
  int num_classes() const { return classes > 0 ? classes : static_cast<int>(shapes.size()); }

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Paper-scale defaults per task (learning rates, tau_min, alpha, head shape).
RunConfig default_config(Task task);

/// Smaller desk-scale variant used by tests and the synthetic examples.
RunConfig toy_config(Task task);

std::string to_ini(const RunConfig& config);
/// Fields absent from the text keep the values of `base`. Unknown keys are
/// configuration errors.
RunConfig config_from_ini(const std::string& text, const RunConfig& base);
RunConfig config_from_ini(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& config);

/// Exponential decay lr(e) = start * (end / start)^(e / epochs).
double learning_rate(double lr_start, double lr_end, int epoch, int epochs);

std::string format_double(double v);
double parse_double_strict(const std::string& text, const std::string& what);

}  // namespace tsample
