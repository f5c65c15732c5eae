// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tsample {

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double task_loss = 0.0;
  double subset_loss = 0.0;
  double tau = 1.0;
  double lr = 0.0;
  double sparsity = 0.0;  // nonzero fraction of S at the sparsify threshold

  bool operator==(const EpochLog&) const = default;
};

/// One metric row: set is "G", "M", "C" for the learned sampler or a
/// classical sampler name ("random", "fps", "voxel").
struct MetricCell {
  int m = 0;
  std::string set;
  double noise = 0.0;
  std::map<std::string, double> values;

  bool operator==(const MetricCell&) const = default;
};

struct RunReport {
  std::string task;
  std::vector<EpochLog> epochs;
  std::vector<MetricCell> cells;
  double sparsity_threshold = 0.01;
  double sparsity_fraction = 0.0;
  double orthogonality_error = 0.0;  // mean |S^T S - I|_F
  std::map<std::string, double> reference;  // head metrics on full clouds
  std::map<std::string, double> timings;    // seconds
  std::map<std::string, double> extras;

  /// First cell with the given m, set and noise level; throws ArgumentError.
  const MetricCell& cell(int m, const std::string& set, double noise = 0.0) const;
  bool operator==(const RunReport&) const = default;
};

/// Sectioned key-value text; doubles use the shortest round-trip form.
std::string to_ini(const RunReport& report);
RunReport report_from_ini(const std::string& text);

/// Long-format tables: "epoch,loss,task_loss,subset_loss,tau,lr,sparsity" and
/// "m,set,noise,metric,value".
std::string epochs_csv(const RunReport& report);
std::string cells_csv(const RunReport& report);

/// Writes <stem>.ini, <stem>_epochs.csv and <stem>_cells.csv under `dir`.
void save_report(const std::filesystem::path& dir, const std::string& stem,
                 const RunReport& report);
RunReport load_report(const std::filesystem::path& path);

}  // namespace tsample
