// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsample/checkpoint.hpp"
#include "tsample/config.hpp"
#include "tsample/heads.hpp"
#include "tsample/report.hpp"
#include "tsample/sampling_matrix.hpp"
#include "tsample/samplers.hpp"

namespace tsample {

struct Dataset {
  std::vector<PointCloud> train;
  std::vector<PointCloud> test;
};

/// Synthetic toy sets or <root>/{train,test}. Every cloud must have
/// config.n points; classification clouds must carry labels.
Dataset load_run_dataset(const RunConfig& config);

/// Number of classes implied by the labels of `data` (at least 2).
int infer_num_classes(const Dataset& data);

std::unique_ptr<TaskHead> make_head(const RunConfig& config, uint64_t seed);
LearnedSampler make_sampler(const RunConfig& config, uint64_t seed);

/// Source/target pair with the transform mapping source onto target.
struct RegistrationPair {
  PointCloud source;
  PointCloud target;
  RigidTransform gt;
};

/// Seeded pairs: target = T(source) for random T per config limits.
std::vector<RegistrationPair> make_pairs(const std::vector<PointCloud>& clouds,
                                         const RunConfig& config, uint64_t seed,
                                         int pairs_per_cloud);

struct PretrainResult {
  std::unique_ptr<TaskHead> head;
  RunReport report;  // epochs plus reference metrics on the test split
};

/// Trains the task head on full-resolution clouds. Non-finite loss throws
/// DivergenceError.
PretrainResult pretrain_head(const RunConfig& config, const Dataset& data);

struct TrainResult {
  LearnedSampler sampler;
  std::unique_ptr<TaskHead> head;
  RunReport report;
  uint64_t head_checksum_before = 0;
  uint64_t head_checksum_after = 0;
};

/// Trains the sampler against `head` (frozen unless config.joint_training).
/// Ownership of the head passes through to the result.
TrainResult train(const RunConfig& config, const Dataset& data, std::unique_ptr<TaskHead> head);

/// Head metrics on full clouds: accuracy, cd/emd, or mre.
std::map<std::string, double> reference_metrics(const RunConfig& config, TaskHead& head,
                                                const std::vector<PointCloud>& test);

/// One G, M and C cell per m. m > n throws ArgumentError.
RunReport evaluate(const RunConfig& config, LearnedSampler& sampler, TaskHead& head,
                   const std::vector<PointCloud>& test, const std::vector<int>& m_list);

/// One cell per m for a classical sampler, set named after the sampler.
RunReport evaluate_baseline(const RunConfig& config, TaskHead& head,
                            const std::vector<PointCloud>& test, SamplerKind kind,
                            const std::vector<int>& m_list, uint64_t seed);

/// G and C cells at config.m for each noise level (averaged over seeds),
/// plus a clean random-sampling cell.
RunReport robustness(const RunConfig& config, LearnedSampler& sampler, TaskHead& head,
                     const std::vector<PointCloud>& test, const std::vector<double>& levels,
                     const std::vector<uint64_t>& seeds);

struct BenchOptions {
  int n = 1024;
  std::vector<int> m_grid = {8, 32, 128, 512};
  int clouds = 4;
  int repeats = 3;
  uint64_t seed = 0;
};

/// Per-shape seconds for "random", "fps" and "learned" (cells with a
/// "seconds" value) and a per-stage breakdown at the largest m in timings.
RunReport bench(const RunConfig& config, const BenchOptions& options);

enum class SweepParam { kAlpha, kTauMin };
const char* to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& text);

/// Trains one sampler per value against the same head; one G cell per value
/// at config.m, the value recorded under extras "<param>.<index>".
RunReport sweep(const RunConfig& config, const Dataset& data, const Checkpoint& head_checkpoint,
                SweepParam param, const std::vector<double>& values);

// Checkpoint plumbing. Head blobs live under "head.", sampler blobs under
// "sampler.".
Checkpoint head_checkpoint(TaskHead& head, const RunConfig& config);
Checkpoint sampler_checkpoint(LearnedSampler& sampler, TaskHead* joint_head,
                              const RunConfig& config);
std::unique_ptr<TaskHead> load_head(const Checkpoint& checkpoint, const RunConfig& config);
LearnedSampler load_sampler(const Checkpoint& checkpoint, const RunConfig& config);

}  // namespace tsample
