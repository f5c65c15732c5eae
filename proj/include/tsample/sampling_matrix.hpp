// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <random>
#include <vector>

#include "tsample/encoder.hpp"
#include "tsample/nn/layers.hpp"
#include "tsample/pointcloud.hpp"

namespace tsample {

/// Column-stochastic relaxed sampling matrix (n x m): nonnegative entries,
/// every column sums to one.
struct SamplingMatrix {
  nn::Mat dense;
  double temperature = 1.0;

  int rows() const { return static_cast<int>(dense.rows()); }
  int cols() const { return static_cast<int>(dense.cols()); }
};

/// Thresholded sampling matrix in coordinate (COO) format, sorted by column
/// then row. Every column keeps at least one entry.
struct SparseSamplingMatrix {
  struct Triplet {
    int row;
    int col;
    double value;
  };
  std::vector<Triplet> triplets;
  int rows = 0;
  int cols = 0;
  double threshold = 0.0;

  size_t nnz() const { return triplets.size(); }
  double nonzero_fraction() const;
};

inline const std::vector<int> kDefaultSamplerHidden = {512, 256, 128};

/// Row-wise map from per-point features to m_max sampling logits: hidden
/// layers with normalization + ReLU, linear output.
class SamplerNet {
 public:
  SamplerNet() = default;
  SamplerNet(int feature_dim, std::vector<int> hidden, int m_max, std::mt19937_64& rng);

  nn::Var forward(const nn::Var& features, bool training);
  void collect(nn::ParameterSet& set, const std::string& prefix);

  int feature_dim() const { return mlp_.in_dim(); }
  int m_max() const { return mlp_.out_dim(); }

 private:
  nn::Mlp mlp_;
};

/// Feature encoder + row-wise sampler: the trainable downsampling network.
struct LearnedSampler {
  PointEncoder encoder;
  SamplerNet rows;

  LearnedSampler() = default;
  LearnedSampler(std::vector<int> encoder_widths, std::vector<int> hidden, int m_max,
                 std::mt19937_64& rng);

  /// Differentiable Q for a stack of clouds with n points each, using the
  /// m left-most columns: (B*n x 3) -> (B*m x 3). `s_out` receives S.
  nn::Var sample(const nn::Var& points, nn::Index n, int m, double tau, bool training,
                 nn::Var* s_out = nullptr);
  void collect(nn::ParameterSet& set, const std::string& prefix = "sampler");
  int m_max() const { return rows.m_max(); }
};

/// Raw (pre-softmax) rows; row i depends only on feature row i.
nn::Mat predict_raw_rows(const FeatureMap& features, SamplerNet& params);

/// Column-wise softmax over rows of raw / tau, max-shifted per column.
SamplingMatrix anneal_softmax(const nn::Mat& raw, double tau);

/// Q = S^T P (dense).
Points regress_sampled(const PointCloud& cloud, const SamplingMatrix& s);

/// Keeps entries > r; a column left empty keeps its largest entry.
SparseSamplingMatrix sparsify(const SamplingMatrix& s, double r);

/// Q from stored triplets only; O(nnz) time and memory.
Points sparse_apply(const PointCloud& cloud, const SparseSamplingMatrix& s);

/// The m left-most columns of an n x m_max matrix.
SamplingMatrix truncate_columns(const SamplingMatrix& s_hat, int m);

/// ||S^T S - I||_F, reported as a diagnostic only.
double orthogonality_error(const SamplingMatrix& s);

/// Inference pipeline: generated = sparse_apply(sparsify(S, r)), then
/// nearest-neighbor matching and farthest-point completion to m.
DownsampleResult downsample(const PointCloud& cloud, LearnedSampler& model, int m,
                            double tau, double r);

/// Same pipeline; also returns the dense matrix for diagnostics.
DownsampleResult downsample(const PointCloud& cloud, LearnedSampler& model, int m,
                            double tau, double r, SamplingMatrix* dense_out);

/// tau decays linearly from tau_start to tau_min over the first
/// anneal_fraction of iterations, then stays at tau_min.
struct TemperatureSchedule {
  double tau_start = 1.0;
  double tau_min = 0.1;
  double anneal_fraction = 0.8;
  long total_iterations = 1;

  double at(long iteration) const;
};

/// "n m nnz" header followed by one "row col value" line per triplet.
void write_sparse_matrix(const std::filesystem::path& path, const SparseSamplingMatrix& s);
SparseSamplingMatrix read_sparse_matrix(const std::filesystem::path& path);

}  // namespace tsample
