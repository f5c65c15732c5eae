// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/sampling_matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tsample/samplers.hpp"

namespace tsample {

double SparseSamplingMatrix::nonzero_fraction() const {
  const double total = static_cast<double>(rows) * static_cast<double>(cols);
  return total > 0.0 ? static_cast<double>(triplets.size()) / total : 0.0;
}

SamplerNet::SamplerNet(int feature_dim, std::vector<int> hidden, int m_max,
                       std::mt19937_64& rng) {
  if (m_max < 1) throw ConfigError("sampler output width must be positive");
  hidden.push_back(m_max);
  mlp_ = nn::Mlp(feature_dim, std::move(hidden),
                 {.batch_norm = true, .activate_last = false}, rng);
}

nn::Var SamplerNet::forward(const nn::Var& features, bool training) {
  if (features.cols() != mlp_.in_dim()) {
    throw ConfigError("sampler expects feature dim " + std::to_string(mlp_.in_dim()) +
                      ", got " + std::to_string(features.cols()));
  }
  return mlp_.forward(features, training);
}

void SamplerNet::collect(nn::ParameterSet& set, const std::string& prefix) {
  mlp_.collect(set, prefix + ".mlp");
}

LearnedSampler::LearnedSampler(std::vector<int> encoder_widths, std::vector<int> hidden,
                               int m_max, std::mt19937_64& rng)
    : encoder(std::move(encoder_widths), rng) {
  rows = SamplerNet(encoder.feature_dim(), std::move(hidden), m_max, rng);
}

nn::Var LearnedSampler::sample(const nn::Var& points, nn::Index n, int m, double tau,
                               bool training, nn::Var* s_out) {
  if (m < 1 || m > m_max()) {
    throw ArgumentError("sample size m=" + std::to_string(m) + " outside [1, " +
                        std::to_string(m_max()) + "]");
  }
  nn::Var raw = rows.forward(encoder.forward(points, n, training), training);
  if (m < m_max()) raw = nn::slice_cols(raw, 0, m);
  nn::Var s = nn::segment_column_softmax(raw, n, tau);
  if (s_out) *s_out = s;
  return nn::segment_transpose_matmul(s, points, n);
}

void LearnedSampler::collect(nn::ParameterSet& set, const std::string& prefix) {
  encoder.collect(set, prefix + ".encoder");
  rows.collect(set, prefix + ".rows");
}

nn::Mat predict_raw_rows(const FeatureMap& features, SamplerNet& params) {
  return params.forward(nn::Var(features.features), false).value();
}

SamplingMatrix anneal_softmax(const nn::Mat& raw, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("anneal_softmax: tau must be > 0");
  if (raw.rows() < 1 || raw.cols() < 1) throw ArgumentError("anneal_softmax: empty input");
  return {nn::segment_column_softmax(nn::Var(raw), raw.rows(), tau).value(), tau};
}

Points regress_sampled(const PointCloud& cloud, const SamplingMatrix& s) {
  if (s.rows() != cloud.size()) {
    throw ArgumentError("regress_sampled: matrix has " + std::to_string(s.rows()) +
                        " rows, cloud has " + std::to_string(cloud.size()) + " points");
  }
  return s.dense.transpose() * cloud.points();
}

SparseSamplingMatrix sparsify(const SamplingMatrix& s, double r) {
  if (!(r >= 0.0) || r >= 1.0) throw ArgumentError("sparsify: threshold must lie in [0, 1)");
  SparseSamplingMatrix out;
  out.rows = s.rows();
  out.cols = s.cols();
  out.threshold = r;
  const int n = s.rows();
  const int m = s.cols();
  // Row-major passes: count kept entries and column argmax, then fill.
  // Ties in the argmax go to the lowest row.
  std::vector<size_t> count(static_cast<size_t>(m), 0);
  std::vector<int> best(static_cast<size_t>(m), 0);
  for (int i = 0; i < n; ++i) {
    const double* row = s.dense.data() + static_cast<nn::Index>(i) * m;
    for (int j = 0; j < m; ++j) {
      count[j] += row[j] > r;
      if (row[j] > s.dense(best[j], j)) best[j] = i;
    }
  }
  // An empty column gets one slot for its argmax.
  std::vector<size_t> start(static_cast<size_t>(m), 0);
  size_t total = 0;
  for (int j = 0; j < m; ++j) {
    start[j] = total;
    total += std::max<size_t>(count[j], 1);
  }
  out.triplets.resize(total);
  std::vector<size_t> cursor = start;
  for (int i = 0; i < n; ++i) {
    const double* row = s.dense.data() + static_cast<nn::Index>(i) * m;
    for (int j = 0; j < m; ++j) {
      if (row[j] > r) out.triplets[cursor[j]++] = {i, j, row[j]};
    }
  }
  for (int j = 0; j < m; ++j) {
    if (count[j] == 0) out.triplets[start[j]] = {best[j], j, s.dense(best[j], j)};
  }
  return out;
}

Points sparse_apply(const PointCloud& cloud, const SparseSamplingMatrix& s) {
  if (s.rows != cloud.size()) throw ArgumentError("sparse_apply: shape mismatch");
  Points q = Points::Zero(s.cols, 3);
  const Points& p = cloud.points();
  for (const auto& t : s.triplets) q.row(t.col) += t.value * p.row(t.row);
  return q;
}

SamplingMatrix truncate_columns(const SamplingMatrix& s_hat, int m) {
  if (m < 1 || m > s_hat.cols()) {
    throw ArgumentError("truncate_columns: m=" + std::to_string(m) + " outside [1, " +
                        std::to_string(s_hat.cols()) + "]");
  }
  return {s_hat.dense.leftCols(m), s_hat.temperature};
}

double orthogonality_error(const SamplingMatrix& s) {
  const nn::Mat gram = s.dense.transpose() * s.dense;
  return (gram - nn::Mat::Identity(gram.rows(), gram.cols())).norm();
}

DownsampleResult downsample(const PointCloud& cloud, LearnedSampler& model, int m,
                            double tau, double r) {
  return downsample(cloud, model, m, tau, r, nullptr);
}

DownsampleResult downsample(const PointCloud& cloud, LearnedSampler& model, int m,
                            double tau, double r, SamplingMatrix* dense_out) {
  if (m > cloud.size()) throw ArgumentError("downsample: m exceeds cloud size");
  nn::Var s;
  model.sample(nn::Var(nn::Mat(cloud.points())), cloud.size(), m, tau, false, &s);
  SamplingMatrix dense{s.value(), tau};
  DownsampleResult result;
  result.generated = sparse_apply(cloud, sparsify(dense, r));
  result.matched = match_to_subset(cloud, result.generated);
  result.completed = fps_completion(cloud, result.matched, m);
  if (dense_out) *dense_out = std::move(dense);
  return result;
}

double TemperatureSchedule::at(long iteration) const {
  const double span = anneal_fraction * static_cast<double>(std::max<long>(total_iterations, 1));
  if (span <= 0.0) return tau_min;
  const double t = std::clamp(static_cast<double>(iteration) / span, 0.0, 1.0);
  return std::lerp(tau_start, tau_min, t);
}

void write_sparse_matrix(const std::filesystem::path& path, const SparseSamplingMatrix& s) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << s.rows << ' ' << s.cols << ' ' << s.nnz() << '\n';
  char buf[32];
  for (const auto& t : s.triplets) {
    auto res = std::to_chars(buf, buf + sizeof(buf) - 1, t.value);
    *res.ptr = '\0';
    out << t.row << ' ' << t.col << ' ' << buf << '\n';
  }
}

SparseSamplingMatrix read_sparse_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  SparseSamplingMatrix s;
  size_t nnz = 0;
  if (!(in >> s.rows >> s.cols >> nnz)) throw ParseError(path.string() + ":1: bad header");
  s.triplets.resize(nnz);
  for (size_t i = 0; i < nnz; ++i) {
    auto& t = s.triplets[i];
    if (!(in >> t.row >> t.col >> t.value)) {
      throw ParseError(path.string() + ":" + std::to_string(i + 2) + ": bad triplet");
    }
    if (t.row < 0 || t.row >= s.rows || t.col < 0 || t.col >= s.cols) {
      throw ParseError(path.string() + ":" + std::to_string(i + 2) + ": index out of range");
    }
  }
  return s;
}

}  // namespace tsample
