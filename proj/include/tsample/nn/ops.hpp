// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tsample/nn/tensor.hpp"

namespace tsample::nn {

// A batch of B items is stored as stacked rows, k consecutive rows per item.
// "Segment" ops below operate on those k-row blocks independently.

Var matmul(const Var& a, const Var& b);
/// x + b with b (1 x c) broadcast over rows.
Var add_bias(const Var& x, const Var& bias);
Var add(const Var& a, const Var& b);
Var scale(const Var& x, double s);
Var relu(const Var& x);
Var sum(const Var& x);
Var mean(const Var& x);

struct BatchNormStats {
  Mat running_mean;  // 1 x c
  Mat running_var;   // 1 x c
};

/// Per-channel normalization over all rows. In training mode the batch
/// statistics are used and the running estimates updated; otherwise the
/// running estimates are used.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats,
               bool training, double momentum = 0.1, double eps = 1e-5);

/// Column-wise max within each k-row segment: (B*k x c) -> (B x c).
Var segment_max(const Var& x, Index k);
/// Repeats every row k times consecutively: (B x c) -> (B*k x c).
Var repeat_rows(const Var& x, Index k);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& x, Index begin, Index count);
Var slice_rows(const Var& x, Index begin, Index count);
/// Row-major reinterpretation; rows*cols must match.
Var reshape(const Var& x, Index rows, Index cols);

/// Per segment, per column softmax over the k rows of raw / tau.
Var segment_column_softmax(const Var& raw, Index k, double tau);
/// Per segment S_b^T P_b: (B*k x m), (B*k x c) -> (B*m x c).
Var segment_transpose_matmul(const Var& s, const Var& p, Index k);

/// Scales each row to unit Euclidean norm.
Var normalize_rows(const Var& x);

}  // namespace tsample::nn
