// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/nn/ops.hpp"

#include <cmath>
#include <string>

#include "tsample/pointcloud.hpp"

namespace tsample::nn {
namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw ArgumentError(std::string(op) + ": " + what);
}

std::string shape(const Var& v) {
  return std::to_string(v.rows()) + "x" + std::to_string(v.cols());
}

Node& parent(Node& n, size_t i) { return *n.parents[i]; }

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), "matmul", shape(a) + " * " + shape(b));
  Mat out;
  out.noalias() = a.value() * b.value();
  return make_node(std::move(out), {a, b}, [](Node& n) {
    Node& pa = parent(n, 0);
    Node& pb = parent(n, 1);
    if (pa.requires_grad) pa.grad_ref().noalias() += n.grad * pb.value.transpose();
    if (pb.requires_grad) pb.grad_ref().noalias() += pa.value.transpose() * n.grad;
  });
}

Var add_bias(const Var& x, const Var& bias) {
  require(bias.rows() == 1 && bias.cols() == x.cols(), "add_bias", shape(x) + " + " + shape(bias));
  Mat out = x.value();
  out.rowwise() += bias.value().row(0);
  return make_node(std::move(out), {x, bias}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).grad_ref() += n.grad.colwise().sum();
  });
}

Var add(const Var& a, const Var& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add", shape(a) + " + " + shape(b));
  return make_node(a.value() + b.value(), {a, b}, [](Node& n) {
    if (parent(n, 0).requires_grad) parent(n, 0).accumulate(n.grad);
    if (parent(n, 1).requires_grad) parent(n, 1).accumulate(n.grad);
  });
}

Var scale(const Var& x, double s) {
  return make_node(x.value() * s, {x}, [s](Node& n) { parent(n, 0).accumulate(n.grad * s); });
}

Var relu(const Var& x) {
  return make_node(x.value().cwiseMax(0.0), {x}, [](Node& n) {
    Node& px = parent(n, 0);
    px.grad_ref().array() += (px.value.array() > 0.0).cast<double>() * n.grad.array();
  });
}

Var sum(const Var& x) {
  Mat out(1, 1);
  out(0, 0) = x.value().sum();
  return make_node(std::move(out), {x}, [](Node& n) {
    parent(n, 0).grad_ref().array() += n.grad(0, 0);
  });
}

Var mean(const Var& x) {
  require(x.value().size() > 0, "mean", "empty input");
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats,
               bool training, double momentum, double eps) {
  const Index c = x.cols();
  require(gamma.cols() == c && beta.cols() == c, "batch_norm", "channel mismatch");
  require(stats.running_mean.cols() == c && stats.running_var.cols() == c, "batch_norm",
          "stats channel mismatch");
  const Index rows = x.rows();
  require(rows > 0, "batch_norm", "empty input");

  Eigen::RowVectorXd mu, var;
  if (training) {
    mu = x.value().colwise().mean();
    var = (x.value().rowwise() - mu).array().square().colwise().mean();
    const double unbias = rows > 1 ? static_cast<double>(rows) / (rows - 1) : 1.0;
    stats.running_mean = (1.0 - momentum) * stats.running_mean + momentum * mu;
    stats.running_var = (1.0 - momentum) * stats.running_var + momentum * unbias * var;
  } else {
    mu = stats.running_mean.row(0);
    var = stats.running_var.row(0);
  }
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Mat xhat = (x.value().rowwise() - mu).array().rowwise() * inv_std.array();
  Mat out = xhat.array().rowwise() * gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);

  return make_node(std::move(out), {x, gamma, beta},
                   [xhat = std::move(xhat), inv_std, training](Node& n) {
    Node& px = parent(n, 0);
    Node& pg = parent(n, 1);
    Node& pb = parent(n, 2);
    if (pg.requires_grad) pg.grad_ref() += (n.grad.array() * xhat.array()).colwise().sum().matrix();
    if (pb.requires_grad) pb.grad_ref() += n.grad.colwise().sum();
    if (!px.requires_grad) return;
    const Mat dxhat = n.grad.array().rowwise() * pg.value.row(0).array();
    if (!training) {
      px.grad_ref().array() += dxhat.array().rowwise() * inv_std.array();
      return;
    }
    const double count = static_cast<double>(dxhat.rows());
    const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
    const Eigen::RowVectorXd sum_dx = (dxhat.array() * xhat.array()).colwise().sum();
    Mat dx = (count * dxhat.array()).matrix();
    dx.rowwise() -= sum_d;
    dx.array() -= xhat.array().rowwise() * sum_dx.array();
    px.grad_ref().array() += (dx.array().rowwise() * inv_std.array()) / count;
  });
}

Var segment_max(const Var& x, Index k) {
  require(k > 0 && x.rows() % k == 0, "segment_max", "rows not divisible by segment size");
  const Index b = x.rows() / k;
  const Index c = x.cols();
  Mat out(b, c);
  std::vector<Index> arg(static_cast<size_t>(b * c));
  const Mat& v = x.value();
  for (Index s = 0; s < b; ++s) {
    for (Index j = 0; j < c; ++j) {
      Index best = s * k;
      double best_v = v(best, j);
      for (Index r = s * k + 1; r < (s + 1) * k; ++r) {
        if (v(r, j) > best_v) {
          best_v = v(r, j);
          best = r;
        }
      }
      out(s, j) = best_v;
      arg[s * c + j] = best;
    }
  }
  return make_node(std::move(out), {x}, [arg = std::move(arg), b, c](Node& n) {
    Mat& g = parent(n, 0).grad_ref();
    for (Index s = 0; s < b; ++s) {
      for (Index j = 0; j < c; ++j) g(arg[s * c + j], j) += n.grad(s, j);
    }
  });
}

Var repeat_rows(const Var& x, Index k) {
  require(k > 0, "repeat_rows", "k must be positive");
  const Index b = x.rows();
  Mat out(b * k, x.cols());
  for (Index s = 0; s < b; ++s) out.middleRows(s * k, k).rowwise() = x.value().row(s);
  return make_node(std::move(out), {x}, [b, k](Node& n) {
    Mat& g = parent(n, 0).grad_ref();
    for (Index s = 0; s < b; ++s) g.row(s) += n.grad.middleRows(s * k, k).colwise().sum();
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  Index cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == parts[0].rows(), "concat_cols", "row mismatch");
    cols += p.cols();
  }
  Mat out(parts[0].rows(), cols);
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  return make_node(std::move(out), parts, [offsets = std::move(offsets)](Node& n) {
    for (size_t i = 0; i < n.parents.size(); ++i) {
      Node& p = parent(n, i);
      if (p.requires_grad) p.grad_ref() += n.grad.middleCols(offsets[i], p.value.cols());
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  Index rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == parts[0].cols(), "concat_rows", "column mismatch");
    rows += p.rows();
  }
  Mat out(rows, parts[0].cols());
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    offsets.push_back(off);
    off += p.rows();
  }
  return make_node(std::move(out), parts, [offsets = std::move(offsets)](Node& n) {
    for (size_t i = 0; i < n.parents.size(); ++i) {
      Node& p = parent(n, i);
      if (p.requires_grad) p.grad_ref() += n.grad.middleRows(offsets[i], p.value.rows());
    }
  });
}

Var slice_cols(const Var& x, Index begin, Index count) {
  require(begin >= 0 && count >= 0 && begin + count <= x.cols(), "slice_cols", "range out of bounds");
  return make_node(x.value().middleCols(begin, count), {x}, [begin, count](Node& n) {
    parent(n, 0).grad_ref().middleCols(begin, count) += n.grad;
  });
}

Var slice_rows(const Var& x, Index begin, Index count) {
  require(begin >= 0 && count >= 0 && begin + count <= x.rows(), "slice_rows", "range out of bounds");
  return make_node(x.value().middleRows(begin, count), {x}, [begin, count](Node& n) {
    parent(n, 0).grad_ref().middleRows(begin, count) += n.grad;
  });
}

Var reshape(const Var& x, Index rows, Index cols) {
  require(rows * cols == x.value().size(), "reshape", shape(x) + " -> " +
          std::to_string(rows) + "x" + std::to_string(cols));
  Mat out = Eigen::Map<const Mat>(x.value().data(), rows, cols);
  const Index r0 = x.rows(), c0 = x.cols();
  return make_node(std::move(out), {x}, [r0, c0](Node& n) {
    parent(n, 0).grad_ref() += Eigen::Map<const Mat>(n.grad.data(), r0, c0);
  });
}

Var segment_column_softmax(const Var& raw, Index k, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("softmax temperature must be > 0");
  require(k > 0 && raw.rows() % k == 0, "segment_column_softmax", "rows not divisible by k");
  const Index b = raw.rows() / k;
  Mat out(raw.rows(), raw.cols());
  for (Index s = 0; s < b; ++s) {
    auto in = raw.value().middleRows(s * k, k);
    auto o = out.middleRows(s * k, k);
    const Eigen::RowVectorXd top = in.colwise().maxCoeff();
    o = ((in.rowwise() - top) / tau).array().exp().matrix();
    const Eigen::RowVectorXd total = o.colwise().sum();
    o.array().rowwise() /= total.array();
  }
  return make_node(std::move(out), {raw}, [b, k, tau](Node& n) {
    Mat& g = parent(n, 0).grad_ref();
    for (Index s = 0; s < b; ++s) {
      auto sv = n.value.middleRows(s * k, k);
      auto gs = n.grad.middleRows(s * k, k);
      const Eigen::RowVectorXd dot = (sv.array() * gs.array()).colwise().sum();
      g.middleRows(s * k, k).array() +=
          sv.array() * (gs.rowwise() - dot).array() / tau;
    }
  });
}

Var segment_transpose_matmul(const Var& s, const Var& p, Index k) {
  require(k > 0 && s.rows() % k == 0 && s.rows() == p.rows(), "segment_transpose_matmul",
          shape(s) + " vs " + shape(p));
  const Index b = s.rows() / k;
  const Index m = s.cols();
  Mat out(b * m, p.cols());
  for (Index i = 0; i < b; ++i) {
    out.middleRows(i * m, m).noalias() =
        s.value().middleRows(i * k, k).transpose() * p.value().middleRows(i * k, k);
  }
  return make_node(std::move(out), {s, p}, [b, k, m](Node& n) {
    Node& ps = parent(n, 0);
    Node& pp = parent(n, 1);
    for (Index i = 0; i < b; ++i) {
      auto dq = n.grad.middleRows(i * m, m);
      if (ps.requires_grad) {
        ps.grad_ref().middleRows(i * k, k).noalias() +=
            pp.value.middleRows(i * k, k) * dq.transpose();
      }
      if (pp.requires_grad) {
        pp.grad_ref().middleRows(i * k, k).noalias() +=
            ps.value.middleRows(i * k, k) * dq;
      }
    }
  });
}

Var normalize_rows(const Var& x) {
  const Eigen::VectorXd norms = x.value().rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > 0.0)) throw DivergenceError("normalize_rows: zero-norm row");
  }
  Mat out = x.value().array().colwise() / norms.array();
  return make_node(std::move(out), {x}, [norms](Node& n) {
    // d(x/|x|) = (g - y (y.g)) / |x|
    const Eigen::VectorXd dot = (n.value.array() * n.grad.array()).rowwise().sum();
    Mat d = n.grad - (n.value.array().colwise() * dot.array()).matrix();
    parent(n, 0).grad_ref().array() += d.array().colwise() / norms.array();
  });
}

}  // namespace tsample::nn
