// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <vector>

namespace tsample::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Node {
  Mat value;
  Mat grad;  // empty until something flows into it
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this->grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  Mat& grad_ref();
  void accumulate(const Mat& g);
};

/// Handle to a node of a dynamically built reverse-mode graph. Copies share
/// the node. Leaves created with requires_grad are trainable parameters.
class Var {
 public:
  Var() = default;
  explicit Var(Mat value, bool requires_grad = false);

  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  const Mat& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  double item() const;

  /// Backpropagates from this 1x1 node. Gradients accumulate into leaves.
  void backward() const;
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Builds an interior node. When no parent requires grad, the result is a
/// constant and `backward` is dropped.
Var make_node(Mat value, const std::vector<Var>& parents,
              std::function<void(Node&)> backward);

}  // namespace tsample::nn
