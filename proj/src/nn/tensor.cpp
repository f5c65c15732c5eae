// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/nn/tensor.hpp"

#include <unordered_set>

#include "tsample/pointcloud.hpp"

namespace tsample::nn {

Mat& Node::grad_ref() {
  if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
  return grad;
}

void Node::accumulate(const Mat& g) {
  if (grad.size() == 0) grad = g;
  else grad += g;
}

Var::Var(Mat value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

double Var::item() const {
  if (rows() != 1 || cols() != 1) throw ArgumentError("item() needs a 1x1 value");
  return value()(0, 0);
}

void Var::backward() const {
  if (rows() != 1 || cols() != 1) throw ArgumentError("backward() needs a scalar root");
  if (!requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  node_->accumulate(Mat::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad.size() != 0) {
      node->backward(*node);
      // Interior gradients are not needed after propagation.
      node->grad.resize(0, 0);
    }
  }
}

void Var::zero_grad() {
  if (node_) node_->grad.resize(0, 0);
}

Var make_node(Mat value, const std::vector<Var>& parents,
              std::function<void(Node&)> backward) {
  Var out(std::move(value), false);
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (any) {
    auto& node = *out.node();
    node.requires_grad = true;
    node.parents.reserve(parents.size());
    for (const auto& p : parents) node.parents.push_back(p.node());
    node.backward = std::move(backward);
  }
  return out;
}

}  // namespace tsample::nn
