// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "tsample/nn/tensor.hpp"

namespace tsample::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(std::vector<Var> params, AdamOptions options = {});

  void zero_grad();
  /// Parameters with no gradient this step are left untouched.
  void step(double lr);
  long steps() const { return t_; }

 private:
  std::vector<Var> params_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  AdamOptions options_;
  long t_ = 0;
};

}  // namespace tsample::nn
