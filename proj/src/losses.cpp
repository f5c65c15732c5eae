// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/losses.hpp"

#include <cmath>

#include "tsample/metrics.hpp"
#include "tsample/nn/ops.hpp"

namespace tsample {

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ArgumentError("subset weight alpha must be finite and >= 0");
  }
}

namespace loss {
namespace {

Points block(const nn::Mat& m, nn::Index begin, nn::Index rows) {
  return m.middleRows(begin, rows);
}

}  // namespace

nn::Var cross_entropy(const nn::Var& logits, const std::vector<int>& labels) {
  const nn::Index b = logits.rows();
  const nn::Index c = logits.cols();
  if (static_cast<nn::Index>(labels.size()) != b) {
    throw ArgumentError("cross_entropy: label count does not match batch");
  }
  nn::Mat prob(b, c);
  double total = 0.0;
  for (nn::Index i = 0; i < b; ++i) {
    if (labels[i] < 0 || labels[i] >= c) throw ArgumentError("cross_entropy: label out of range");
    const double top = logits.value().row(i).maxCoeff();
    prob.row(i) = (logits.value().row(i).array() - top).exp().matrix();
    const double z = prob.row(i).sum();
    prob.row(i) /= z;
    total += -(logits.value()(i, labels[i]) - top - std::log(z));
  }
  nn::Mat out(1, 1);
  out(0, 0) = total / static_cast<double>(b);
  return nn::make_node(std::move(out), {logits}, [prob = std::move(prob), labels](nn::Node& n) {
    nn::Mat g = prob;
    for (size_t i = 0; i < labels.size(); ++i) g(static_cast<nn::Index>(i), labels[i]) -= 1.0;
    n.parents[0]->accumulate(g * (n.grad(0, 0) / static_cast<double>(labels.size())));
  });
}

nn::Var chamfer(const nn::Var& a, nn::Index ka, const nn::Var& b, nn::Index kb) {
  if (ka < 1 || kb < 1 || a.rows() % ka != 0 || b.rows() % kb != 0 ||
      a.rows() / ka != b.rows() / kb) {
    throw ArgumentError("chamfer: inconsistent batch layout");
  }
  const nn::Index batch = a.rows() / ka;
  nn::Mat ga = nn::Mat::Zero(a.rows(), 3);
  nn::Mat gb = nn::Mat::Zero(b.rows(), 3);
  double total = 0.0;
  for (nn::Index s = 0; s < batch; ++s) {
    const Points pa = block(a.value(), s * ka, ka);
    const Points pb = block(b.value(), s * kb, kb);
    const NearestNeighbors ab = nearest_neighbors(pa, pb);
    const NearestNeighbors ba = nearest_neighbors(pb, pa);
    total += ab.sq_dist.mean() + ba.sq_dist.mean();
    for (nn::Index i = 0; i < ka; ++i) {
      const Eigen::RowVector3d d = pa.row(i) - pb.row(ab.index[i]);
      ga.row(s * ka + i) += 2.0 * d / static_cast<double>(ka);
      gb.row(s * kb + ab.index[i]) -= 2.0 * d / static_cast<double>(ka);
    }
    for (nn::Index j = 0; j < kb; ++j) {
      const Eigen::RowVector3d d = pb.row(j) - pa.row(ba.index[j]);
      gb.row(s * kb + j) += 2.0 * d / static_cast<double>(kb);
      ga.row(s * ka + ba.index[j]) -= 2.0 * d / static_cast<double>(kb);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch);
  nn::Mat out(1, 1);
  out(0, 0) = total * inv;
  return nn::make_node(std::move(out), {a, b},
                       [ga = std::move(ga), gb = std::move(gb), inv](nn::Node& n) {
    const double g = n.grad(0, 0) * inv;
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(ga * g);
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate(gb * g);
  });
}

nn::Var earth_mover(const nn::Var& a, const nn::Var& b, nn::Index k) {
  if (k < 1 || a.rows() != b.rows() || a.rows() % k != 0) {
    throw ArgumentError("earth_mover: inconsistent batch layout");
  }
  const nn::Index batch = a.rows() / k;
  nn::Mat ga = nn::Mat::Zero(a.rows(), 3);
  nn::Mat gb = nn::Mat::Zero(b.rows(), 3);
  double total = 0.0;
  for (nn::Index s = 0; s < batch; ++s) {
    const Points pa = block(a.value(), s * k, k);
    const Points pb = block(b.value(), s * k, k);
    const TransportSolution sol = earth_mover_solution(pa, pb);
    total += sol.cost;
    for (const auto& f : sol.flow) {
      const Eigen::RowVector3d d = pa.row(f.source) - pb.row(f.target);
      const double len = d.norm();
      if (len > 0.0) {
        ga.row(s * k + f.source) += f.weight * d / len;
        gb.row(s * k + f.target) -= f.weight * d / len;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch);
  nn::Mat out(1, 1);
  out(0, 0) = total * inv;
  return nn::make_node(std::move(out), {a, b},
                       [ga = std::move(ga), gb = std::move(gb), inv](nn::Node& n) {
    const double g = n.grad(0, 0) * inv;
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(ga * g);
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate(gb * g);
  });
}

nn::Var subset(const nn::Mat& sources, nn::Index n, const nn::Var& generated, nn::Index m) {
  if (n < 1 || m < 1 || sources.rows() % n != 0 || generated.rows() % m != 0 ||
      sources.rows() / n != generated.rows() / m || sources.cols() != 3) {
    throw ArgumentError("subset loss: inconsistent batch layout");
  }
  const nn::Index batch = sources.rows() / n;
  nn::Mat grad = nn::Mat::Zero(generated.rows(), 3);
  double total = 0.0;
  for (nn::Index s = 0; s < batch; ++s) {
    const Points src = block(sources, s * n, n);
    const Points gen = block(generated.value(), s * m, m);
    const NearestNeighbors nnb = nearest_neighbors(gen, src);
    total += nnb.sq_dist.mean();
    for (nn::Index i = 0; i < m; ++i) {
      grad.row(s * m + i) = 2.0 * (gen.row(i) - src.row(nnb.index[i])) / static_cast<double>(m);
    }
  }
  const double inv = 1.0 / static_cast<double>(batch);
  nn::Mat out(1, 1);
  out(0, 0) = total * inv;
  return nn::make_node(std::move(out), {generated}, [grad = std::move(grad), inv](nn::Node& node) {
    node.parents[0]->accumulate(grad * (node.grad(0, 0) * inv));
  });
}

nn::Var pose(const nn::Var& pred, const std::vector<RigidTransform>& gt,
             double translation_weight) {
  const nn::Index b = pred.rows();
  if (pred.cols() != 7 || static_cast<nn::Index>(gt.size()) != b || b == 0) {
    throw ArgumentError("pose loss: expected (B x 7) predictions and B ground truths");
  }
  nn::Mat diff(b, 7);
  double total = 0.0;
  for (nn::Index i = 0; i < b; ++i) {
    const Eigen::Quaterniond& q = gt[i].rotation;
    Eigen::Vector4d target(q.w(), q.x(), q.y(), q.z());
    const Eigen::Vector4d p = pred.value().row(i).head<4>().transpose();
    if (p.dot(target) < 0.0) target = -target;
    diff.row(i).head<4>() = (p - target).transpose();
    diff.row(i).tail<3>() =
        pred.value().row(i).tail<3>() - gt[i].translation.transpose();
    total += diff.row(i).head<4>().squaredNorm() +
             translation_weight * diff.row(i).tail<3>().squaredNorm();
  }
  const double inv = 1.0 / static_cast<double>(b);
  nn::Mat out(1, 1);
  out(0, 0) = total * inv;
  return nn::make_node(std::move(out), {pred},
                       [diff = std::move(diff), inv, translation_weight](nn::Node& n) {
    nn::Mat g = 2.0 * diff;
    g.rightCols(3) *= translation_weight;
    n.parents[0]->accumulate(g * (n.grad(0, 0) * inv));
  });
}

}  // namespace loss

nn::Var task_loss_var(TaskHead& head, const nn::Var& sampled, const TaskTarget& target,
                      bool training) {
  const nn::Index k = sampled.rows();
  if (k == 0) throw ArgumentError("task_loss: empty sampled set");
  switch (head.kind()) {
    case HeadKind::kClassification: {
      const auto* t = std::get_if<ClassTarget>(&target);
      if (!t) throw ArgumentError("task_loss: classification head needs a class label");
      auto& h = static_cast<ClassifierHead&>(head);
      return loss::cross_entropy(h.logits(sampled, k, training), {t->label});
    }
    case HeadKind::kReconstructionMlp:
    case HeadKind::kReconstructionMfold: {
      const auto* t = std::get_if<ReconTarget>(&target);
      if (!t) throw ArgumentError("task_loss: reconstruction head needs a target cloud");
      nn::Var recon = head.kind() == HeadKind::kReconstructionMlp
                          ? static_cast<MlpReconstructionHead&>(head).reconstruct(sampled, k, training)
                          : static_cast<MFoldHead&>(head).reconstruct(sampled, k, training);
      nn::Var original{nn::Mat(t->original)};
      nn::Var cd = loss::chamfer(recon, recon.rows(), original, original.rows());
      if (t->lambda_emd == 0.0) return cd;
      if (recon.rows() != original.rows()) {
        throw ArgumentError("task_loss: EMD term needs equal-size reconstruction and target");
      }
      return nn::add(cd, nn::scale(loss::earth_mover(recon, original, recon.rows()), t->lambda_emd));
    }
    case HeadKind::kRegistration: {
      const auto* t = std::get_if<PoseTarget>(&target);
      if (!t) throw ArgumentError("task_loss: registration head needs a pose target");
      auto& h = static_cast<RegistrationHead&>(head);
      nn::Var tgt{nn::Mat(t->target_sampled)};
      return loss::pose(h.pose(sampled, k, tgt, tgt.rows(), training), {t->gt},
                        t->translation_weight);
    }
  }
  throw ArgumentError("task_loss: unknown head kind");
}

nn::Var total_loss_var(TaskHead& head, const nn::Var& sampled, const TaskTarget& target,
                       const PointCloud& source, const LossWeights& weights, bool training) {
  weights.validate();
  nn::Var task = task_loss_var(head, sampled, target, training);
  if (weights.alpha == 0.0) return task;
  nn::Var sub = loss::subset(nn::Mat(source.points()), source.size(), sampled, sampled.rows());
  return nn::add(task, nn::scale(sub, weights.alpha));
}

double task_loss(TaskHead& head, const Points& sampled, const TaskTarget& target) {
  return task_loss_var(head, nn::Var(nn::Mat(sampled)), target).item();
}

double subset_loss(const PointCloud& source, const Points& generated) {
  if (generated.rows() == 0) throw ArgumentError("subset_loss: empty generated set");
  return nearest_neighbors(generated, source.points()).sq_dist.mean();
}

double total_loss(TaskHead& head, const Points& sampled, const TaskTarget& target,
                  const PointCloud& source, const LossWeights& weights) {
  return total_loss_var(head, nn::Var(nn::Mat(sampled)), target, source, weights).item();
}

}  // namespace tsample
