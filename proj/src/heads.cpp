// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/heads.hpp"

namespace tsample {
namespace {

void check_points(const nn::Var& points, nn::Index k, const char* who) {
  if (k < 1 || points.rows() == 0) throw ArgumentError(std::string(who) + ": empty input");
  if (points.cols() != 3 || points.rows() % k != 0) {
    throw ArgumentError(std::string(who) + ": expected stacked (B*k x 3) points");
  }
}

std::vector<int> append(std::vector<int> v, int last) {
  v.push_back(last);
  return v;
}

}  // namespace

const char* to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::kClassification: return "classification";
    case HeadKind::kReconstructionMlp: return "reconstruction_mlp";
    case HeadKind::kReconstructionMfold: return "reconstruction_mfold";
    case HeadKind::kRegistration: return "registration";
  }
  return "unknown";
}

HeadKind parse_head_kind(const std::string& text) {
  for (HeadKind k : {HeadKind::kClassification, HeadKind::kReconstructionMlp,
                     HeadKind::kReconstructionMfold, HeadKind::kRegistration}) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError("unknown head kind '" + text + "'");
}

nn::ParameterSet TaskHead::parameters(const std::string& prefix) {
  nn::ParameterSet set;
  collect(set, prefix);
  return set;
}

ClassifierHead::ClassifierHead(int num_classes, std::vector<int> point_widths,
                               std::vector<int> fc_widths, std::mt19937_64& rng)
    : num_classes_(num_classes) {
  if (num_classes < 2) throw ConfigError("classifier needs at least two classes");
  points_ = nn::Mlp(3, std::move(point_widths), {.batch_norm = true, .activate_last = true}, rng);
  fc_ = nn::Mlp(points_.out_dim(), append(std::move(fc_widths), num_classes),
                {.batch_norm = true, .activate_last = false}, rng);
}

void ClassifierHead::collect(nn::ParameterSet& set, const std::string& prefix) {
  points_.collect(set, prefix + ".points");
  fc_.collect(set, prefix + ".fc");
}

nn::Var ClassifierHead::logits(const nn::Var& points, nn::Index k, bool training) {
  check_points(points, k, "classify");
  return fc_.forward(nn::segment_max(points_.forward(points, training), k), training);
}

MlpReconstructionHead::MlpReconstructionHead(int output_points, std::vector<int> encoder_widths,
                                             std::vector<int> decoder_hidden,
                                             std::mt19937_64& rng)
    : output_points_(output_points) {
  if (output_points < 1) throw ConfigError("decoder output size must be positive");
  encoder_ = nn::Mlp(3, std::move(encoder_widths), {.batch_norm = true, .activate_last = true}, rng);
  decoder_ = nn::Mlp(encoder_.out_dim(), append(std::move(decoder_hidden), 3 * output_points),
                     {.batch_norm = false, .activate_last = false}, rng);
}

void MlpReconstructionHead::collect(nn::ParameterSet& set, const std::string& prefix) {
  encoder_.collect(set, prefix + ".encoder");
  decoder_.collect(set, prefix + ".decoder");
}

nn::Var MlpReconstructionHead::reconstruct(const nn::Var& points, nn::Index k, bool training) {
  check_points(points, k, "reconstruct_mlp");
  nn::Var code = nn::segment_max(encoder_.forward(points, training), k);
  nn::Var flat = decoder_.forward(code, training);
  return nn::reshape(flat, flat.rows() * output_points_, 3);
}

void MFoldConfig::validate() const {
  if (patches < 1 || code_dim < 1 || grid_rows < 1 || grid_cols < 1) {
    throw ConfigError("M-fold configuration values must be positive");
  }
  if (code_dim % patches != 0) {
    throw ConfigError("M-fold: patch count " + std::to_string(patches) +
                      " does not divide code dim " + std::to_string(code_dim));
  }
}

MFoldHead::MFoldHead(const MFoldConfig& config, std::vector<int> encoder_hidden,
                     std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  encoder_ = nn::Mlp(3, append(std::move(encoder_hidden), config_.code_dim),
                     {.batch_norm = true, .activate_last = true}, rng);
  const int local = config_.local_dim();
  const nn::MlpOptions fold{.batch_norm = false, .activate_last = false};
  fold1_ = nn::Mlp(local + 2, {64, 32, 3}, fold, rng);
  fold2_ = nn::Mlp(local + 3 + 2, {64, 32, 3}, fold, rng);
  grid_.resize(config_.grid_rows * config_.grid_cols, 2);
  for (int r = 0; r < config_.grid_rows; ++r) {
    for (int c = 0; c < config_.grid_cols; ++c) {
      const int i = r * config_.grid_cols + c;
      grid_(i, 0) = config_.grid_rows > 1 ? static_cast<double>(r) / (config_.grid_rows - 1) : 0.5;
      grid_(i, 1) = config_.grid_cols > 1 ? static_cast<double>(c) / (config_.grid_cols - 1) : 0.5;
    }
  }
}

void MFoldHead::collect(nn::ParameterSet& set, const std::string& prefix) {
  encoder_.collect(set, prefix + ".encoder");
  fold1_.collect(set, prefix + ".fold1");
  fold2_.collect(set, prefix + ".fold2");
}

nn::Index MFoldHead::folding_parameter_count() {
  nn::ParameterSet set;
  fold1_.collect(set, "fold1");
  fold2_.collect(set, "fold2");
  return set.count();
}

nn::Var MFoldHead::reconstruct(const nn::Var& points, nn::Index k, bool training) {
  check_points(points, k, "reconstruct_mfold");
  const nn::Index batch = points.rows() / k;
  const nn::Index patches = config_.patches;
  const nn::Index cells = grid_.rows();
  nn::Var code = nn::segment_max(encoder_.forward(points, training), k);
  nn::Var local = nn::reshape(code, batch * patches, config_.local_dim());
  nn::Var repeated = nn::repeat_rows(local, cells);
  nn::Mat tiled(batch * patches * cells, 2);
  for (nn::Index b = 0; b < batch * patches; ++b) tiled.middleRows(b * cells, cells) = grid_;
  nn::Var grid(std::move(tiled));
  nn::Var first = fold1_.forward(nn::concat_cols({repeated, grid}), training);
  return fold2_.forward(nn::concat_cols({repeated, first, grid}), training);
}

RegistrationHead::RegistrationHead(std::vector<int> encoder_widths, std::vector<int> fc_hidden,
                                   std::mt19937_64& rng) {
  encoder_ = nn::Mlp(3, std::move(encoder_widths), {.batch_norm = true, .activate_last = true}, rng);
  fc_ = nn::Mlp(2 * encoder_.out_dim(), append(std::move(fc_hidden), 7),
                {.batch_norm = true, .activate_last = false}, rng);
  // Start near the identity transform.
  nn::Linear& out = fc_.layers().back();
  out.weight().mutable_value() *= 0.1;
  out.bias().mutable_value()(0, 0) = 1.0;
}

void RegistrationHead::collect(nn::ParameterSet& set, const std::string& prefix) {
  encoder_.collect(set, prefix + ".encoder");
  fc_.collect(set, prefix + ".fc");
}

nn::Var RegistrationHead::pose(const nn::Var& source, nn::Index ks, const nn::Var& target,
                               nn::Index kt, bool training) {
  check_points(source, ks, "register");
  check_points(target, kt, "register");
  if (source.rows() / ks != target.rows() / kt) {
    throw ArgumentError("register: source and target batch sizes differ");
  }
  // One encoder pass over both stacks keeps the normalization statistics shared.
  nn::Var codes;
  if (ks == kt) {
    codes = nn::segment_max(encoder_.forward(nn::concat_rows({source, target}), training), ks);
  } else {
    codes = nn::concat_rows({nn::segment_max(encoder_.forward(source, training), ks),
                             nn::segment_max(encoder_.forward(target, training), kt)});
  }
  const nn::Index batch = source.rows() / ks;
  nn::Var pair = nn::concat_cols({nn::slice_rows(codes, 0, batch), nn::slice_rows(codes, batch, batch)});
  nn::Var raw = fc_.forward(pair, training);
  return nn::concat_cols({nn::normalize_rows(nn::slice_cols(raw, 0, 4)), nn::slice_cols(raw, 4, 3)});
}

std::vector<double> classify(const Points& points, ClassifierHead& head) {
  if (points.rows() == 0) throw ArgumentError("classify: empty input");
  const nn::Mat logits = head.logits(nn::Var(nn::Mat(points)), points.rows(), false).value();
  return {logits.data(), logits.data() + logits.size()};
}

Points reconstruct_mlp(const Points& points, MlpReconstructionHead& head) {
  if (points.rows() == 0) throw ArgumentError("reconstruct_mlp: empty input");
  return head.reconstruct(nn::Var(nn::Mat(points)), points.rows(), false).value();
}

Points reconstruct_mfold(const Points& points, const MFoldConfig& cfg, MFoldHead& head) {
  cfg.validate();
  const MFoldConfig& own = head.config();
  if (cfg.patches != own.patches || cfg.code_dim != own.code_dim ||
      cfg.grid_rows != own.grid_rows || cfg.grid_cols != own.grid_cols) {
    throw ConfigError("reconstruct_mfold: configuration does not match head");
  }
  if (points.rows() == 0) throw ArgumentError("reconstruct_mfold: empty input");
  return head.reconstruct(nn::Var(nn::Mat(points)), points.rows(), false).value();
}

RigidTransform pose_from_row(const nn::Mat& row) {
  return RigidTransform(Eigen::Quaterniond(row(0, 0), row(0, 1), row(0, 2), row(0, 3)),
                        Eigen::Vector3d(row(0, 4), row(0, 5), row(0, 6)));
}

RigidTransform register_clouds(const Points& source, const Points& target,
                               RegistrationHead& head) {
  if (source.rows() == 0 || target.rows() == 0) throw ArgumentError("register: empty input");
  const nn::Mat out = head.pose(nn::Var(nn::Mat(source)), source.rows(),
                                nn::Var(nn::Mat(target)), target.rows(), false)
                          .value();
  return pose_from_row(out);
}

}  // namespace tsample
