// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/harness.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "tsample/io.hpp"
#include "tsample/losses.hpp"
#include "tsample/metrics.hpp"
#include "tsample/nn/adam.hpp"
#include "tsample/nn/ops.hpp"
#include "tsample/synthetic.hpp"

namespace tsample {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Seed offsets keep the independent random streams of one run apart.
constexpr uint64_t kTestSplitSeed = 1000003;
constexpr uint64_t kEvalPairSeed = 17;
constexpr uint64_t kPairSeed = 0x9e3779b97f4a7c15ULL;
constexpr uint64_t kHeadSeed = 0x5bd1e995ULL;

struct BatchTarget {
  std::vector<int> labels;
  nn::Mat originals;  // stacked full clouds, n rows each
  nn::Index n = 0;
  std::vector<RigidTransform> poses;
};

nn::Mat stack_points(const std::vector<const Points*>& parts) {
  nn::Index rows = 0;
  for (const Points* p : parts) rows += p->rows();
  nn::Mat out(rows, 3);
  nn::Index at = 0;
  for (const Points* p : parts) {
    out.middleRows(at, p->rows()) = *p;
    at += p->rows();
  }
  return out;
}

// `sampled` holds B items of k rows; registration stacks B sources then B
// targets.
nn::Var batch_task_loss(const RunConfig& config, TaskHead& head, const nn::Var& sampled,
                        nn::Index k, const BatchTarget& t, bool training) {
  switch (head.kind()) {
    case HeadKind::kClassification:
      return loss::cross_entropy(static_cast<ClassifierHead&>(head).logits(sampled, k, training),
                                 t.labels);
    case HeadKind::kReconstructionMlp:
    case HeadKind::kReconstructionMfold: {
      const nn::Var recon =
          head.kind() == HeadKind::kReconstructionMlp
              ? static_cast<MlpReconstructionHead&>(head).reconstruct(sampled, k, training)
              : static_cast<MFoldHead&>(head).reconstruct(sampled, k, training);
      const nn::Index batch = sampled.rows() / k;
      const nn::Index out = recon.rows() / batch;
      const nn::Var original(t.originals);
      nn::Var cd = loss::chamfer(recon, out, original, t.n);
      if (config.lambda_emd == 0.0 || out != t.n) return cd;
      return nn::add(cd, nn::scale(loss::earth_mover(recon, original, t.n), config.lambda_emd));
    }
    case HeadKind::kRegistration: {
      const nn::Index half = sampled.rows() / 2;
      return loss::pose(static_cast<RegistrationHead&>(head).pose(
                            nn::slice_rows(sampled, 0, half), k,
                            nn::slice_rows(sampled, half, half), k, training),
                        t.poses, config.translation_weight);
    }
  }
  throw ArgumentError("unknown head kind");
}

// Points fed to the network and the targets for one minibatch.
struct Minibatch {
  nn::Mat points;
  BatchTarget target;
};

Minibatch make_minibatch(const RunConfig& config, const std::vector<PointCloud>& clouds,
                         const std::vector<RegistrationPair>* pairs,
                         const std::vector<size_t>& order, size_t begin, size_t end) {
  Minibatch mb;
  std::vector<const Points*> parts;
  if (config.task == Task::kRegistration) {
    for (size_t i = begin; i < end; ++i) parts.push_back(&(*pairs)[order[i]].source.points());
    for (size_t i = begin; i < end; ++i) parts.push_back(&(*pairs)[order[i]].target.points());
    for (size_t i = begin; i < end; ++i) mb.target.poses.push_back((*pairs)[order[i]].gt);
  } else {
    for (size_t i = begin; i < end; ++i) {
      const PointCloud& c = clouds[order[i]];
      parts.push_back(&c.points());
      if (config.task == Task::kClassification) {
        if (!c.label()) throw ConfigError("classification cloud '" + c.name() + "' has no label");
        mb.target.labels.push_back(*c.label());
      }
    }
  }
  mb.points = stack_points(parts);
  if (config.task == Task::kReconstruction) {
    mb.target.originals = mb.points;
    mb.target.n = config.n;
  }
  return mb;
}

void check_loss(double value, const char* stage, int epoch, long iteration, double task,
                double subset) {
  if (std::isfinite(value)) return;
  throw DivergenceError(std::string(stage) + ": non-finite loss at epoch " +
                        std::to_string(epoch) + ", iteration " + std::to_string(iteration) +
                        " (task " + format_double(task) + ", subset " + format_double(subset) +
                        ")");
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

Points run_reconstruction(TaskHead& head, const Points& input) {
  if (head.kind() == HeadKind::kReconstructionMlp) {
    return reconstruct_mlp(input, static_cast<MlpReconstructionHead&>(head));
  }
  auto& mfold = static_cast<MFoldHead&>(head);
  return reconstruct_mfold(input, mfold.config(), mfold);
}

// Task metric over a fixed evaluation set. Clouds are the test clouds, or
// source/target pairs interleaved for registration.
class Scorer {
 public:
  Scorer(const RunConfig& config, TaskHead& head, const std::vector<PointCloud>& test)
      : config_(config), head_(head) {
    if (test.empty()) throw ArgumentError("evaluation needs at least one test cloud");
    if (config.task == Task::kRegistration) {
      pairs_ = make_pairs(test, config, config.data_seed + kEvalPairSeed, config.pairs_per_cloud);
      for (const auto& p : pairs_) {
        clouds_.push_back(p.source);
        clouds_.push_back(p.target);
      }
    } else {
      clouds_ = test;
    }
    std::vector<Points> full;
    for (const auto& c : clouds_) full.push_back(c.points());
    reference_ = score(full);
    if (config.task == Task::kRegistration) {
      std::vector<RigidTransform> identity(pairs_.size());
      std::vector<RigidTransform> gt;
      for (const auto& p : pairs_) gt.push_back(p.gt);
      reference_["mre_identity"] = mean_rotation_error(identity, gt);
    }
  }

  const std::vector<PointCloud>& clouds() const { return clouds_; }
  const std::map<std::string, double>& reference() const { return reference_; }

  std::map<std::string, double> score(const std::vector<Points>& sampled) const {
    if (sampled.size() != clouds_.size()) throw ArgumentError("scorer: wrong number of sets");
    std::map<std::string, double> out;
    switch (config_.task) {
      case Task::kClassification: {
        int correct = 0;
        auto& head = static_cast<ClassifierHead&>(head_);
        for (size_t i = 0; i < clouds_.size(); ++i) {
          if (!clouds_[i].label()) throw ConfigError("test cloud without label");
          correct += argmax(classify(sampled[i], head)) == *clouds_[i].label();
        }
        out["accuracy"] = static_cast<double>(correct) / static_cast<double>(clouds_.size());
        break;
      }
      case Task::kReconstruction: {
        double cd = 0.0;
        double emd = 0.0;
        bool has_emd = true;
        for (size_t i = 0; i < clouds_.size(); ++i) {
          const Points recon = run_reconstruction(head_, sampled[i]);
          cd += chamfer_distance(clouds_[i].points(), recon);
          if (recon.rows() == clouds_[i].points().rows()) {
            emd += earth_mover_distance(clouds_[i].points(), recon);
          } else {
            has_emd = false;
          }
        }
        const double count = static_cast<double>(clouds_.size());
        out["cd"] = cd / count;
        if (has_emd) out["emd"] = emd / count;
        if (!reference_.empty()) {
          out["nre_cd"] = ratio(out["cd"], reference_.at("cd"));
          if (has_emd) out["nre_emd"] = ratio(out["emd"], reference_.at("emd"));
        } else {
          out["nre_cd"] = 1.0;
          if (has_emd) out["nre_emd"] = 1.0;
        }
        break;
      }
      case Task::kRegistration: {
        auto& head = static_cast<RegistrationHead&>(head_);
        std::vector<RigidTransform> pred;
        std::vector<RigidTransform> gt;
        for (size_t i = 0; i < pairs_.size(); ++i) {
          pred.push_back(register_clouds(sampled[2 * i], sampled[2 * i + 1], head));
          gt.push_back(pairs_[i].gt);
        }
        out["mre"] = mean_rotation_error(pred, gt);
        break;
      }
    }
    return out;
  }

 private:
  static double ratio(double num, double den) {
    if (den == 0.0) throw DegenerateInputError("normalized error undefined: reference error is 0");
    return num / den;
  }

  const RunConfig& config_;
  TaskHead& head_;
  std::vector<RegistrationPair> pairs_;
  std::vector<PointCloud> clouds_;
  std::map<std::string, double> reference_;
};

Points rows_of(const PointCloud& cloud, const IndexList& idx) {
  return cloud.subset(idx).points();
}

double probe_sparsity(LearnedSampler& sampler, const std::vector<PointCloud>& clouds, int m,
                      double tau, double r) {
  const size_t count = std::min<size_t>(clouds.size(), 8);
  double total = 0.0;
  for (size_t i = 0; i < count; ++i) {
    const nn::Mat raw = predict_raw_rows(extract_features(clouds[i], sampler.encoder), sampler.rows);
    total += sparsify(truncate_columns(anneal_softmax(raw, tau), m), r).nonzero_fraction();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

void check_m_list(const RunConfig& config, const std::vector<int>& m_list, int m_max) {
  if (m_list.empty()) throw ArgumentError("evaluation needs at least one m");
  for (int m : m_list) {
    if (m < 1 || m > config.n) {
      throw ArgumentError("m = " + std::to_string(m) + " outside [1, n = " +
                          std::to_string(config.n) + "]");
    }
    if (m_max > 0 && m > m_max) {
      throw ArgumentError("m = " + std::to_string(m) + " exceeds the sampler width " +
                          std::to_string(m_max));
    }
  }
}

// Re-reads parameters through the float32 checkpoint representation so the
// in-memory model equals what a saved checkpoint restores.
void round_to_checkpoint(nn::ParameterSet& set, const RunConfig& config) {
  restore(set, capture(set, config));
}

}  // namespace

Dataset load_run_dataset(const RunConfig& config) {
  config.validate();
  Dataset data;
  if (config.dataset == "synthetic") {
    ToyDatasetSpec spec;
    spec.shapes = config.shapes;
    spec.n = config.n;
    spec.variation = config.variation;
    spec.per_class = config.train_per_class;
    spec.seed = config.data_seed;
    data.train = make_toy_dataset(spec);
    spec.per_class = config.test_per_class;
    spec.seed = config.data_seed + kTestSplitSeed;
    data.test = make_toy_dataset(spec);
  } else {
    data.train = load_dataset(config.dataset, Split::kTrain);
    data.test = load_dataset(config.dataset, Split::kTest);
  }
  for (const auto* split : {&data.train, &data.test}) {
    if (split->empty()) throw ConfigError("dataset '" + config.dataset + "' has an empty split");
    for (const auto& c : *split) {
      if (c.size() != config.n) {
        throw ConfigError("cloud '" + c.name() + "' has " + std::to_string(c.size()) +
                          " points, configuration expects n = " + std::to_string(config.n));
      }
      if (config.task == Task::kClassification && !c.label()) {
        throw ConfigError("classification cloud '" + c.name() + "' has no label");
      }
    }
  }
  return data;
}

int infer_num_classes(const Dataset& data) {
  int top = -1;
  for (const auto* split : {&data.train, &data.test}) {
    for (const auto& c : *split) top = std::max(top, c.label().value_or(-1));
  }
  return std::max(2, top + 1);
}

std::unique_ptr<TaskHead> make_head(const RunConfig& config, uint64_t seed) {
  std::mt19937_64 rng(seed ^ kHeadSeed);
  switch (config.head) {
    case HeadKind::kClassification:
      return std::make_unique<ClassifierHead>(config.num_classes(), config.head_point_widths,
                                              config.head_fc_widths, rng);
    case HeadKind::kReconstructionMlp:
      return std::make_unique<MlpReconstructionHead>(config.n, config.head_point_widths,
                                                     config.head_fc_widths, rng);
    case HeadKind::kReconstructionMfold:
      return std::make_unique<MFoldHead>(config.mfold, config.head_point_widths, rng);
    case HeadKind::kRegistration:
      return std::make_unique<RegistrationHead>(config.head_point_widths, config.head_fc_widths,
                                                rng);
  }
  throw ConfigError("unknown head kind");
}

LearnedSampler make_sampler(const RunConfig& config, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return LearnedSampler(config.encoder_widths, config.sampler_hidden, config.sampler_width(), rng);
}

std::vector<RegistrationPair> make_pairs(const std::vector<PointCloud>& clouds,
                                         const RunConfig& config, uint64_t seed,
                                         int pairs_per_cloud) {
  std::mt19937_64 rng(seed ^ kPairSeed);
  std::vector<RegistrationPair> pairs;
  for (const auto& c : clouds) {
    for (int k = 0; k < pairs_per_cloud; ++k) {
      const RigidTransform t = random_rigid_transform(rng, config.max_angle_deg, config.max_translation);
      pairs.push_back({c, PointCloud(t.apply(c.points()), c.label(), c.name() + "/moved"), t});
    }
  }
  return pairs;
}

PretrainResult pretrain_head(const RunConfig& config, const Dataset& data) {
  config.validate();
  PretrainResult result;
  result.head = make_head(config, config.seed);
  result.head->frozen = false;
  nn::ParameterSet params = result.head->parameters();
  nn::Adam adam(params.trainable());
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto start = Clock::now();
  long iteration = 0;
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    const double lr = learning_rate(config.pretrain_lr_start, config.pretrain_lr_end, epoch,
                                    config.pretrain_epochs);
    std::vector<RegistrationPair> pairs;
    if (config.task == Task::kRegistration) {
      pairs = make_pairs(data.train, config, config.seed + static_cast<uint64_t>(epoch), 1);
    }
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(config.batch_size)) {
      const size_t e = std::min(order.size(), b + static_cast<size_t>(config.batch_size));
      const Minibatch mb = make_minibatch(config, data.train, &pairs, order, b, e);
      nn::Var loss = batch_task_loss(config, *result.head, nn::Var(mb.points), config.n,
                                     mb.target, true);
      check_loss(loss.item(), "pretrain", epoch, iteration, loss.item(), 0.0);
      adam.zero_grad();
      loss.backward();
      adam.step(lr);
      loss_sum += loss.item();
      ++batches;
      ++iteration;
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = log.task_loss = loss_sum / batches;
    log.lr = lr;
    result.report.epochs.push_back(log);
    spdlog::debug("pretrain epoch {} loss {:.6f} lr {:.3g}", epoch, log.loss, lr);
  }
  result.report.timings["train"] = seconds_since(start);
  result.head->frozen = true;
  round_to_checkpoint(params, config);
  result.report.task = to_string(config.task);
  result.report.sparsity_threshold = config.sparsify_threshold;
  const auto eval_start = Clock::now();
  result.report.reference = reference_metrics(config, *result.head, data.test);
  result.report.timings["evaluate"] = seconds_since(eval_start);
  return result;
}

TrainResult train(const RunConfig& config, const Dataset& data, std::unique_ptr<TaskHead> head) {
  config.validate();
  if (!head) {
    if (!config.joint_training) {
      throw ConfigError("training a sampler needs a pretrained head (or joint training)");
    }
    head = make_head(config, config.seed);
  }
  TrainResult result;
  result.head = std::move(head);
  TaskHead& task_head = *result.head;
  task_head.frozen = !config.joint_training;
  result.sampler = make_sampler(config, config.seed);
  nn::ParameterSet params;
  result.sampler.collect(params, "sampler");
  if (config.joint_training) task_head.collect(params, "head");
  result.head_checksum_before = task_head.parameters().checksum();

  nn::Adam adam(params.trainable());
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t batch = static_cast<size_t>(config.batch_size);
  const long per_epoch = static_cast<long>((order.size() + batch - 1) / batch);
  const TemperatureSchedule schedule{1.0, config.tau_min, config.anneal_fraction,
                                     per_epoch * config.epochs};
  std::uniform_int_distribution<size_t> pick_m(0, config.m_set.empty() ? 0 : config.m_set.size() - 1);
  const LossWeights weights{config.alpha};
  weights.validate();

  const auto start = Clock::now();
  long iteration = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate(config.lr_start, config.lr_end, epoch, config.epochs);
    std::vector<RegistrationPair> pairs;
    if (config.task == Task::kRegistration) {
      pairs = make_pairs(data.train, config, config.seed + static_cast<uint64_t>(epoch), 1);
    }
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    double task_sum = 0.0;
    double subset_sum = 0.0;
    double tau = schedule.at(iteration);
    for (size_t b = 0; b < order.size(); b += batch) {
      const size_t e = std::min(order.size(), b + batch);
      const Minibatch mb = make_minibatch(config, data.train, &pairs, order, b, e);
      tau = schedule.at(iteration);
      const int m = config.flexible ? config.m_set[pick_m(rng)] : config.m;
      const nn::Var q = result.sampler.sample(nn::Var(mb.points), config.n, m, tau, true);
      const nn::Var task = batch_task_loss(config, task_head, q, m, mb.target, config.joint_training);
      const nn::Var subset = loss::subset(mb.points, config.n, q, m);
      const nn::Var total = weights.alpha == 0.0 ? task : nn::add(task, nn::scale(subset, weights.alpha));
      check_loss(total.item(), "train", epoch, iteration, task.item(), subset.item());
      adam.zero_grad();
      nn::Var(total).backward();
      adam.step(lr);
      loss_sum += total.item();
      task_sum += task.item();
      subset_sum += subset.item();
      ++iteration;
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = loss_sum / per_epoch;
    log.task_loss = task_sum / per_epoch;
    log.subset_loss = subset_sum / per_epoch;
    log.tau = tau;
    log.lr = lr;
    log.sparsity = probe_sparsity(result.sampler, data.train, config.m, tau, config.sparsify_threshold);
    result.report.epochs.push_back(log);
    spdlog::debug("train epoch {} loss {:.6f} task {:.6f} subset {:.6f} tau {:.3f} nonzero {:.4f}",
                  epoch, log.loss, log.task_loss, log.subset_loss, tau, log.sparsity);
  }
  result.report.timings["train"] = seconds_since(start);
  round_to_checkpoint(params, config);
  result.head_checksum_after = task_head.parameters().checksum();
  task_head.frozen = true;
  result.report.task = to_string(config.task);
  result.report.sparsity_threshold = config.sparsify_threshold;
  result.report.sparsity_fraction = result.report.epochs.back().sparsity;
  return result;
}

std::map<std::string, double> reference_metrics(const RunConfig& config, TaskHead& head,
                                                const std::vector<PointCloud>& test) {
  return Scorer(config, head, test).reference();
}

RunReport evaluate(const RunConfig& config, LearnedSampler& sampler, TaskHead& head,
                   const std::vector<PointCloud>& test, const std::vector<int>& m_list) {
  check_m_list(config, m_list, sampler.m_max());
  const Scorer scorer(config, head, test);
  RunReport report;
  report.task = to_string(config.task);
  report.sparsity_threshold = config.sparsify_threshold;
  report.reference = scorer.reference();
  double sampling_time = 0.0;
  double head_time = 0.0;
  for (size_t mi = 0; mi < m_list.size(); ++mi) {
    const int m = m_list[mi];
    std::vector<Points> generated;
    std::vector<Points> matched;
    std::vector<Points> completed;
    double nonzero = 0.0;
    double orth = 0.0;
    const auto t0 = Clock::now();
    for (const auto& cloud : scorer.clouds()) {
      SamplingMatrix dense;
      const DownsampleResult r =
          downsample(cloud, sampler, m, config.tau_min, config.sparsify_threshold, &dense);
      generated.push_back(r.generated);
      matched.push_back(rows_of(cloud, r.matched));
      completed.push_back(rows_of(cloud, r.completed));
      nonzero += sparsify(dense, config.sparsify_threshold).nonzero_fraction();
      orth += orthogonality_error(dense);
    }
    sampling_time += seconds_since(t0);
    const double count = static_cast<double>(scorer.clouds().size());
    const std::string tag = ".m" + std::to_string(m);
    report.extras["nonzero_fraction" + tag] = nonzero / count;
    report.extras["orthogonality" + tag] = orth / count;
    if (mi == 0) {
      report.sparsity_fraction = nonzero / count;
      report.orthogonality_error = orth / count;
    }
    const auto t1 = Clock::now();
    report.cells.push_back({m, "G", 0.0, scorer.score(generated)});
    report.cells.push_back({m, "M", 0.0, scorer.score(matched)});
    report.cells.push_back({m, "C", 0.0, scorer.score(completed)});
    head_time += seconds_since(t1);
  }
  report.timings["sampling"] = sampling_time;
  report.timings["head"] = head_time;
  return report;
}

RunReport evaluate_baseline(const RunConfig& config, TaskHead& head,
                            const std::vector<PointCloud>& test, SamplerKind kind,
                            const std::vector<int>& m_list, uint64_t seed) {
  check_m_list(config, m_list, 0);
  const Scorer scorer(config, head, test);
  RunReport report;
  report.task = to_string(config.task);
  report.sparsity_threshold = config.sparsify_threshold;
  report.reference = scorer.reference();
  double sampling_time = 0.0;
  for (int m : m_list) {
    std::vector<Points> sets;
    const auto t0 = Clock::now();
    for (size_t i = 0; i < scorer.clouds().size(); ++i) {
      const PointCloud& cloud = scorer.clouds()[i];
      const SamplerSpec spec{kind, m, seed + i, std::nullopt};
      sets.push_back(rows_of(cloud, apply_sampler(cloud, spec)));
    }
    sampling_time += seconds_since(t0);
    report.cells.push_back({m, to_string(kind), 0.0, scorer.score(sets)});
  }
  report.timings["sampling"] = sampling_time;
  return report;
}

RunReport robustness(const RunConfig& config, LearnedSampler& sampler, TaskHead& head,
                     const std::vector<PointCloud>& test, const std::vector<double>& levels,
                     const std::vector<uint64_t>& seeds) {
  if (levels.empty() || seeds.empty()) throw ArgumentError("robustness needs levels and seeds");
  check_m_list(config, {config.m}, sampler.m_max());
  const Scorer scorer(config, head, test);
  RunReport report;
  report.task = to_string(config.task);
  report.sparsity_threshold = config.sparsify_threshold;
  report.reference = scorer.reference();
  for (double level : levels) {
    std::map<std::string, double> g_sum;
    std::map<std::string, double> c_sum;
    // Noise-free rows do not depend on the seed; one pass keeps them exact.
    const size_t passes = level == 0.0 ? 1 : seeds.size();
    for (size_t s = 0; s < passes; ++s) {
      std::vector<Points> generated;
      std::vector<Points> completed;
      for (size_t i = 0; i < scorer.clouds().size(); ++i) {
        const PointCloud noisy =
            add_gaussian_noise(scorer.clouds()[i], level, seeds[s] * 1000003ULL + i);
        const DownsampleResult r =
            downsample(noisy, sampler, config.m, config.tau_min, config.sparsify_threshold);
        generated.push_back(r.generated);
        completed.push_back(rows_of(noisy, r.completed));
      }
      for (const auto& [k, v] : scorer.score(generated)) g_sum[k] += v;
      for (const auto& [k, v] : scorer.score(completed)) c_sum[k] += v;
    }
    for (auto* sums : {&g_sum, &c_sum}) {
      for (auto& [k, v] : *sums) v /= static_cast<double>(passes);
    }
    report.cells.push_back({config.m, "G", level, g_sum});
    report.cells.push_back({config.m, "C", level, c_sum});
  }
  std::vector<Points> random_sets;
  for (size_t i = 0; i < scorer.clouds().size(); ++i) {
    const PointCloud& cloud = scorer.clouds()[i];
    random_sets.push_back(rows_of(cloud, random_sample(cloud, config.m, config.seed + i)));
  }
  report.cells.push_back({config.m, to_string(SamplerKind::kRandom), 0.0, scorer.score(random_sets)});
  return report;
}

RunReport bench(const RunConfig& config, const BenchOptions& options) {
  if (options.m_grid.empty() || options.clouds < 1 || options.repeats < 1) {
    throw ArgumentError("bench needs an m grid, clouds >= 1 and repeats >= 1");
  }
  for (int m : options.m_grid) {
    if (m < 1 || m > options.n) throw ArgumentError("bench: m outside [1, n]");
  }
  std::vector<PointCloud> clouds;
  for (int i = 0; i < options.clouds; ++i) {
    clouds.push_back(make_synthetic(static_cast<Shape>(i % kNumShapes), options.n,
                                    options.seed + static_cast<uint64_t>(i)));
  }
  RunReport report;
  report.task = to_string(config.task);
  report.sparsity_threshold = config.sparsify_threshold;
  // Minimum over repeats of the per-shape mean.
  const auto time_per_shape = [&](const auto& fn) {
    double best = 0.0;
    for (int r = 0; r < options.repeats; ++r) {
      const auto t0 = Clock::now();
      for (const auto& c : clouds) fn(c);
      const double t = seconds_since(t0) / static_cast<double>(clouds.size());
      best = r == 0 ? t : std::min(best, t);
    }
    return best;
  };
  size_t sink = 0;
  for (int m : options.m_grid) {
    RunConfig cfg = config;
    cfg.n = options.n;
    cfg.m = m;
    cfg.flexible = false;
    LearnedSampler sampler = make_sampler(cfg, options.seed);
    extract_features(clouds.front(), sampler.encoder);  // warm-up
    const double rs = time_per_shape([&](const PointCloud& c) {
      sink += random_sample(c, m, options.seed).size();
    });
    const double fps = time_per_shape([&](const PointCloud& c) { sink += fps_sample(c, m).size(); });
    const double learned = time_per_shape([&](const PointCloud& c) {
      const nn::Mat raw = predict_raw_rows(extract_features(c, sampler.encoder), sampler.rows);
      const Points q = sparse_apply(c, sparsify(anneal_softmax(raw, cfg.tau_min),
                                                cfg.sparsify_threshold));
      sink += static_cast<size_t>(q.rows());
    });
    report.cells.push_back({m, to_string(SamplerKind::kRandom), 0.0, {{"seconds", rs}}});
    report.cells.push_back({m, to_string(SamplerKind::kFps), 0.0, {{"seconds", fps}}});
    report.cells.push_back({m, "learned", 0.0, {{"seconds", learned}}});
  }
  const int m_lo = *std::min_element(options.m_grid.begin(), options.m_grid.end());
  const int m_hi = *std::max_element(options.m_grid.begin(), options.m_grid.end());
  for (const char* set : {"random", "fps", "learned"}) {
    report.extras[std::string("ratio.") + set] =
        report.cell(m_hi, set).values.at("seconds") / report.cell(m_lo, set).values.at("seconds");
  }

  // Per-stage breakdown at the largest m.
  RunConfig cfg = config;
  cfg.n = options.n;
  cfg.m = m_hi;
  cfg.flexible = false;
  LearnedSampler sampler = make_sampler(cfg, options.seed);
  auto head = make_head(cfg, options.seed);
  double t_features = 0.0;
  double t_matrix = 0.0;
  double t_regress = 0.0;
  double t_head = 0.0;
  for (int r = 0; r < options.repeats; ++r) {
    for (const auto& c : clouds) {
      auto t0 = Clock::now();
      const FeatureMap f = extract_features(c, sampler.encoder);
      t_features += seconds_since(t0);
      t0 = Clock::now();
      const SamplingMatrix s = anneal_softmax(predict_raw_rows(f, sampler.rows), cfg.tau_min);
      t_matrix += seconds_since(t0);
      t0 = Clock::now();
      const Points q = sparse_apply(c, sparsify(s, cfg.sparsify_threshold));
      t_regress += seconds_since(t0);
      t0 = Clock::now();
      switch (head->kind()) {
        case HeadKind::kClassification:
          sink += classify(q, static_cast<ClassifierHead&>(*head)).size();
          break;
        case HeadKind::kReconstructionMlp:
        case HeadKind::kReconstructionMfold:
          sink += static_cast<size_t>(run_reconstruction(*head, q).rows());
          break;
        case HeadKind::kRegistration:
          sink += static_cast<size_t>(
              register_clouds(q, q, static_cast<RegistrationHead&>(*head)).translation.size());
          break;
      }
      t_head += seconds_since(t0);
    }
  }
  const double calls = static_cast<double>(options.repeats) * static_cast<double>(clouds.size());
  report.timings["feature_extraction"] = t_features / calls;
  report.timings["sampling_matrix"] = t_matrix / calls;
  report.timings["regression"] = t_regress / calls;
  report.timings["head"] = t_head / calls;
  report.extras["stage_m"] = m_hi;
  report.extras["n"] = options.n;
  if (sink == 0) spdlog::trace("bench produced no output");
  return report;
}

const char* to_string(SweepParam p) {
  return p == SweepParam::kAlpha ? "alpha" : "tau_min";
}

SweepParam parse_sweep_param(const std::string& text) {
  if (text == "alpha") return SweepParam::kAlpha;
  if (text == "tau_min") return SweepParam::kTauMin;
  throw ConfigError("unknown sweep parameter '" + text + "' (alpha, tau_min)");
}

RunReport sweep(const RunConfig& config, const Dataset& data, const Checkpoint& head_ck,
                SweepParam param, const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("sweep needs at least one value");
  RunReport report;
  report.task = to_string(config.task);
  report.sparsity_threshold = config.sparsify_threshold;
  for (size_t i = 0; i < values.size(); ++i) {
    RunConfig cfg = config;
    (param == SweepParam::kAlpha ? cfg.alpha : cfg.tau_min) = values[i];
    cfg.flexible = false;
    TrainResult run = train(cfg, data, load_head(head_ck, cfg));
    const RunReport ev = evaluate(cfg, run.sampler, *run.head, data.test, {cfg.m});
    MetricCell cell = ev.cell(cfg.m, "G");
    cell.set = std::string(to_string(param)) + "=" + format_double(values[i]);
    report.cells.push_back(cell);
    report.extras[std::string(to_string(param)) + "." + std::to_string(i)] = values[i];
    report.timings["train." + std::to_string(i)] = run.report.timings.at("train");
    if (i == 0) report.reference = ev.reference;
  }
  return report;
}

Checkpoint head_checkpoint(TaskHead& head, const RunConfig& config) {
  return capture(head.parameters("head"), config);
}

Checkpoint sampler_checkpoint(LearnedSampler& sampler, TaskHead* joint_head,
                              const RunConfig& config) {
  nn::ParameterSet set;
  sampler.collect(set, "sampler");
  if (joint_head) joint_head->collect(set, "head");
  return capture(set, config);
}

std::unique_ptr<TaskHead> load_head(const Checkpoint& checkpoint, const RunConfig& config) {
  auto head = make_head(config, 0);
  nn::ParameterSet set = head->parameters("head");
  restore(set, checkpoint);
  head->frozen = true;
  return head;
}

LearnedSampler load_sampler(const Checkpoint& checkpoint, const RunConfig& config) {
  LearnedSampler sampler = make_sampler(config, 0);
  nn::ParameterSet set;
  sampler.collect(set, "sampler");
  restore(set, checkpoint);
  return sampler;
}

}  // namespace tsample
