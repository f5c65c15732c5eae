// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 2 configuration or argument
// error, 3 training divergence, 1 anything else.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tsample/alloc_tuning.hpp"
#include "tsample/harness.hpp"
#include "tsample/io.hpp"

namespace fs = std::filesystem;
using namespace tsample;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

// Options shared by every subcommand that builds a RunConfig.
struct ConfigFlags {
  std::string config_path;
  std::string preset = "paper";
  std::string task;
  std::vector<std::string> sets;
  std::optional<std::string> dataset;
  std::optional<int> n;
  std::optional<int> m;
  std::optional<int> m_max;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> alpha;
  std::optional<double> tau_min;
  std::optional<double> lr_start;
  std::optional<double> lr_end;
  std::optional<double> threshold;
  std::optional<double> noise_level;
  std::vector<int> m_list;
  bool flexible = false;
  bool joint = false;
  std::string head_checkpoint;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config", f.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--preset", f.preset, "Defaults when no --config is given")
      ->check(CLI::IsMember({"paper", "toy"}));
  app->add_option("--task", f.task, "classification | reconstruction | registration");
  app->add_option("--set", f.sets, "Override any field: section.key=value");
  app->add_option("--dataset", f.dataset, "'synthetic' or a dataset root directory");
  app->add_option("--n", f.n, "Points per cloud");
  app->add_option("--m", f.m, "Sampled size");
  app->add_option("--m-max", f.m_max, "Sampler width for the flexible variant");
  app->add_option("--epochs", f.epochs);
  app->add_option("--batch-size", f.batch_size);
  app->add_option("--alpha", f.alpha, "Subset-loss weight");
  app->add_option("--tau-min", f.tau_min);
  app->add_option("--lr-start", f.lr_start);
  app->add_option("--lr-end", f.lr_end);
  app->add_option("--threshold", f.threshold, "Sparsify threshold r");
  app->add_option("--noise-level", f.noise_level);
  app->add_option("--m-list", f.m_list, "Evaluation sizes")->delimiter(',');
  app->add_flag("--flexible", f.flexible, "Train one sampler for every m in m_set");
  app->add_flag("--joint", f.joint, "Train the head together with the sampler");
  app->add_option("--head-checkpoint", f.head_checkpoint, "Pretrained head");
}

RunConfig build_config(const ConfigFlags& f, uint64_t seed) {
  RunConfig c;
  if (!f.config_path.empty()) {
    c = load_config(f.config_path);
    if (!f.task.empty() && parse_task(f.task) != c.task) {
      throw ConfigError("--task disagrees with the configuration file");
    }
  } else {
    const Task task = f.task.empty() ? Task::kClassification : parse_task(f.task);
    c = f.preset == "toy" ? toy_config(task) : default_config(task);
  }
  for (const auto& s : f.sets) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      throw ConfigError("--set expects section.key=value, got '" + s + "'");
    }
    c = config_from_ini("[" + s.substr(0, dot) + "]\n" + s.substr(dot + 1) + "\n", c);
  }
  if (f.dataset) c.dataset = *f.dataset;
  if (f.n) c.n = *f.n;
  if (f.m) {
    c.m = *f.m;
    c.eval_m = {c.m};  // --m-list below still wins
  }
  if (f.m_max) c.m_max = *f.m_max;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.tau_min) c.tau_min = *f.tau_min;
  if (f.lr_start) c.lr_start = *f.lr_start;
  if (f.lr_end) c.lr_end = *f.lr_end;
  if (f.threshold) c.sparsify_threshold = *f.threshold;
  if (f.noise_level) c.noise_level = *f.noise_level;
  if (!f.m_list.empty()) c.eval_m = f.m_list;
  if (f.flexible) c.flexible = true;
  if (f.joint) c.joint_training = true;
  if (!f.head_checkpoint.empty()) c.head_checkpoint = f.head_checkpoint;
  c.seed = seed;
  c.validate();
  return c;
}

// The class count is fixed by the data; it must be in the snapshot.
RunConfig with_classes(RunConfig c, const Dataset& data) {
  if (c.task == Task::kClassification && c.dataset != "synthetic") c.classes = infer_num_classes(data);
  return c;
}

std::unique_ptr<TaskHead> head_for(const RunConfig& config, const Checkpoint* sampler_ck) {
  if (config.joint_training && sampler_ck) return load_head(*sampler_ck, config);
  if (config.head_checkpoint.empty()) throw ConfigError("no head checkpoint recorded; pass --head-checkpoint");
  return load_head(read_checkpoint(config.head_checkpoint), config);
}

void write_model(const fs::path& path, const Checkpoint& ck) {
  fs::create_directories(path.parent_path());
  write_checkpoint(path, ck);
  spdlog::info("wrote {}", path.string());
}

void print_cells(const RunReport& r) {
  for (const auto& c : r.cells) {
    std::cout << "m=" << c.m << " set=" << c.set;
    if (c.noise != 0.0) std::cout << " noise=" << format_double(c.noise);
    for (const auto& [k, v] : c.values) std::cout << ' ' << k << '=' << format_double(v);
    std::cout << '\n';
  }
}

PointCloud read_cloud(const fs::path& p) {
  return p.extension() == ".pcv" ? read_pcv(p) : read_xyz(p);
}

void write_cloud(const fs::path& p, const PointCloud& c) {
  if (p.extension() == ".pcv") {
    write_pcv(p, c);
  } else {
    write_xyz(p, c);
  }
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Task-oriented learned point cloud downsampling"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Per-epoch logging");

  uint64_t seed = 0;
  std::string out;
  const auto add_run = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed")->required();
    sub->add_option("--out", out, "Output directory")->required();
  };

  ConfigFlags pre_flags;
  auto* pretrain = app.add_subcommand("pretrain", "Train a task head on full clouds");
  add_config_flags(pretrain, pre_flags);
  add_run(pretrain);

  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a sampler against a head");
  add_config_flags(train_cmd, train_flags);
  add_run(train_cmd);

  std::string checkpoint;
  std::string eval_head;
  std::vector<int> eval_m;
  bool baselines = false;
  auto* eval = app.add_subcommand("eval", "Evaluate a sampler checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Sampler checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--head-checkpoint", eval_head, "Override the recorded head");
  eval->add_option("--m-list", eval_m, "Evaluation sizes")->delimiter(',');
  eval->add_flag("--baselines", baselines, "Also evaluate RS, FPS and voxel sampling");
  add_run(eval);

  std::string input;
  std::string output;
  std::string generated_out;
  std::string matrix_out;
  std::string method = "learned";
  int sample_m = 0;
  uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "Downsample one cloud");
  sample->add_option("--input", input, ".xyz or .pcv cloud")->required()->check(CLI::ExistingFile);
  sample->add_option("--output", output, "Sampled subset (completed set)")->required();
  sample->add_option("--m", sample_m, "Sampled size")->required();
  sample->add_option("--method", method)->check(CLI::IsMember({"learned", "random", "voxel", "fps"}));
  sample->add_option("--checkpoint", checkpoint, "Sampler checkpoint (learned method)");
  sample->add_option("--generated", generated_out, "Also write the generated set");
  sample->add_option("--export-matrix", matrix_out, "Write the sparse sampling matrix");
  sample->add_option("--seed", sample_seed, "Seed for random and voxel sampling");

  ConfigFlags bench_flags;
  BenchOptions bench_opts;
  auto* bench_cmd = app.add_subcommand("bench", "Time RS, FPS and the learned sampler");
  add_config_flags(bench_cmd, bench_flags);
  bench_cmd->add_option("--points", bench_opts.n, "Points per benchmark cloud");
  bench_cmd->add_option("--grid", bench_opts.m_grid, "Sampled sizes")->delimiter(',');
  bench_cmd->add_option("--clouds", bench_opts.clouds);
  bench_cmd->add_option("--repeats", bench_opts.repeats);
  add_run(bench_cmd);

  std::vector<double> levels;
  std::vector<uint64_t> noise_seeds;
  auto* robust = app.add_subcommand("robustness", "Task metric under input noise");
  robust->add_option("--checkpoint", checkpoint, "Sampler checkpoint")->required()->check(CLI::ExistingFile);
  robust->add_option("--head-checkpoint", eval_head, "Override the recorded head");
  robust->add_option("--levels", levels, "Noise levels (fraction of per-axis std)")->delimiter(',');
  robust->add_option("--noise-seeds", noise_seeds)->delimiter(',');
  add_run(robust);

  ConfigFlags sweep_flags;
  std::string sweep_param = "alpha";
  std::vector<double> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Retrain across alpha or tau_min values");
  add_config_flags(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--param", sweep_param)->check(CLI::IsMember({"alpha", "tau_min"}));
  sweep_cmd->add_option("--values", sweep_values)->required()->delimiter(',');
  add_run(sweep_cmd);

  ConfigFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Write the synthetic dataset as .xyz files");
  add_config_flags(synth, synth_flags);
  add_run(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    const fs::path out_dir(out);
    if (*pretrain) {
      RunConfig config = build_config(pre_flags, seed);
      const Dataset data = load_run_dataset(config);
      config = with_classes(config, data);
      PretrainResult r = pretrain_head(config, data);
      const fs::path path = out_dir / "head.ckpt";
      write_model(path, head_checkpoint(*r.head, config));
      save_report(out_dir, "pretrain", r.report);
      for (const auto& [k, v] : r.report.reference) std::cout << k << '=' << format_double(v) << '\n';
    } else if (*train_cmd) {
      RunConfig config = build_config(train_flags, seed);
      const Dataset data = load_run_dataset(config);
      config = with_classes(config, data);
      std::unique_ptr<TaskHead> head;
      if (!config.head_checkpoint.empty()) {
        head = load_head(read_checkpoint(config.head_checkpoint), config);
      } else if (!config.joint_training) {
        throw ConfigError("train needs --head-checkpoint unless --joint is given");
      }
      TrainResult r = train(config, data, std::move(head));
      write_model(out_dir / "sampler.ckpt",
                  sampler_checkpoint(r.sampler, config.joint_training ? r.head.get() : nullptr, config));
      save_report(out_dir, "train", r.report);
      const std::vector<int> m_list =
          config.flexible ? config.m_set : config.eval_m;
      const RunReport ev = evaluate(config, r.sampler, *r.head, data.test, m_list);
      save_report(out_dir, "eval", ev);
      print_cells(ev);
    } else if (*eval) {
      const Checkpoint ck = read_checkpoint(checkpoint);
      RunConfig config = ck.config();
      config.seed = seed;
      if (!eval_head.empty()) config.head_checkpoint = eval_head;
      const Dataset data = load_run_dataset(config);
      LearnedSampler sampler = load_sampler(ck, config);
      auto head = head_for(config, &ck);
      const std::vector<int> m_list = !eval_m.empty() ? eval_m
                                      : config.flexible ? config.m_set
                                                        : config.eval_m;
      const RunReport ev = evaluate(config, sampler, *head, data.test, m_list);
      save_report(out_dir, "eval", ev);
      print_cells(ev);
      if (baselines) {
        for (SamplerKind k : {SamplerKind::kRandom, SamplerKind::kFps, SamplerKind::kVoxel}) {
          const RunReport b = evaluate_baseline(config, *head, data.test, k, m_list, seed);
          save_report(out_dir, std::string("baseline_") + to_string(k), b);
          print_cells(b);
        }
      }
    } else if (*sample) {
      const PointCloud cloud = read_cloud(input);
      PointCloud result = cloud;
      if (method == "learned") {
        if (checkpoint.empty()) throw ConfigError("--method learned needs --checkpoint");
        const Checkpoint ck = read_checkpoint(checkpoint);
        const RunConfig config = ck.config();
        LearnedSampler sampler = load_sampler(ck, config);
        SamplingMatrix dense;
        const DownsampleResult r =
            downsample(cloud, sampler, sample_m, config.tau_min, config.sparsify_threshold, &dense);
        result = cloud.subset(r.completed);
        if (!generated_out.empty()) write_cloud(generated_out, PointCloud(r.generated, cloud.label()));
        if (!matrix_out.empty()) {
          write_sparse_matrix(matrix_out, sparsify(dense, config.sparsify_threshold));
        }
      } else {
        if (!matrix_out.empty() || !generated_out.empty()) {
          throw ConfigError("--export-matrix and --generated need the learned method");
        }
        const SamplerSpec spec{parse_sampler_kind(method), sample_m, sample_seed, std::nullopt};
        result = cloud.subset(apply_sampler(cloud, spec));
      }
      write_cloud(output, result);
    } else if (*bench_cmd) {
      const RunConfig config = build_config(bench_flags, seed);
      bench_opts.seed = seed;
      const RunReport r = bench(config, bench_opts);
      save_report(out_dir, "bench", r);
      print_cells(r);
      for (const auto& [k, v] : r.timings) std::cout << "stage " << k << '=' << format_double(v) << '\n';
      for (const auto& [k, v] : r.extras) std::cout << k << '=' << format_double(v) << '\n';
    } else if (*robust) {
      const Checkpoint ck = read_checkpoint(checkpoint);
      RunConfig config = ck.config();
      config.seed = seed;
      if (!eval_head.empty()) config.head_checkpoint = eval_head;
      const Dataset data = load_run_dataset(config);
      LearnedSampler sampler = load_sampler(ck, config);
      auto head = head_for(config, &ck);
      const RunReport r = robustness(config, sampler, *head, data.test,
                                     levels.empty() ? config.noise_levels : levels,
                                     noise_seeds.empty() ? config.noise_seeds : noise_seeds);
      save_report(out_dir, "robustness", r);
      print_cells(r);
    } else if (*sweep_cmd) {
      RunConfig config = build_config(sweep_flags, seed);
      if (config.head_checkpoint.empty()) throw ConfigError("sweep needs --head-checkpoint");
      const Dataset data = load_run_dataset(config);
      config = with_classes(config, data);
      const RunReport r = sweep(config, data, read_checkpoint(config.head_checkpoint),
                                parse_sweep_param(sweep_param), sweep_values);
      save_report(out_dir, "sweep", r);
      print_cells(r);
    } else if (*synth) {
      const RunConfig config = build_config(synth_flags, seed);
      const Dataset data = load_run_dataset(config);
      std::vector<std::string> names;
      for (Shape s : config.shapes) names.push_back(to_string(s));
      save_dataset(out_dir, Split::kTrain, data.train, names);
      save_dataset(out_dir, Split::kTest, data.test, names);
      save_config(out_dir / "config.ini", config);
    }
  } catch (const DivergenceError& e) {
    spdlog::error("{}", e.what());
    return kExitDivergence;
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    spdlog::error("argument error: {}", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
