// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace tsample {
namespace pt = boost::property_tree;

const char* to_string(Task task) {
  switch (task) {
    case Task::kClassification: return "classification";
    case Task::kReconstruction: return "reconstruction";
    case Task::kRegistration: return "registration";
  }
  return "unknown";
}

Task parse_task(const std::string& text) {
  for (Task t : {Task::kClassification, Task::kReconstruction, Task::kRegistration}) {
    if (text == to_string(t)) return t;
  }
  throw ConfigError("unknown task '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double_strict(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(what + ": expected a number, got '" + text + "'");
  }
  return v;
}

namespace {

template <typename T>
T parse_integer(const std::string& text, const std::string& what) {
  T v{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(what + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(what + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty list element in '" + text + "'");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

std::string int_str(long long v) { return std::to_string(v); }

// One entry per serialized field: writer and reader keyed by "section.key".
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> write;
  std::function<void(RunConfig&, const std::string&, const std::string&)> read;
};

template <typename M>
Field int_field(std::string s, std::string k, M RunConfig::*mem) {
  return {s, k, [mem](const RunConfig& c) { return std::to_string(c.*mem); },
          [mem](RunConfig& c, const std::string& v, const std::string& what) {
            c.*mem = parse_integer<M>(v, what);
          }};
}

Field real_field(std::string s, std::string k, double RunConfig::*mem) {
  return {s, k, [mem](const RunConfig& c) { return format_double(c.*mem); },
          [mem](RunConfig& c, const std::string& v, const std::string& what) {
            c.*mem = parse_double_strict(v, what);
          }};
}

Field bool_field(std::string s, std::string k, bool RunConfig::*mem) {
  return {s, k, [mem](const RunConfig& c) { return std::string(c.*mem ? "true" : "false"); },
          [mem](RunConfig& c, const std::string& v, const std::string& what) {
            c.*mem = parse_bool(v, what);
          }};
}

Field int_list_field(std::string s, std::string k, std::vector<int> RunConfig::*mem) {
  return {s, k, [mem](const RunConfig& c) { return join(c.*mem, [](int x) { return int_str(x); }); },
          [mem](RunConfig& c, const std::string& v, const std::string& what) {
            std::vector<int> out;
            for (const auto& t : split_list(v)) out.push_back(parse_integer<int>(t, what));
            c.*mem = std::move(out);
          }};
}

Field mfold_field(std::string k, int MFoldConfig::*mem) {
  return {"head", k, [mem](const RunConfig& c) { return int_str(c.mfold.*mem); },
          [mem](RunConfig& c, const std::string& v, const std::string& what) {
            c.mfold.*mem = parse_integer<int>(v, what);
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back({"run", "task", [](const RunConfig& c) { return std::string(to_string(c.task)); },
                 [](RunConfig& c, const std::string& v, const std::string&) { c.task = parse_task(v); }});
    f.push_back(int_field("run", "seed", &RunConfig::seed));
    f.push_back({"run", "dataset", [](const RunConfig& c) { return c.dataset; },
                 [](RunConfig& c, const std::string& v, const std::string&) { c.dataset = v; }});
    f.push_back({"run", "head_checkpoint", [](const RunConfig& c) { return c.head_checkpoint; },
                 [](RunConfig& c, const std::string& v, const std::string&) { c.head_checkpoint = v; }});

    f.push_back({"data", "shapes",
                 [](const RunConfig& c) {
                   return join(c.shapes, [](Shape s) { return std::string(to_string(s)); });
                 },
                 [](RunConfig& c, const std::string& v, const std::string&) {
                   std::vector<Shape> out;
                   for (const auto& t : split_list(v)) out.push_back(parse_shape(t));
                   c.shapes = std::move(out);
                 }});
    f.push_back(int_field("data", "n", &RunConfig::n));
    f.push_back(int_field("data", "train_per_class", &RunConfig::train_per_class));
    f.push_back(int_field("data", "test_per_class", &RunConfig::test_per_class));
    f.push_back(real_field("data", "variation", &RunConfig::variation));
    f.push_back(int_field("data", "data_seed", &RunConfig::data_seed));
    f.push_back(int_field("data", "classes", &RunConfig::classes));

    f.push_back(int_field("sampler", "m", &RunConfig::m));
    f.push_back(int_field("sampler", "m_max", &RunConfig::m_max));
    f.push_back(bool_field("sampler", "flexible", &RunConfig::flexible));
    f.push_back(int_list_field("sampler", "m_set", &RunConfig::m_set));
    f.push_back(int_list_field("sampler", "encoder_widths", &RunConfig::encoder_widths));
    f.push_back(int_list_field("sampler", "hidden_widths", &RunConfig::sampler_hidden));
    f.push_back(real_field("sampler", "tau_min", &RunConfig::tau_min));
    f.push_back(real_field("sampler", "anneal_fraction", &RunConfig::anneal_fraction));
    f.push_back(real_field("sampler", "sparsify_threshold", &RunConfig::sparsify_threshold));

    f.push_back(real_field("loss", "alpha", &RunConfig::alpha));
    f.push_back(real_field("loss", "lambda_emd", &RunConfig::lambda_emd));
    f.push_back(real_field("loss", "translation_weight", &RunConfig::translation_weight));

    f.push_back(real_field("optim", "lr_start", &RunConfig::lr_start));
    f.push_back(real_field("optim", "lr_end", &RunConfig::lr_end));
    f.push_back(int_field("optim", "epochs", &RunConfig::epochs));
    f.push_back(int_field("optim", "batch_size", &RunConfig::batch_size));
    f.push_back(bool_field("optim", "joint_training", &RunConfig::joint_training));
    f.push_back(real_field("optim", "pretrain_lr_start", &RunConfig::pretrain_lr_start));
    f.push_back(real_field("optim", "pretrain_lr_end", &RunConfig::pretrain_lr_end));
    f.push_back(int_field("optim", "pretrain_epochs", &RunConfig::pretrain_epochs));

    f.push_back({"head", "kind", [](const RunConfig& c) { return std::string(to_string(c.head)); },
                 [](RunConfig& c, const std::string& v, const std::string&) {
                   c.head = parse_head_kind(v);
                 }});
    f.push_back(int_list_field("head", "point_widths", &RunConfig::head_point_widths));
    f.push_back(int_list_field("head", "fc_widths", &RunConfig::head_fc_widths));
    f.push_back(mfold_field("mfold_patches", &MFoldConfig::patches));
    f.push_back(mfold_field("mfold_code_dim", &MFoldConfig::code_dim));
    f.push_back(mfold_field("mfold_grid_rows", &MFoldConfig::grid_rows));
    f.push_back(mfold_field("mfold_grid_cols", &MFoldConfig::grid_cols));

    f.push_back(int_list_field("eval", "m_list", &RunConfig::eval_m));
    f.push_back(real_field("eval", "noise_level", &RunConfig::noise_level));
    f.push_back({"eval", "noise_levels",
                 [](const RunConfig& c) { return join(c.noise_levels, format_double); },
                 [](RunConfig& c, const std::string& v, const std::string& what) {
                   std::vector<double> out;
                   for (const auto& t : split_list(v)) out.push_back(parse_double_strict(t, what));
                   c.noise_levels = std::move(out);
                 }});
    f.push_back({"eval", "noise_seeds",
                 [](const RunConfig& c) {
                   return join(c.noise_seeds, [](uint64_t s) { return std::to_string(s); });
                 },
                 [](RunConfig& c, const std::string& v, const std::string& what) {
                   std::vector<uint64_t> out;
                   for (const auto& t : split_list(v)) out.push_back(parse_integer<uint64_t>(t, what));
                   c.noise_seeds = std::move(out);
                 }});
    f.push_back(real_field("eval", "max_angle_deg", &RunConfig::max_angle_deg));
    f.push_back(real_field("eval", "max_translation", &RunConfig::max_translation));
    f.push_back(int_field("eval", "pairs_per_cloud", &RunConfig::pairs_per_cloud));
    return f;
  }();
  return all;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_widths(const std::vector<int>& widths, const std::string& name) {
  require(!widths.empty(), name + " must not be empty");
  for (int w : widths) require(w >= 1, name + " entries must be positive");
}

}  // namespace

void RunConfig::validate() const {
  require(n >= 8, "n must be at least 8");
  require(m >= 1 && m <= n, "m must lie in [1, n]");
  if (flexible) {
    require(m_max >= 1 && m_max <= n, "m_max must lie in [1, n]");
    require(!m_set.empty(), "flexible training needs a non-empty m_set");
    for (int v : m_set) require(v >= 1 && v <= m_max, "m_set entries must lie in [1, m_max]");
  }
  require(!shapes.empty(), "shape list must not be empty");
  require(classes >= 0, "classes must be >= 0");
  require(train_per_class >= 1 && test_per_class >= 1, "per-class counts must be positive");
  require(std::isfinite(variation) && variation >= 0.0 && variation < 1.0,
          "variation must lie in [0, 1)");
  require_widths(encoder_widths, "encoder_widths");
  require_widths(sampler_hidden, "hidden_widths");
  require_widths(head_point_widths, "head point_widths");
  for (int w : head_fc_widths) require(w >= 1, "head fc_widths entries must be positive");
  require(positive_finite(tau_min) && tau_min <= 1.0, "tau_min must lie in (0, 1]");
  require(std::isfinite(anneal_fraction) && anneal_fraction >= 0.0 && anneal_fraction <= 1.0,
          "anneal_fraction must lie in [0, 1]");
  require(std::isfinite(sparsify_threshold) && sparsify_threshold >= 0.0 &&
              sparsify_threshold < 1.0,
          "sparsify_threshold must lie in [0, 1)");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and >= 0");
  require(std::isfinite(lambda_emd) && lambda_emd >= 0.0, "lambda_emd must be finite and >= 0");
  require(std::isfinite(translation_weight) && translation_weight >= 0.0,
          "translation_weight must be finite and >= 0");
  require(positive_finite(lr_start) && positive_finite(lr_end), "learning rates must be positive");
  require(positive_finite(pretrain_lr_start) && positive_finite(pretrain_lr_end),
          "pretraining learning rates must be positive");
  require(epochs >= 1, "epochs must be at least 1");
  require(pretrain_epochs >= 1, "pretrain_epochs must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  if (head == HeadKind::kReconstructionMfold) mfold.validate();
  for (int v : eval_m) require(v >= 1, "m_list entries must be positive");
  require(std::isfinite(noise_level) && noise_level >= 0.0, "noise_level must be >= 0");
  for (double v : noise_levels) require(std::isfinite(v) && v >= 0.0, "noise levels must be >= 0");
  require(std::isfinite(max_angle_deg) && max_angle_deg >= 0.0 && max_angle_deg <= 180.0,
          "max_angle_deg must lie in [0, 180]");
  require(std::isfinite(max_translation) && max_translation >= 0.0,
          "max_translation must be >= 0");
  require(pairs_per_cloud >= 1, "pairs_per_cloud must be at least 1");
  const bool head_matches =
      (task == Task::kClassification && head == HeadKind::kClassification) ||
      (task == Task::kReconstruction &&
       (head == HeadKind::kReconstructionMlp || head == HeadKind::kReconstructionMfold)) ||
      (task == Task::kRegistration && head == HeadKind::kRegistration);
  require(head_matches, std::string("head kind ") + to_string(head) + " does not fit task " +
                            to_string(task));
}

RunConfig default_config(Task task) {
  RunConfig c;
  c.task = task;
  c.n = 1024;
  c.m = 32;
  c.batch_size = 32;
  switch (task) {
    case Task::kClassification:
      c.head = HeadKind::kClassification;
      c.tau_min = 0.1;
      c.alpha = 30.0;
      c.head_point_widths = {64, 64, 64, 128, 1024};
      c.head_fc_widths = {512, 256};
      break;
    case Task::kReconstruction:
      c.head = HeadKind::kReconstructionMlp;
      c.tau_min = 0.5;
      c.alpha = 0.2;
      c.shapes = {Shape::kTorus};
      c.head_point_widths = {64, 128, 128, 256, 128};
      c.head_fc_widths = {256, 256};
      break;
    case Task::kRegistration:
      c.head = HeadKind::kRegistration;
      c.tau_min = 0.1;
      c.alpha = 1.0;
      c.head_point_widths = {64, 64, 64, 128, 1024};
      c.head_fc_widths = {256, 128};
      break;
  }
  c.eval_m = {c.m};
  return c;
}

RunConfig toy_config(Task task) {
  RunConfig c = default_config(task);
  c.n = 256;
  c.batch_size = 8;
  c.train_per_class = 16;
  c.test_per_class = 8;
  c.encoder_widths = {64, 64, 64, 128, 128};
  c.sampler_hidden = {256, 128};
  switch (task) {
    case Task::kClassification:
      c.m = 16;
      c.head_point_widths = {64, 64, 128, 256};
      c.head_fc_widths = {128, 64};
      break;
    case Task::kReconstruction:
      c.m = 32;
      c.train_per_class = 64;
      c.test_per_class = 16;
      c.head_point_widths = {64, 128, 128};
      c.head_fc_widths = {256, 256};
      break;
    case Task::kRegistration:
      c.m = 32;
      c.shapes = {Shape::kCube, Shape::kTorus};
      c.head_point_widths = {64, 64, 128, 256};
      c.head_fc_widths = {128, 64};
      break;
  }
  c.eval_m = {c.m};
  c.epochs = 40;
  c.pretrain_epochs = 40;
  return c;
}

std::string to_ini(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.write(config) + "\n";
  }
  return out;
}

RunConfig config_from_ini(const std::string& text, const RunConfig& base) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  std::map<std::string, const Field*> index;
  for (const auto& f : fields()) index[f.section + "/" + f.key] = &f;
  RunConfig config = base;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string id = section + "/" + key;
      const auto it = index.find(id);
      if (it == index.end()) throw ConfigError("unknown configuration key [" + section + "] " + key);
      it->second->read(config, value.data(), "[" + section + "] " + key);
    }
  }
  return config;
}

RunConfig config_from_ini(const std::string& text) {
  // The task picks the defaults the remaining fields override.
  RunConfig probe = config_from_ini(text, RunConfig{});
  return config_from_ini(text, default_config(probe.task));
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_ini(buf.str());
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_ini(config);
  if (!out) throw IoError("write failed: " + path.string());
}

double learning_rate(double lr_start, double lr_end, int epoch, int epochs) {
  if (epochs < 1) throw ArgumentError("learning_rate: epochs must be >= 1");
  return lr_start * std::pow(lr_end / lr_start, static_cast<double>(epoch) / epochs);
}

}  // namespace tsample
