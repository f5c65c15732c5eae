// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/report.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>

#include "tsample/config.hpp"

namespace tsample {
namespace pt = boost::property_tree;

namespace {

// ptree paths use '/' so keys may contain dots.
pt::ptree::path_type key(const std::string& k) { return pt::ptree::path_type(k, '/'); }

void put(pt::ptree& t, const std::string& k, const std::string& v) { t.put(key(k), v); }
void put(pt::ptree& t, const std::string& k, double v) { t.put(key(k), format_double(v)); }

std::string get(const pt::ptree& t, const std::string& k) {
  const auto v = t.get_optional<std::string>(key(k));
  if (!v) throw ParseError("report: missing key '" + k + "'");
  return *v;
}

double get_double(const pt::ptree& t, const std::string& k) {
  try {
    return parse_double_strict(get(t, k), "report key " + k);
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

int get_int(const pt::ptree& t, const std::string& k) {
  const double v = get_double(t, k);
  if (v != static_cast<int>(v)) throw ParseError("report: key '" + k + "' is not an integer");
  return static_cast<int>(v);
}

void put_map(pt::ptree& root, const std::string& section, const std::map<std::string, double>& m) {
  if (m.empty()) return;
  pt::ptree body;
  for (const auto& [k, v] : m) put(body, k, v);
  root.add_child(key(section), body);
}

std::map<std::string, double> get_map(const pt::ptree& body) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : body) {
    try {
      out[k] = parse_double_strict(v.data(), "report key " + k);
    } catch (const ConfigError& e) {
      throw ParseError(e.what());
    }
  }
  return out;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

const MetricCell& RunReport::cell(int m, const std::string& set, double noise) const {
  for (const auto& c : cells) {
    if (c.m == m && c.set == set && c.noise == noise) return c;
  }
  throw ArgumentError("report has no cell m=" + std::to_string(m) + " set=" + set +
                      " noise=" + format_double(noise));
}

std::string to_ini(const RunReport& report) {
  pt::ptree root;
  pt::ptree head;
  put(head, "task", report.task);
  put(head, "sparsity_threshold", report.sparsity_threshold);
  put(head, "sparsity_fraction", report.sparsity_fraction);
  put(head, "orthogonality_error", report.orthogonality_error);
  root.add_child(key("report"), head);
  for (size_t i = 0; i < report.epochs.size(); ++i) {
    const EpochLog& e = report.epochs[i];
    pt::ptree body;
    put(body, "epoch", std::to_string(e.epoch));
    put(body, "loss", e.loss);
    put(body, "task_loss", e.task_loss);
    put(body, "subset_loss", e.subset_loss);
    put(body, "tau", e.tau);
    put(body, "lr", e.lr);
    put(body, "sparsity", e.sparsity);
    root.add_child(key("epoch." + std::to_string(i)), body);
  }
  for (size_t i = 0; i < report.cells.size(); ++i) {
    const MetricCell& c = report.cells[i];
    pt::ptree body;
    put(body, "m", std::to_string(c.m));
    put(body, "set", c.set);
    put(body, "noise", c.noise);
    for (const auto& [k, v] : c.values) put(body, "metric." + k, v);
    root.add_child(key("cell." + std::to_string(i)), body);
  }
  put_map(root, "reference", report.reference);
  put_map(root, "timings", report.timings);
  put_map(root, "extras", report.extras);
  std::ostringstream out;
  pt::write_ini(out, root);
  return out.str();
}

RunReport report_from_ini(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
  RunReport r;
  const auto head = root.get_child_optional(key("report"));
  if (!head) throw ParseError("report: missing [report] section");
  r.task = get(*head, "task");
  r.sparsity_threshold = get_double(*head, "sparsity_threshold");
  r.sparsity_fraction = get_double(*head, "sparsity_fraction");
  r.orthogonality_error = get_double(*head, "orthogonality_error");
  // Sections are written in order; read_ini preserves it.
  for (const auto& [name, body] : root) {
    if (starts_with(name, "epoch.")) {
      EpochLog e;
      e.epoch = get_int(body, "epoch");
      e.loss = get_double(body, "loss");
      e.task_loss = get_double(body, "task_loss");
      e.subset_loss = get_double(body, "subset_loss");
      e.tau = get_double(body, "tau");
      e.lr = get_double(body, "lr");
      e.sparsity = get_double(body, "sparsity");
      r.epochs.push_back(e);
    } else if (starts_with(name, "cell.")) {
      MetricCell c;
      c.m = get_int(body, "m");
      c.set = get(body, "set");
      c.noise = get_double(body, "noise");
      for (const auto& [k, v] : body) {
        if (starts_with(k, "metric.")) c.values[k.substr(7)] = get_double(body, k);
      }
      r.cells.push_back(std::move(c));
    } else if (name == "reference") {
      r.reference = get_map(body);
    } else if (name == "timings") {
      r.timings = get_map(body);
    } else if (name == "extras") {
      r.extras = get_map(body);
    } else if (name != "report") {
      throw ParseError("report: unknown section [" + name + "]");
    }
  }
  return r;
}

std::string epochs_csv(const RunReport& report) {
  std::string out = "epoch,loss,task_loss,subset_loss,tau,lr,sparsity\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.loss) + ',' +
           format_double(e.task_loss) + ',' + format_double(e.subset_loss) + ',' +
           format_double(e.tau) + ',' + format_double(e.lr) + ',' + format_double(e.sparsity) +
           '\n';
  }
  return out;
}

std::string cells_csv(const RunReport& report) {
  std::string out = "m,set,noise,metric,value\n";
  for (const auto& c : report.cells) {
    for (const auto& [k, v] : c.values) {
      out += std::to_string(c.m) + ',' + c.set + ',' + format_double(c.noise) + ',' + k + ',' +
             format_double(v) + '\n';
    }
  }
  return out;
}

void save_report(const std::filesystem::path& dir, const std::string& stem,
                 const RunReport& report) {
  std::filesystem::create_directories(dir);
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed: " + p.string());
  };
  write(dir / (stem + ".ini"), to_ini(report));
  write(dir / (stem + "_epochs.csv"), epochs_csv(report));
  write(dir / (stem + "_cells.csv"), cells_csv(report));
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return report_from_ini(buf.str());
}

}  // namespace tsample
