// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tsample {
namespace fs = std::filesystem;

namespace {

std::string where(const fs::path& path, size_t line) {
  return path.string() + ":" + std::to_string(line);
}

bool parse_double(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

void put_u32(std::ostream& os, uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff),
                         static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff),
                         static_cast<char>((v >> 24) & 0xff)};
  os.write(bytes, 4);
}

uint32_t get_u32(std::istream& is, const fs::path& path) {
  const auto offset = is.tellg();
  unsigned char bytes[4];
  if (!is.read(reinterpret_cast<char*>(bytes), 4)) {
    throw ParseError(path.string() + ": truncated at byte offset " +
                     std::to_string(static_cast<long long>(offset)));
  }
  return uint32_t{bytes[0]} | (uint32_t{bytes[1]} << 8) |
         (uint32_t{bytes[2]} << 16) | (uint32_t{bytes[3]} << 24);
}

}  // namespace

const char* to_string(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "test") return Split::kTest;
  throw ArgumentError("unknown split '" + text + "'");
}

PointCloud read_xyz(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> coords;
  std::optional<int> label;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0].starts_with('#')) {
      // "# label <int>" or "#label <int>"; other comments are ignored.
      std::vector<std::string_view> rest(tokens.begin(), tokens.end());
      if (rest[0] == "#") rest.erase(rest.begin());
      else rest[0].remove_prefix(1);
      if (!rest.empty() && rest[0] == "label") {
        int value = 0;
        if (rest.size() != 2 ||
            std::from_chars(rest[1].data(), rest[1].data() + rest[1].size(),
                            value)
                    .ptr != rest[1].data() + rest[1].size()) {
          throw ParseError(where(path, line_no) + ": malformed label header");
        }
        label = value;
      }
      continue;
    }
    if (tokens.size() != 3) {
      throw ParseError(where(path, line_no) + ": expected 3 coordinates, got " +
                       std::to_string(tokens.size()));
    }
    for (const auto& token : tokens) {
      double v = 0.0;
      if (!parse_double(token, v) || !std::isfinite(v)) {
        throw ParseError(where(path, line_no) + ": invalid coordinate '" +
                         std::string(token) + "'");
      }
      coords.push_back(v);
    }
  }
  if (coords.empty()) throw ParseError(path.string() + ": no points");
  Points points = Eigen::Map<Points>(coords.data(),
                                     static_cast<Eigen::Index>(coords.size() / 3), 3);
  return PointCloud(std::move(points), label, path.stem().string());
}

void write_xyz(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (cloud.label()) out << "# label " << *cloud.label() << '\n';
  char buf[3][32];
  for (int i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      auto res = std::to_chars(buf[c], buf[c] + 31, cloud.points()(i, c));
      *res.ptr = '\0';
    }
    out << buf[0] << ' ' << buf[1] << ' ' << buf[2] << '\n';
  }
}

PointCloud read_pcv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != "PCV1") {
    throw ParseError(path.string() + ": bad magic at byte offset 0");
  }
  const uint32_t n = get_u32(in, path);
  if (n == 0) throw ParseError(path.string() + ": zero points at byte offset 4");
  Points points(n, 3);
  for (uint32_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = std::bit_cast<float>(get_u32(in, path));
      if (!std::isfinite(v)) {
        throw ParseError(path.string() + ": non-finite coordinate at byte offset " +
                         std::to_string(8 + 4 * (3 * i + c)));
      }
      points(i, c) = v;
    }
  }
  const auto raw_label = static_cast<int32_t>(get_u32(in, path));
  std::optional<int> label;
  if (raw_label >= 0) label = raw_label;
  return PointCloud(std::move(points), label, path.stem().string());
}

void write_pcv(const fs::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("PCV1", 4);
  put_u32(out, static_cast<uint32_t>(cloud.size()));
  for (int i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(cloud.points()(i, c))));
    }
  }
  put_u32(out, static_cast<uint32_t>(static_cast<int32_t>(cloud.label().value_or(-1))));
}

std::vector<PointCloud> load_dataset(const fs::path& root, Split split) {
  if (!fs::exists(root)) throw IoError("dataset path does not exist: " + root.string());
  fs::path dir = root / to_string(split);
  if (!fs::is_directory(dir)) dir = root;

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".xyz" || ext == ".pcv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  // Class index = rank of the class directory name among all class dirs.
  std::set<std::string> class_names;
  for (const auto& f : files) {
    if (f.parent_path() != dir) class_names.insert(f.parent_path().filename().string());
  }
  std::map<std::string, int> class_index;
  for (const auto& name : class_names) {
    class_index.emplace(name, static_cast<int>(class_index.size()));
  }

  std::vector<PointCloud> clouds;
  clouds.reserve(files.size());
  for (const auto& f : files) {
    PointCloud cloud = f.extension() == ".pcv" ? read_pcv(f) : read_xyz(f);
    if (!cloud.label() && f.parent_path() != dir) {
      cloud.set_label(class_index.at(f.parent_path().filename().string()));
    }
    if (!clouds.empty() && cloud.size() != clouds.front().size()) {
      throw ParseError(f.string() + ": has " + std::to_string(cloud.size()) +
                       " points, dataset uses " +
                       std::to_string(clouds.front().size()));
    }
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

void save_dataset(const fs::path& root, Split split,
                  const std::vector<PointCloud>& clouds,
                  const std::vector<std::string>& class_names) {
  const fs::path dir = root / to_string(split);
  for (size_t i = 0; i < clouds.size(); ++i) {
    const int label = clouds[i].label().value_or(0);
    const std::string cls = label < static_cast<int>(class_names.size())
                                ? class_names[label]
                                : "class" + std::to_string(label);
    fs::create_directories(dir / cls);
    char id[32];
    std::snprintf(id, sizeof(id), "%06zu.xyz", i);
    write_xyz(dir / cls / id, clouds[i]);
  }
}

}  // namespace tsample
