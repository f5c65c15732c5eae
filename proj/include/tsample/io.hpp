// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsample/pointcloud.hpp"

namespace tsample {

enum class Split { kTrain, kTest };

const char* to_string(Split split);
Split parse_split(const std::string& text);

// Text format: one "x y z" per line, optional "# label <int>" header line.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

// Binary cache: "PCV1", uint32 n, n*3 float32, int32 label (-1 if absent).
// All little-endian.
PointCloud read_pcv(const std::filesystem::path& path);
void write_pcv(const std::filesystem::path& path, const PointCloud& cloud);

/// Loads `<root>/<split>/<class>/<id>.xyz` (or .pcv). When the split
/// directory does not exist, `root` itself is scanned. Files are visited in
/// lexicographic order. A missing "# label" header falls back to the index of
/// the class directory among its sorted siblings.
std::vector<PointCloud> load_dataset(const std::filesystem::path& root,
                                     Split split);

/// Writes clouds under `<root>/<split>/<class_names[label]>/<id>.xyz`.
void save_dataset(const std::filesystem::path& root, Split split,
                  const std::vector<PointCloud>& clouds,
                  const std::vector<std::string>& class_names);

}  // namespace tsample
