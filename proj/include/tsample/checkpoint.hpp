// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tsample/config.hpp"
#include "tsample/nn/layers.hpp"

namespace tsample {

inline constexpr uint32_t kCheckpointVersion = 1;

struct Blob {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;

  bool operator==(const Blob&) const = default;
};

/// Binary layout, little-endian: "MOPS1", u32 version, u32 blob count, then
/// per blob u32 name length, name bytes, u32 rank, u32 dims, float32 data;
/// finally u32 length and the RunConfig snapshot as INI text.
struct Checkpoint {
  std::vector<Blob> blobs;
  std::string config_text;

  const Blob* find(const std::string& name) const;
  RunConfig config() const { return config_from_ini(config_text); }
};

/// Parameters and buffers of `set`, narrowed to float32.
Checkpoint capture(const nn::ParameterSet& set, const RunConfig& config);
/// Copies every blob named in `set` into it. Missing names and shape
/// mismatches are configuration errors; extra blobs are ignored.
void restore(nn::ParameterSet& set, const Checkpoint& checkpoint);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace tsample
