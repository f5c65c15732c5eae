// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include "tsample/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace tsample {
namespace {

constexpr char kMagic[5] = {'M', 'O', 'P', 'S', '1'};
// Guards against allocating from a corrupt length field.
constexpr uint32_t kMaxLength = 1u << 28;

void put_u32(std::ostream& os, uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_bytes(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  Reader(std::istream& in, std::filesystem::path path) : in_(in), path_(std::move(path)) {}

  uint32_t u32() {
    unsigned char b[4];
    read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }

  uint32_t length() {
    const auto at = offset_;
    const uint32_t v = u32();
    if (v > kMaxLength) fail(at, "implausible length " + std::to_string(v));
    return v;
  }

  std::string bytes() {
    std::string s(length(), '\0');
    read(s.data(), s.size());
    return s;
  }

  void read(char* dst, size_t count) {
    in_.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<size_t>(in_.gcount()) != count) fail(offset_, "unexpected end of file");
    offset_ += count;
  }

  [[noreturn]] void fail(size_t at, const std::string& what) const {
    throw ParseError(path_.string() + ": byte " + std::to_string(at) + ": " + what);
  }

  size_t offset() const { return offset_; }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::filesystem::path path_;
  size_t offset_ = 0;
};

Blob to_blob(const std::string& name, const nn::Mat& m) {
  Blob b;
  b.name = name;
  b.shape = {static_cast<uint32_t>(m.rows()), static_cast<uint32_t>(m.cols())};
  b.data.resize(static_cast<size_t>(m.size()));
  for (nn::Index i = 0; i < m.size(); ++i) b.data[static_cast<size_t>(i)] = static_cast<float>(m.data()[i]);
  return b;
}

void from_blob(const Blob& b, nn::Mat& m) {
  const std::vector<uint32_t> want = {static_cast<uint32_t>(m.rows()),
                                      static_cast<uint32_t>(m.cols())};
  if (b.shape != want) {
    throw ConfigError("checkpoint blob '" + b.name + "' has shape " +
                      std::to_string(b.shape.empty() ? 0 : b.shape[0]) + "x" +
                      std::to_string(b.shape.size() < 2 ? 0 : b.shape[1]) + ", model expects " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = b.data[static_cast<size_t>(i)];
}

}  // namespace

const Blob* Checkpoint::find(const std::string& name) const {
  for (const auto& b : blobs) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

Checkpoint capture(const nn::ParameterSet& set, const RunConfig& config) {
  Checkpoint ck;
  for (const auto& p : set.params()) ck.blobs.push_back(to_blob(p.name, p.var.value()));
  for (const auto& b : set.buffers()) ck.blobs.push_back(to_blob(b.name, *b.value));
  ck.config_text = to_ini(config);
  return ck;
}

void restore(nn::ParameterSet& set, const Checkpoint& checkpoint) {
  std::map<std::string, const Blob*> index;
  for (const auto& b : checkpoint.blobs) index[b.name] = &b;
  const auto lookup = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw ConfigError("checkpoint lacks parameter '" + name + "'");
    return it->second;
  };
  for (const auto& p : set.params()) {
    nn::Var v = p.var;
    from_blob(*lookup(p.name), v.mutable_value());
  }
  for (const auto& b : set.buffers()) from_blob(*lookup(b.name), *b.value);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(checkpoint.blobs.size()));
  for (const auto& b : checkpoint.blobs) {
    size_t expected = 1;
    for (uint32_t d : b.shape) expected *= d;
    if (expected != b.data.size()) {
      throw ArgumentError("blob '" + b.name + "': shape does not match data size");
    }
    put_bytes(out, b.name);
    put_u32(out, static_cast<uint32_t>(b.shape.size()));
    for (uint32_t d : b.shape) put_u32(out, d);
    for (float v : b.data) put_u32(out, std::bit_cast<uint32_t>(v));
  }
  put_bytes(out, checkpoint.config_text);
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  Reader r(in, path);
  char magic[sizeof(kMagic)];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) r.fail(0, "not a checkpoint (bad magic)");
  const size_t version_at = r.offset();
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    r.fail(version_at, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  const uint32_t count = r.length();
  for (uint32_t i = 0; i < count; ++i) {
    Blob b;
    b.name = r.bytes();
    const uint32_t rank = r.length();
    size_t total = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      b.shape.push_back(r.length());
      total *= b.shape.back();
      if (total > kMaxLength) r.fail(r.offset(), "blob '" + b.name + "' is implausibly large");
    }
    b.data.resize(total);
    for (size_t k = 0; k < total; ++k) {
      b.data[k] = std::bit_cast<float>(r.u32());
      if (!std::isfinite(b.data[k])) r.fail(r.offset() - 4, "non-finite value in '" + b.name + "'");
    }
    ck.blobs.push_back(std::move(b));
  }
  ck.config_text = r.bytes();
  if (!r.at_end()) r.fail(r.offset(), "trailing bytes after configuration");
  return ck;
}

}  // namespace tsample
