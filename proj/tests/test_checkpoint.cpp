// Copyright 2026 The tsample Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <fstream>
#include <cstring>
#include <limits>

#include "test_util.hpp"
#include "tsample/checkpoint.hpp"

using namespace tsample;

namespace {

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.blobs.push_back({"a.weight", {2, 3}, {1.f, -2.f, 0.5f, 3.25f, 1e-30f, -0.f}});
  ck.blobs.push_back({"a.bias", {1, 3}, {0.f, 0.f, 7.f}});
  ck.config_text = to_ini(toy_config(Task::kClassification));
  return ck;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

}  // namespace

TEST_SUITE("checkpoint") {

TEST_CASE("checkpoints round-trip bit for bit") {
  const auto dir = testing::scratch_dir("checkpoint");
  const Checkpoint ck = sample_checkpoint();
  write_checkpoint(dir / "a.ckpt", ck);
  const Checkpoint back = read_checkpoint(dir / "a.ckpt");
  REQUIRE(back.blobs.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(back.blobs[i].name == ck.blobs[i].name);
    CHECK(back.blobs[i].shape == ck.blobs[i].shape);
    CHECK(std::memcmp(back.blobs[i].data.data(), ck.blobs[i].data.data(),
                      ck.blobs[i].data.size() * sizeof(float)) == 0);
  }
  CHECK(back.config() == toy_config(Task::kClassification));
  CHECK(back.find("a.bias") != nullptr);
  CHECK(back.find("nope") == nullptr);
}

TEST_CASE("parameter sets capture and restore through float32") {
  std::mt19937_64 rng(61);
  nn::Mlp a(3, {5, 4}, {}, rng);
  nn::Mlp b(3, {5, 4}, {}, rng);
  nn::ParameterSet sa, sb;
  a.collect(sa, "mlp");
  b.collect(sb, "mlp");
  const Checkpoint ck = capture(sa, toy_config(Task::kClassification));
  restore(sb, ck);
  CHECK(capture(sb, toy_config(Task::kClassification)).blobs.size() == ck.blobs.size());
  for (size_t i = 0; i < sa.params().size(); ++i) {
    const nn::Mat& x = sa.params()[i].var.value();
    const nn::Mat& y = sb.params()[i].var.value();
    CHECK((x - y).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff()));
  }
  // Restoring the already-rounded values is idempotent.
  const uint64_t once = sb.checksum();
  restore(sb, capture(sb, toy_config(Task::kClassification)));
  CHECK(sb.checksum() == once);
}

TEST_CASE("restore rejects missing names and shape mismatches") {
  std::mt19937_64 rng(62);
  nn::Mlp a(3, {5}, {}, rng);
  nn::Mlp wide(3, {6}, {}, rng);
  nn::ParameterSet sa, sw;
  a.collect(sa, "mlp");
  wide.collect(sw, "mlp");
  CHECK_THROWS_AS(restore(sw, capture(sa, RunConfig{})), ConfigError);
  nn::ParameterSet other;
  a.collect(other, "renamed");
  CHECK_THROWS_AS(restore(other, capture(sa, RunConfig{})), ConfigError);
}

TEST_CASE("corrupt files are parse errors") {
  const auto dir = testing::scratch_dir("checkpoint_corrupt");
  write_checkpoint(dir / "good.ckpt", sample_checkpoint());
  const std::string good = slurp(dir / "good.ckpt");

  std::string bad = good;
  bad[0] = 'X';
  spit(dir / "magic.ckpt", bad);
  CHECK_THROWS_AS(read_checkpoint(dir / "magic.ckpt"), ParseError);

  bad = good;
  bad[5] = 9;
  spit(dir / "version.ckpt", bad);
  CHECK_THROWS_AS(read_checkpoint(dir / "version.ckpt"), ParseError);

  spit(dir / "short.ckpt", good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(dir / "short.ckpt"), ParseError);

  spit(dir / "trailing.ckpt", good + "x");
  CHECK_THROWS_AS(read_checkpoint(dir / "trailing.ckpt"), ParseError);

  bad = good;
  bad[9] = static_cast<char>(0xff);
  bad[10] = static_cast<char>(0xff);
  bad[11] = static_cast<char>(0xff);
  bad[12] = static_cast<char>(0x7f);
  spit(dir / "length.ckpt", bad);
  CHECK_THROWS_AS(read_checkpoint(dir / "length.ckpt"), ParseError);

  Checkpoint nan = sample_checkpoint();
  nan.blobs[0].data[2] = std::numeric_limits<float>::quiet_NaN();
  write_checkpoint(dir / "nan.ckpt", nan);
  CHECK_THROWS_AS(read_checkpoint(dir / "nan.ckpt"), ParseError);

  CHECK_THROWS_AS(read_checkpoint(dir / "missing.ckpt"), ConfigError);
}

TEST_CASE("writing a blob whose shape disagrees with its data is rejected") {
  Checkpoint ck = sample_checkpoint();
  ck.blobs[0].shape = {4, 4};
  CHECK_THROWS_AS(write_checkpoint(testing::scratch_dir("checkpoint_bad") / "x.ckpt", ck),
                  ArgumentError);
}

}
