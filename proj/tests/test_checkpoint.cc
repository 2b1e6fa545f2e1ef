// Copyright 2026 The augdoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "augdoc/checkpoint.h"
#include "augdoc/errors.h"
#include "synthetic.h"

namespace augdoc {
namespace {

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.params = ModelParams::init(4, 9, 3, 11);
  Rng rng(5);
  c.params.v = testing::random_matrix(4, 9, rng);
  c.params.predictor.running_var = Vector::Constant(3, 0.7);
  c.optimizer = OptimizerState::zeros_like(c.params);
  c.optimizer.step = 17;
  c.optimizer.m_u = testing::random_matrix(4, 9, rng);
  c.optimizer.v_v = testing::random_matrix(4, 9, rng).cwiseAbs();
  c.optimizer.predictor.m.w2 = testing::random_matrix(4, 3, rng);
  c.config_hash = 0x1234abcd5678ef00ULL;
  c.vocab_hash = 0xfeedfacecafebeefULL;
  c.seed = 99;
  c.epoch = 6;
  c.early_stop = {.best_loss = 3.25, .stall = 2, .stopped = false};
  return c;
}

CheckpointError::Kind kind_of(const std::string& bytes,
                              std::optional<std::uint64_t> vocab = std::nullopt) {
  try {
    deserialize_checkpoint(bytes, vocab);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected CheckpointError";
  return CheckpointError::Kind::kCorrupt;
}

TEST(Checkpoint, FileRoundTripIsBitIdentical) {
  const auto c = sample_checkpoint();
  const auto path = testing::temp_path("round.ckpt");
  save_checkpoint(path, c);
  const auto d = load_checkpoint(path, c.vocab_hash);
  EXPECT_EQ(c, d);
  EXPECT_EQ(serialize_checkpoint(c), serialize_checkpoint(d));
  EXPECT_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST(Checkpoint, InfiniteBestLossSurvives) {
  auto c = sample_checkpoint();
  c.early_stop = {};
  EXPECT_EQ(deserialize_checkpoint(serialize_checkpoint(c)), c);
}

TEST(Checkpoint, WrongVocabulary) {
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  EXPECT_EQ(kind_of(bytes, 1), CheckpointError::Kind::kVocabularyMismatch);
}

TEST(Checkpoint, TruncatedFileIsCorrupt) {
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  for (std::size_t keep : {std::size_t{0}, std::size_t{5}, std::size_t{40}, bytes.size() / 2,
                           bytes.size() - 1}) {
    const auto kind = kind_of(bytes.substr(0, keep));
    EXPECT_TRUE(kind == CheckpointError::Kind::kCorrupt ||
                (keep < 8 && kind == CheckpointError::Kind::kBadMagic))
        << "kept " << keep;
  }
}

TEST(Checkpoint, FlippedByteIsCorrupt) {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(kind_of(bytes), CheckpointError::Kind::kCorrupt);
}

TEST(Checkpoint, BadMagic) {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[0] = 'X';
  EXPECT_EQ(kind_of(bytes), CheckpointError::Kind::kBadMagic);
}

TEST(Checkpoint, VersionMismatch) {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  bytes[8] = static_cast<char>(kCheckpointVersion + 1);
  EXPECT_EQ(kind_of(bytes), CheckpointError::Kind::kVersionMismatch);
}

TEST(Checkpoint, MissingFile) {
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), IoError);
}

TEST(Checkpoint, TruncatedFileOnDisk) {
  const auto path = testing::temp_path("trunc.ckpt");
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  std::ofstream(path, std::ios::binary) << bytes.substr(0, bytes.size() - 9);
  try {
    load_checkpoint(path);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointError::Kind::kCorrupt);
  }
}

}  // namespace
}  // namespace augdoc
