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

// Versioned binary checkpoint.
//
// Layout (all integers and reals little-endian, reals IEEE-754 binary64):
//   "AUGDCKPT"  u32 version  u32 d  u64 v  u32 predictor_hidden
//   u32 activation  u64 vocab_hash  u64 config_hash  u64 seed  i64 epoch
//   i64 optimizer_step  f64 best_loss  i32 stall  u8 stopped
//   U (d x v, row-major)  V (d x v, row-major)
//   predictor: w1 b1 gamma beta running_mean running_var w2 b2 eps momentum
//   moments: m_u v_u m_v v_v, predictor m (w1 b1 gamma beta w2 b2), v (same)
//   u64 FNV-1a checksum of all preceding bytes

#ifndef AUGDOC_CHECKPOINT_H_
#define AUGDOC_CHECKPOINT_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "augdoc/encoder.h"
#include "augdoc/optimizer.h"

namespace augdoc {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct EarlyStopState {
  double best_loss = std::numeric_limits<double>::infinity();
  std::int32_t stall = 0;
  bool stopped = false;

  bool operator==(const EarlyStopState&) const = default;
};

struct Checkpoint {
  ModelParams params;
  OptimizerState optimizer;
  std::uint64_t config_hash = 0;
  std::uint64_t vocab_hash = 0;
  std::uint64_t seed = 0;
  std::int64_t epoch = 0;  // completed epochs
  EarlyStopState early_stop;

  bool operator==(const Checkpoint& o) const {
    return params == o.params && optimizer == o.optimizer && config_hash == o.config_hash &&
           vocab_hash == o.vocab_hash && seed == o.seed && epoch == o.epoch &&
           early_stop == o.early_stop;
  }
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws CheckpointError: kBadMagic, kVersionMismatch, kCorrupt (truncated
// or damaged), kVocabularyMismatch when expected_vocab_hash differs.
Checkpoint deserialize_checkpoint(const std::string& bytes,
                                  std::optional<std::uint64_t> expected_vocab_hash = {});

// Writes to a temporary file and renames, so a failed save never leaves a
// partial checkpoint at `path`.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path,
                           std::optional<std::uint64_t> expected_vocab_hash = {});

}  // namespace augdoc

#endif  // AUGDOC_CHECKPOINT_H_
