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

#include "augdoc/checkpoint.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "binary_io.h"

namespace augdoc {
namespace internal {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

}  // namespace internal

namespace {

constexpr std::string_view kMagic = "AUGDCKPT";

using internal::ByteReader;
using internal::ByteWriter;

void write_grad(ByteWriter& w, const PredictorGrad& g) {
  w.matrix(g.w1);
  w.matrix(g.b1);
  w.matrix(g.gamma);
  w.matrix(g.beta);
  w.matrix(g.w2);
  w.matrix(g.b2);
}

void read_grad(ByteReader& r, PredictorGrad& g) {
  r.matrix(g.w1);
  r.matrix(g.b1);
  r.matrix(g.gamma);
  r.matrix(g.beta);
  r.matrix(g.w2);
  r.matrix(g.b2);
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  const auto& p = c.params;
  const auto& pr = p.predictor;
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(p.dim()));
  w.u64(p.vocab_size());
  w.u32(static_cast<std::uint32_t>(pr.hidden()));
  w.u32(static_cast<std::uint32_t>(pr.activation));
  w.u64(c.vocab_hash);
  w.u64(c.config_hash);
  w.u64(c.seed);
  w.i64(c.epoch);
  w.i64(c.optimizer.step);
  w.f64(c.early_stop.best_loss);
  w.i32(c.early_stop.stall);
  w.u8(c.early_stop.stopped ? 1 : 0);
  w.matrix(p.u);
  w.matrix(p.v);
  w.matrix(pr.w1);
  w.matrix(pr.b1);
  w.matrix(pr.gamma);
  w.matrix(pr.beta);
  w.matrix(pr.running_mean);
  w.matrix(pr.running_var);
  w.matrix(pr.w2);
  w.matrix(pr.b2);
  w.f64(pr.bn_eps);
  w.f64(pr.bn_momentum);
  w.matrix(c.optimizer.m_u);
  w.matrix(c.optimizer.v_u);
  w.matrix(c.optimizer.m_v);
  w.matrix(c.optimizer.v_v);
  write_grad(w, c.optimizer.predictor.m);
  write_grad(w, c.optimizer.predictor.v);
  w.seal();
  return w.data();
}

Checkpoint deserialize_checkpoint(const std::string& bytes,
                                  std::optional<std::uint64_t> expected_vocab_hash) {
  if (bytes.size() < kMagic.size() || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(CheckpointError::Kind::kBadMagic, "not a checkpoint file (bad magic)");
  }
  {
    ByteReader head(bytes);
    head.bytes(kMagic.size());
    const std::uint32_t version = head.u32();
    if (version != kCheckpointVersion) {
      throw CheckpointError(CheckpointError::Kind::kVersionMismatch,
                            "checkpoint version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(kCheckpointVersion) + ")");
    }
  }
  ByteReader r(bytes);
  r.verify_seal();
  r.bytes(kMagic.size());
  r.u32();
  const auto d = static_cast<Eigen::Index>(r.u32());
  const auto v = static_cast<Eigen::Index>(r.u64());
  const auto hidden = static_cast<Eigen::Index>(r.u32());
  const std::uint32_t activation = r.u32();
  if (activation > static_cast<std::uint32_t>(PredictorActivation::kNone)) {
    ByteReader::corrupt("unknown predictor activation");
  }
  Checkpoint c;
  c.vocab_hash = r.u64();
  if (expected_vocab_hash && *expected_vocab_hash != c.vocab_hash) {
    throw CheckpointError(CheckpointError::Kind::kVocabularyMismatch,
                          "checkpoint was trained with a different vocabulary");
  }
  c.config_hash = r.u64();
  c.seed = r.u64();
  c.epoch = r.i64();
  c.optimizer.step = r.i64();
  c.early_stop.best_loss = r.f64();
  c.early_stop.stall = r.i32();
  c.early_stop.stopped = r.u8() != 0;
  // Sizes must match the payload before allocating anything large.
  const std::size_t expected_bytes =
      8 * static_cast<std::size_t>(6 * d * v + 2 * d * hidden + 5 * hidden + d +
                                   2 + 2 * (2 * d * hidden + 3 * hidden + d));
  if (r.remaining() != expected_bytes) {
    ByteReader::corrupt("payload size does not match header dimensions");
  }

  auto& p = c.params;
  p.u.resize(d, v);
  p.v.resize(d, v);
  r.matrix(p.u);
  r.matrix(p.v);
  auto& pr = p.predictor;
  pr.activation = static_cast<PredictorActivation>(activation);
  pr.w1.resize(hidden, d);
  pr.b1.resize(hidden);
  pr.gamma.resize(hidden);
  pr.beta.resize(hidden);
  pr.running_mean.resize(hidden);
  pr.running_var.resize(hidden);
  pr.w2.resize(d, hidden);
  pr.b2.resize(d);
  r.matrix(pr.w1);
  r.matrix(pr.b1);
  r.matrix(pr.gamma);
  r.matrix(pr.beta);
  r.matrix(pr.running_mean);
  r.matrix(pr.running_var);
  r.matrix(pr.w2);
  r.matrix(pr.b2);
  pr.bn_eps = r.f64();
  pr.bn_momentum = r.f64();

  auto& o = c.optimizer;
  o.m_u.resize(d, v);
  o.v_u.resize(d, v);
  o.m_v.resize(d, v);
  o.v_v.resize(d, v);
  r.matrix(o.m_u);
  r.matrix(o.v_u);
  r.matrix(o.m_v);
  r.matrix(o.v_v);
  o.predictor.m = PredictorGrad::zeros_like(pr);
  o.predictor.v = PredictorGrad::zeros_like(pr);
  read_grad(r, o.predictor.m);
  read_grad(r, o.predictor.v);
  if (!r.at_end()) ByteReader::corrupt("trailing bytes after payload");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  internal::write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path,
                           std::optional<std::uint64_t> expected_vocab_hash) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path);
  return deserialize_checkpoint(internal::read_file(path), expected_vocab_hash);
}

}  // namespace augdoc
