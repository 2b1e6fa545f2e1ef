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

// Little-endian field encoding for checkpoint and embedding files.

#ifndef AUGDOC_SRC_BINARY_IO_H_
#define AUGDOC_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "augdoc/errors.h"
#include "augdoc/hash.h"

namespace augdoc::internal {

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  void u8(std::uint8_t x) { buf_.push_back(static_cast<char>(x)); }
  void u32(std::uint32_t x) { put_le(x, 4); }
  void u64(std::uint64_t x) { put_le(x, 8); }
  void i32(std::int32_t x) { u32(static_cast<std::uint32_t>(x)); }
  void i64(std::int64_t x) { u64(static_cast<std::uint64_t>(x)); }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }

  // Row-major, regardless of Eigen's storage order.
  template <typename Derived>
  void matrix(const Eigen::DenseBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

  // Appends an FNV-1a checksum of everything written so far.
  void seal() {
    Fnv1a h;
    h.update(buf_);
    u64(h.digest());
  }

  const std::string& data() const { return buf_; }

 private:
  void put_le(std::uint64_t x, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get_le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }

  template <typename Derived>
  void matrix(Eigen::DenseBase<Derived>& m) {
    need(static_cast<std::size_t>(m.rows() * m.cols()) * 8);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    }
  }

  // Verifies the trailing checksum written by ByteWriter::seal. Call before
  // decoding anything else.
  void verify_seal() {
    if (data_.size() < 8) corrupt("file too short");
    Fnv1a h;
    h.update(data_.substr(0, data_.size() - 8));
    ByteReader tail(data_.substr(data_.size() - 8));
    if (tail.u64() != h.digest()) corrupt("checksum mismatch (truncated or damaged file)");
    data_ = data_.substr(0, data_.size() - 8);
  }

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  [[noreturn]] static void corrupt(const std::string& what) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt, what);
  }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) corrupt("unexpected end of data");
  }
  std::uint64_t get_le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t x = 0;
    for (int i = 0; i < n; ++i) {
      x |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return x;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& data);

}  // namespace augdoc::internal

#endif  // AUGDOC_SRC_BINARY_IO_H_
