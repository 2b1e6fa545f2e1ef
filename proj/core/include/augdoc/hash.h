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

#ifndef AUGDOC_HASH_H_
#define AUGDOC_HASH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace augdoc {

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
class Fnv1a {
 public:
  void update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= 0x100000001b3ULL;
    }
  }
  void update(std::string_view s) { update(std::as_bytes(std::span(s.data(), s.size()))); }
  void update_u64(std::uint64_t x) {
    std::byte buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::byte>(x >> (8 * i));
    update(buf);
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace augdoc

#endif  // AUGDOC_HASH_H_
