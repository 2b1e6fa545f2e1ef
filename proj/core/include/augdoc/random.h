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

#ifndef AUGDOC_RANDOM_H_
#define AUGDOC_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace augdoc {

using Rng = std::mt19937_64;

// Purpose tags keep independent consumers on disjoint streams, so e.g. the
// backbone's draws never depend on whether augmentation ran.
enum class StreamTag : std::uint64_t {
  kInit = 1,
  kPredictorInit = 2,
  kShuffle = 3,
  kBackbone = 4,
  kAugment = 5,
  kAugmentCache = 6,
  kKMeans = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeds a generator from (seed, tag, coordinates...). The mapping is a fixed
// hash chain, so a stream depends only on its coordinates and never on the
// order in which other streams were created.
inline Rng derive_stream(std::uint64_t seed, StreamTag tag,
                         std::initializer_list<std::uint64_t> coords = {}) {
  std::uint64_t h = splitmix64(seed ^ 0x5eed5eed5eed5eedULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  for (std::uint64_t c : coords) h = splitmix64(h ^ c);
  return Rng(h);
}

// Uniform double in [0, 1). Used instead of std::uniform_real_distribution
// where the exact number of engine calls matters for reproducibility.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace augdoc

#endif  // AUGDOC_RANDOM_H_
