// Copyright 2026 The tfgb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Small helpers shared by the unit suites.

#pragma once

#include <cstdint>
#include <vector>

#include "tfgb/workload.hpp"

namespace tfgb::testing {

// Reference SplitMix64, independent of the library's.
inline std::uint64_t ref_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct RefSplitMix {
  std::uint64_t s;
  std::uint64_t next() { return ref_mix(s += 0x9E3779B97F4A7C15ULL); }
};

// Tiny deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_{seed} {}
  std::uint64_t u64() { return rng_.next(); }
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + u64() % (hi - lo + 1); }
  bool coin() { return (u64() & 1) != 0; }

  CategorySet categories(std::size_t min_size) {
    while (true) {
      CategorySet s;
      for (auto c : {BufferCategory::Small, BufferCategory::Medium, BufferCategory::Large})
        if (coin()) s.insert(c);
      if (s.size() >= min_size) return s;
    }
  }

  // Random valid spec with small buffers so round trips stay fast.
  PayloadSpec spec(std::size_t max_buffers = 12, std::uint32_t max_size = 4096) {
    std::vector<std::uint32_t> sizes(range(1, max_buffers));
    for (auto& s : sizes) s = static_cast<std::uint32_t>(range(1, max_size));
    return generate_custom(sizes, u64());
  }

 private:
  RefSplitMix rng_;
};

inline std::vector<std::uint8_t> concat(const std::vector<std::vector<std::uint8_t>>& parts) {
  std::vector<std::uint8_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace tfgb::testing
