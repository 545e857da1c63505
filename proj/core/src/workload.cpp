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

#include "tfgb/workload.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <numeric>

#include "tfgb/error.hpp"

namespace tfgb {

namespace {

constexpr std::array<BufferCategory, 3> kAscending = {BufferCategory::Small, BufferCategory::Medium,
                                                      BufferCategory::Large};

std::string range_text(BufferCategory c) {
  switch (c) {
    case BufferCategory::Small:
      return "[1, 1024)";
    case BufferCategory::Medium:
      return "[1024, 1048576)";
    case BufferCategory::Large:
      return "[1048576, 10485760]";
  }
  return "?";
}

PayloadSpec spec_from_counts(Scheme scheme, std::span<const BufferCategory> order,
                             std::span<const std::size_t> counts, const BufferSizeConfig& sizes,
                             std::uint64_t seed) {
  PayloadSpec spec;
  spec.scheme = scheme;
  spec.seed = seed;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (std::size_t n = 0; n < counts[k]; ++n) spec.buffers.push_back({order[k], sizes.size_of(order[k])});
  }
  return spec;
}

void check_common(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes) {
  if (categories.empty()) throw ConfigError("payload generation needs at least one buffer category");
  if (count == 0) throw ConfigError("iovec buffer count must be at least 1");
  sizes.validate();
}

}  // namespace

std::string_view to_string(BufferCategory c) {
  switch (c) {
    case BufferCategory::Small:
      return "small";
    case BufferCategory::Medium:
      return "medium";
    case BufferCategory::Large:
      return "large";
  }
  return "?";
}

std::optional<BufferCategory> parse_category(std::string_view s) {
  if (s == "small" || s == "S" || s == "s") return BufferCategory::Small;
  if (s == "medium" || s == "M" || s == "m") return BufferCategory::Medium;
  if (s == "large" || s == "L" || s == "l") return BufferCategory::Large;
  return std::nullopt;
}

BufferCategory categorize(std::uint64_t size) {
  if (size < kSmallMin || size > kLargeMax) {
    throw RangeError("buffer size " + std::to_string(size) + " outside the [1, 10485760] byte taxonomy");
  }
  if (size < kMediumMin) return BufferCategory::Small;
  if (size < kLargeMin) return BufferCategory::Medium;
  return BufferCategory::Large;
}

std::uint64_t category_min(BufferCategory c) {
  switch (c) {
    case BufferCategory::Small:
      return kSmallMin;
    case BufferCategory::Medium:
      return kMediumMin;
    case BufferCategory::Large:
      return kLargeMin;
  }
  return 0;
}

std::uint64_t category_max(BufferCategory c) {
  switch (c) {
    case BufferCategory::Small:
      return kMediumMin - 1;
    case BufferCategory::Medium:
      return kLargeMin - 1;
    case BufferCategory::Large:
      return kLargeMax;
  }
  return 0;
}

CategorySet::CategorySet(std::initializer_list<BufferCategory> cats) {
  for (auto c : cats) insert(c);
}

std::size_t CategorySet::size() const {
  return static_cast<std::size_t>(std::popcount(static_cast<unsigned>(bits_)));
}

std::vector<BufferCategory> CategorySet::ascending() const {
  std::vector<BufferCategory> out;
  for (auto c : kAscending)
    if (contains(c)) out.push_back(c);
  return out;
}

std::vector<BufferCategory> CategorySet::descending() const {
  auto out = ascending();
  std::reverse(out.begin(), out.end());
  return out;
}

void BufferSizeConfig::validate() const {
  for (auto c : kAscending) {
    const std::uint64_t v = size_of(c);
    if (v < category_min(c) || v > category_max(c)) {
      throw ConfigError(std::string(to_string(c)) + " buffer size " + std::to_string(v) + " outside " +
                        range_text(c) + " bytes");
    }
  }
}

std::uint32_t BufferSizeConfig::size_of(BufferCategory c) const {
  switch (c) {
    case BufferCategory::Small:
      return small_bytes;
    case BufferCategory::Medium:
      return medium_bytes;
    case BufferCategory::Large:
      return large_bytes;
  }
  return 0;
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::Uniform:
      return "uniform";
    case Scheme::Random:
      return "random";
    case Scheme::Skew:
      return "skew";
    case Scheme::Custom:
      return "custom";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view s) {
  if (s == "uniform") return Scheme::Uniform;
  if (s == "random") return Scheme::Random;
  if (s == "skew") return Scheme::Skew;
  if (s == "custom") return Scheme::Custom;
  return std::nullopt;
}

std::uint64_t PayloadSpec::total_bytes() const {
  return std::accumulate(buffers.begin(), buffers.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const BufferDesc& b) { return acc + b.size; });
}

std::size_t PayloadSpec::count(BufferCategory c) const {
  return static_cast<std::size_t>(
      std::count_if(buffers.begin(), buffers.end(), [c](const BufferDesc& b) { return b.category == c; }));
}

void PayloadSpec::validate() const {
  if (buffers.empty()) throw ConfigError("payload spec has no buffers");
  for (const auto& b : buffers) {
    if (b.size < category_min(b.category) || b.size > category_max(b.category)) {
      throw ConfigError(std::string(to_string(b.category)) + " buffer of " + std::to_string(b.size) +
                        " bytes outside " + range_text(b.category));
    }
  }
}

PayloadSpec generate_uniform(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                             std::uint64_t seed) {
  check_common(categories, count, sizes);
  const auto order = categories.ascending();
  PayloadSpec spec;
  spec.scheme = Scheme::Uniform;
  spec.seed = seed;
  spec.buffers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = order[i % order.size()];
    spec.buffers.push_back({c, sizes.size_of(c)});
  }
  return spec;
}

PayloadSpec generate_random(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                            std::uint64_t seed) {
  check_common(categories, count, sizes);
  if (categories.size() < 2) throw ConfigError("random scheme needs at least two buffer categories");
  const auto order = categories.ascending();
  SplitMix64 rng(seed);
  PayloadSpec spec;
  spec.scheme = Scheme::Random;
  spec.seed = seed;
  spec.buffers.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = order[rng.below(order.size())];
    spec.buffers.push_back({c, sizes.size_of(c)});
  }
  return spec;
}

PayloadSpec generate_skew(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                          BufferCategory bias, std::uint64_t seed) {
  check_common(categories, count, sizes);
  if (categories.size() < 2) throw ConfigError("skew scheme needs at least two buffer categories");
  if (!categories.contains(bias)) {
    throw ConfigError("skew bias category '" + std::string(to_string(bias)) + "' is not among the chosen categories");
  }

  // Bias first, then the rest largest-first; weights 6, 3, 1 in that order.
  std::vector<BufferCategory> order{bias};
  for (auto c : categories.descending())
    if (c != bias) order.push_back(c);
  constexpr std::array<std::size_t, 3> kWeights = {6, 3, 1};
  std::size_t weight_sum = 0;
  for (std::size_t k = 0; k < order.size(); ++k) weight_sum += kWeights[k];

  // Largest-remainder apportionment in exact integer arithmetic.
  std::vector<std::size_t> counts(order.size());
  std::vector<std::size_t> remainders(order.size());
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t scaled = count * kWeights[k];
    counts[k] = scaled / weight_sum;
    remainders[k] = scaled % weight_sum;
    assigned += counts[k];
  }
  std::vector<std::size_t> rank(order.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  // Stable sort keeps the bias-first order for ties.
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t r = 0; assigned < count; ++r, ++assigned) ++counts[rank[r]];

  return spec_from_counts(Scheme::Skew, order, counts, sizes, seed);
}

PayloadSpec generate_custom(std::span<const std::uint32_t> sizes, std::uint64_t seed) {
  if (sizes.empty()) throw ConfigError("custom payload needs at least one buffer size");
  PayloadSpec spec;
  spec.scheme = Scheme::Custom;
  spec.seed = seed;
  for (auto s : sizes) spec.buffers.push_back({categorize(s), s});
  return spec;
}

Payload::Payload(PayloadSpec spec, std::vector<Buffer> buffers)
    : spec_(std::move(spec)), buffers_(std::move(buffers)) {
  rebuild_views();
}

Payload::Payload(const Payload& other) : spec_(other.spec_), buffers_(other.buffers_) { rebuild_views(); }

Payload& Payload::operator=(const Payload& other) {
  if (this != &other) {
    spec_ = other.spec_;
    buffers_ = other.buffers_;
    rebuild_views();
  }
  return *this;
}

void Payload::rebuild_views() {
  views_.clear();
  views_.reserve(buffers_.size());
  for (const auto& b : buffers_) views_.emplace_back(b);
}

std::uint64_t Payload::total_bytes() const {
  std::uint64_t total = 0;
  for (const auto& b : buffers_) total += b.size();
  return total;
}

Payload materialize(const PayloadSpec& spec) {
  std::vector<Buffer> buffers;
  buffers.reserve(spec.buffers.size());
  for (std::size_t i = 0; i < spec.buffers.size(); ++i) {
    Buffer buf(spec.buffers[i].size);
    fill_stream(buffer_stream_seed(spec.seed, i), buf);
    buffers.push_back(std::move(buf));
  }
  return Payload(spec, std::move(buffers));
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Rejection on the top partial block.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return v % bound;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t buffer_stream_seed(std::uint64_t payload_seed, std::size_t index) {
  return mix64(payload_seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1)));
}

void fill_stream(std::uint64_t stream_seed, std::span<std::uint8_t> out) {
  SplitMix64 rng(stream_seed);
  std::size_t i = 0;
  std::uint8_t word[8];
  for (; i + 8 <= out.size(); i += 8) {
    const std::uint64_t v = rng.next();
    for (int b = 0; b < 8; ++b) word[b] = static_cast<std::uint8_t>(v >> (8 * b));
    std::memcpy(out.data() + i, word, 8);
  }
  if (i < out.size()) {
    const std::uint64_t v = rng.next();
    for (std::size_t b = 0; i < out.size(); ++i, ++b) out[i] = static_cast<std::uint8_t>(v >> (8 * b));
  }
}

}  // namespace tfgb
