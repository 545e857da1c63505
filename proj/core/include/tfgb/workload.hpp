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

// Payload generation: the Small/Medium/Large iovec buffer taxonomy, the
// Uniform/Random/Skew/Custom generation schemes, and deterministic
// materialization of a spec into byte buffers.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tfgb {

using Buffer = std::vector<std::uint8_t>;
using BufferView = std::span<const std::uint8_t>;

enum class BufferCategory : std::uint8_t { Small = 0, Medium = 1, Large = 2 };

inline constexpr std::uint64_t kSmallMin = 1;
inline constexpr std::uint64_t kMediumMin = 1024;
inline constexpr std::uint64_t kLargeMin = 1024 * 1024;
inline constexpr std::uint64_t kLargeMax = 10 * 1024 * 1024;

std::string_view to_string(BufferCategory c);
std::optional<BufferCategory> parse_category(std::string_view s);

// Throws RangeError for sizes outside [1, 10 MiB].
BufferCategory categorize(std::uint64_t size);

// Inclusive bounds of the category's size range.
std::uint64_t category_min(BufferCategory c);
std::uint64_t category_max(BufferCategory c);

// A subset of {Small, Medium, Large}. Iteration order is fixed by the
// accessor used, never by insertion order.
class CategorySet {
 public:
  constexpr CategorySet() = default;
  CategorySet(std::initializer_list<BufferCategory> cats);

  static CategorySet all() { return {BufferCategory::Small, BufferCategory::Medium, BufferCategory::Large}; }

  void insert(BufferCategory c) { bits_ |= bit(c); }
  bool contains(BufferCategory c) const { return (bits_ & bit(c)) != 0; }
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }

  std::vector<BufferCategory> ascending() const;
  std::vector<BufferCategory> descending() const;

  friend bool operator==(CategorySet, CategorySet) = default;

 private:
  static constexpr std::uint8_t bit(BufferCategory c) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)); }
  std::uint8_t bits_ = 0;
};

struct BufferSizeConfig {
  std::uint32_t small_bytes = 10;
  std::uint32_t medium_bytes = 10 * 1024;
  std::uint32_t large_bytes = 1024 * 1024;

  // Throws ConfigError naming the violated range.
  void validate() const;
  std::uint32_t size_of(BufferCategory c) const;

  friend bool operator==(const BufferSizeConfig&, const BufferSizeConfig&) = default;
};

enum class Scheme : std::uint8_t { Uniform, Random, Skew, Custom };

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view s);

struct BufferDesc {
  BufferCategory category;
  std::uint32_t size;

  friend bool operator==(const BufferDesc&, const BufferDesc&) = default;
};

struct PayloadSpec {
  Scheme scheme = Scheme::Uniform;
  std::vector<BufferDesc> buffers;
  std::uint64_t seed = 0;

  std::uint64_t total_bytes() const;
  std::size_t count(BufferCategory c) const;
  // Throws ConfigError if empty or a size falls outside its category range.
  void validate() const;

  friend bool operator==(const PayloadSpec&, const PayloadSpec&) = default;
};

PayloadSpec generate_uniform(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                             std::uint64_t seed);
PayloadSpec generate_random(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                            std::uint64_t seed);
PayloadSpec generate_skew(CategorySet categories, std::size_t count, const BufferSizeConfig& sizes,
                          BufferCategory bias, std::uint64_t seed);
// Explicit per-buffer sizes; categories are inferred with categorize().
PayloadSpec generate_custom(std::span<const std::uint32_t> sizes, std::uint64_t seed);

// Materialized payload. Owns the bytes; views() hands out non-owning spans
// for zero-copy encoding.
class Payload {
 public:
  Payload() = default;
  Payload(PayloadSpec spec, std::vector<Buffer> buffers);
  Payload(const Payload& other);
  Payload& operator=(const Payload& other);
  Payload(Payload&&) noexcept = default;
  Payload& operator=(Payload&&) noexcept = default;

  const PayloadSpec& spec() const { return spec_; }
  const std::vector<Buffer>& buffers() const { return buffers_; }
  std::span<const BufferView> views() const { return views_; }
  std::uint64_t total_bytes() const;

 private:
  void rebuild_views();

  PayloadSpec spec_;
  std::vector<Buffer> buffers_;
  std::vector<BufferView> views_;
};

Payload materialize(const PayloadSpec& spec);

// SplitMix64: the PRNG behind Random scheme draws and buffer contents.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  std::uint64_t next();
  // Uniform in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// SplitMix64 output finalizer.
std::uint64_t mix64(std::uint64_t z);
// Seed of the byte stream that fills buffer `index`.
std::uint64_t buffer_stream_seed(std::uint64_t payload_seed, std::size_t index);
// Fills `out` with the little-endian SplitMix64 stream seeded by `stream_seed`.
void fill_stream(std::uint64_t stream_seed, std::span<std::uint8_t> out);

}  // namespace tfgb
