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


#include <doctest.h>

#include <cstring>
#include <map>
#include <numeric>

#include "test_util.hpp"
#include "tfgb/error.hpp"
#include "tfgb/workload.hpp"

using namespace tfgb;
using tfgb::testing::Gen;
using tfgb::testing::RefSplitMix;

namespace {

constexpr auto S = BufferCategory::Small;
constexpr auto M = BufferCategory::Medium;
constexpr auto L = BufferCategory::Large;

// Sum of sizes by explicit multiplication, independent of total_bytes().
std::uint64_t sum_by_category(const PayloadSpec& spec, const BufferSizeConfig& sizes) {
  return spec.count(S) * std::uint64_t{sizes.small_bytes} + spec.count(M) * std::uint64_t{sizes.medium_bytes} +
         spec.count(L) * std::uint64_t{sizes.large_bytes};
}

// Largest-remainder apportionment over rationals, written with long double
// shares and an explicit tie order.
std::map<BufferCategory, std::size_t> largest_remainder(std::vector<std::pair<BufferCategory, int>> weights,
                                                        std::size_t count) {
  long double total = 0;
  for (auto& [c, w] : weights) total += w;
  std::map<BufferCategory, std::size_t> out;
  std::vector<std::pair<long double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const long double share = static_cast<long double>(count) * weights[i].second / total;
    const auto base = static_cast<std::size_t>(share);
    out[weights[i].first] = base;
    given += base;
    rem.emplace_back(share - base, i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first + 1e-12L; });
  for (std::size_t k = 0; given < count; ++k, ++given) out[weights[rem[k].second].first]++;
  return out;
}

}  // namespace

TEST_SUITE("workload") {

TEST_CASE("categorize maps each size range") {
  CHECK(categorize(10) == S);
  CHECK(categorize(1) == S);
  CHECK(categorize(1023) == S);
  CHECK(categorize(1024) == M);
  CHECK(categorize(1048575) == M);
  CHECK(categorize(1048576) == L);
  CHECK(categorize(10485760) == L);
  CHECK_THROWS_AS(categorize(0), RangeError);
  CHECK_THROWS_AS(categorize(10485761), RangeError);
}

TEST_CASE("categorize is a partition over sampled sizes") {
  Gen g(7);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t size = g.range(1, kLargeMax);
    const auto c = categorize(size);
    int hits = 0;
    for (auto cat : {S, M, L}) hits += size >= category_min(cat) && size <= category_max(cat);
    CHECK(hits == 1);
    CHECK(size >= category_min(c));
    CHECK(size <= category_max(c));
  }
  CHECK(category_max(S) + 1 == category_min(M));
  CHECK(category_max(M) + 1 == category_min(L));
}

TEST_CASE("size config validation names the violated range") {
  BufferSizeConfig ok;
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.small_bytes == 10);
  CHECK(ok.medium_bytes == 10240);
  CHECK(ok.large_bytes == 1048576);

  BufferSizeConfig bad;
  bad.small_bytes = 1024;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("[1, 1024)"), ConfigError);
  bad = {};
  bad.large_bytes = 10485761;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.medium_bytes = 1048576;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.small_bytes = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("uniform default composition and total") {
  const BufferSizeConfig sizes;
  const auto spec = generate_uniform(CategorySet::all(), 10, sizes, 1);
  CHECK(spec.count(S) == 4);
  CHECK(spec.count(M) == 3);
  CHECK(spec.count(L) == 3);
  CHECK(sum_by_category(spec, sizes) == 4 * 10 + 3 * 10240 + 3 * 1048576);
  CHECK(spec.total_bytes() == 3176488);
  // Round-robin order S, M, L, S, ...
  for (std::size_t i = 0; i < spec.buffers.size(); ++i) CHECK(spec.buffers[i].category == std::vector{S, M, L}[i % 3]);
}

TEST_CASE("uniform small cases") {
  const BufferSizeConfig sizes;
  auto one = generate_uniform({L}, 1, sizes, 0);
  REQUIRE(one.buffers.size() == 1);
  CHECK(one.buffers[0].size == 1048576);
  auto three = generate_uniform(CategorySet::all(), 3, sizes, 0);
  CHECK(three.count(S) == 1);
  CHECK(three.count(M) == 1);
  CHECK(three.count(L) == 1);
  CHECK_THROWS_AS(generate_uniform(CategorySet{}, 3, sizes, 0), ConfigError);
  CHECK_THROWS_AS(generate_uniform(CategorySet::all(), 0, sizes, 0), ConfigError);
}

TEST_CASE("skew default composition and total") {
  const BufferSizeConfig sizes;
  const auto spec = generate_skew(CategorySet::all(), 10, sizes, L, 1);
  CHECK(spec.count(L) == 6);
  CHECK(spec.count(M) == 3);
  CHECK(spec.count(S) == 1);
  CHECK(sum_by_category(spec, sizes) == 6 * 1048576 + 3 * 10240 + 10);
  CHECK(spec.total_bytes() == 6322186);
  // Bias first, then descending size.
  std::vector<BufferCategory> order;
  for (auto& b : spec.buffers) order.push_back(b.category);
  CHECK(order == std::vector{L, L, L, L, L, L, M, M, M, S});
}

TEST_CASE("skew with two categories follows largest remainder") {
  const BufferSizeConfig sizes;
  auto nine = generate_skew({M, L}, 9, sizes, L, 0);
  CHECK(nine.count(L) == 6);
  CHECK(nine.count(M) == 3);
  auto ten = generate_skew({M, L}, 10, sizes, L, 0);
  CHECK(ten.count(L) == 7);
  CHECK(ten.count(M) == 3);
  CHECK_THROWS_AS(generate_skew({L}, 10, sizes, L, 0), ConfigError);
  CHECK_THROWS_AS(generate_skew({S, M}, 10, sizes, L, 0), ConfigError);
}

TEST_CASE("skew matches a largest-remainder oracle for random shapes") {
  Gen g(99);
  const BufferSizeConfig sizes;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto cats = g.categories(2);
    const auto asc = cats.ascending();
    const auto bias = asc[g.range(0, asc.size() - 1)];
    const std::size_t count = g.range(1, 200);
    const auto spec = generate_skew(cats, count, sizes, bias, g.u64());

    std::vector<std::pair<BufferCategory, int>> weights = {{bias, 6}};
    const int rest[] = {3, 1};
    int k = 0;
    for (auto c : cats.descending())
      if (c != bias) weights.emplace_back(c, rest[k++]);
    const auto want = largest_remainder(weights, count);
    for (auto [c, n] : want) CHECK(spec.count(c) == n);
    CHECK(spec.buffers.size() == count);
    if (count % 10 == 0 && cats.size() == 3 && bias == L) {
      CHECK(spec.count(L) * 10 == count * 6);
      CHECK(spec.count(M) * 10 == count * 3);
      CHECK(spec.count(S) * 10 == count * 1);
    }
  }
}

TEST_CASE("random scheme is seeded and balanced") {
  const BufferSizeConfig sizes;
  CHECK(generate_random(CategorySet::all(), 10, sizes, 42) == generate_random(CategorySet::all(), 10, sizes, 42));
  CHECK_THROWS_AS(generate_random({S}, 10, sizes, 1), ConfigError);
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL, 12345ULL, 0xDEADBEEFULL}) {
    const auto spec = generate_random({S, L}, 10000, sizes, seed);
    const double frac = static_cast<double>(spec.count(L)) / 10000.0;
    CHECK(frac >= 0.45);
    CHECK(frac <= 0.55);
  }
}

TEST_CASE("scheme properties over random inputs") {
  Gen g(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    BufferSizeConfig sizes;
    sizes.small_bytes = static_cast<std::uint32_t>(g.range(1, 1023));
    sizes.medium_bytes = static_cast<std::uint32_t>(g.range(1024, 1048575));
    sizes.large_bytes = static_cast<std::uint32_t>(g.range(1048576, 10485760));
    const std::size_t count = g.range(1, 64);
    const auto seed = g.u64();

    const auto cats = g.categories(1);
    const auto u = generate_uniform(cats, count, sizes, seed);
    std::size_t lo = count, hi = 0, sum = 0;
    for (auto c : cats.ascending()) {
      lo = std::min(lo, u.count(c));
      hi = std::max(hi, u.count(c));
      sum += u.count(c);
    }
    CHECK(hi - lo <= 1);
    CHECK(sum == count);

    const auto cats2 = g.categories(2);
    for (const auto& spec : {generate_random(cats2, count, sizes, seed),
                             generate_skew(cats2, count, sizes, cats2.ascending().back(), seed)}) {
      CHECK(spec.count(S) + spec.count(M) + spec.count(L) == count);
      for (const auto& b : spec.buffers) {
        CHECK(categorize(b.size) == b.category);
        CHECK(cats2.contains(b.category));
      }
      CHECK_NOTHROW(spec.validate());
    }
  }
}

TEST_CASE("custom scheme infers categories") {
  const std::vector<std::uint32_t> sizes = {5, 2048, 1048576};
  const auto spec = generate_custom(sizes, 3);
  REQUIRE(spec.buffers.size() == 3);
  CHECK(spec.buffers[0].category == S);
  CHECK(spec.buffers[1].category == M);
  CHECK(spec.buffers[2].category == L);
  CHECK(spec.total_bytes() == 5 + 2048 + 1048576);
  const std::vector<std::uint32_t> bad = {0};
  CHECK_THROWS(generate_custom(bad, 0));
}

TEST_CASE("SplitMix64 matches the reference vector") {
  SplitMix64 rng(1234567);
  CHECK(rng.next() == 6457827717110365317ULL);
  RefSplitMix ref{987654321};
  SplitMix64 lib(987654321);
  for (int i = 0; i < 1000; ++i) CHECK(lib.next() == ref.next());
}

TEST_CASE("below() stays in range") {
  SplitMix64 rng(5);
  for (std::uint64_t bound : {1ULL, 2ULL, 3ULL, 7ULL, 1000ULL, (1ULL << 63) + 5})
    for (int i = 0; i < 200; ++i) CHECK(rng.below(bound) < bound);
}

TEST_CASE("materialize fills the seeded little-endian stream") {
  const auto spec = generate_uniform(CategorySet::all(), 5, BufferSizeConfig{}, 77);
  const Payload p = materialize(spec);
  REQUIRE(p.buffers().size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& buf = p.buffers()[i];
    CHECK(buf.size() == spec.buffers[i].size);
    // Oracle: reference generator seeded per the buffer stream rule.
    RefSplitMix stream{tfgb::testing::ref_mix(77 ^ (0x9E3779B97F4A7C15ULL * (i + 1)))};
    std::vector<std::uint8_t> want(buf.size());
    for (std::size_t off = 0; off < want.size(); off += 8) {
      const std::uint64_t v = stream.next();
      for (std::size_t b = 0; b < 8 && off + b < want.size(); ++b) want[off + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
    CHECK(buf == want);
  }
}

TEST_CASE("materialize is deterministic and seed-sensitive") {
  const auto a = generate_skew(CategorySet::all(), 10, BufferSizeConfig{}, L, 5);
  auto b = a;
  b.seed = 6;
  const Payload pa1 = materialize(a), pa2 = materialize(a), pb = materialize(b);
  CHECK(pa1.buffers() == pa2.buffers());
  CHECK(std::memcmp(pa1.buffers()[0].data(), pb.buffers()[0].data(), 8) != 0);
  CHECK(pa1.total_bytes() == a.total_bytes());

  const std::vector<std::uint32_t> ten = {10};
  const Payload small = materialize(generate_custom(ten, 1));
  CHECK(small.total_bytes() == 10);
}

TEST_CASE("payload copies keep views on their own buffers") {
  const Payload a = materialize(generate_uniform(CategorySet::all(), 3, BufferSizeConfig{}, 1));
  Payload b = a;
  REQUIRE(b.views().size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(b.views()[i].data() == b.buffers()[i].data());
    CHECK(b.views()[i].data() != a.views()[i].data());
  }
  Payload c = std::move(b);
  CHECK(c.views()[0].data() == c.buffers()[0].data());
}

TEST_CASE("name parsing") {
  CHECK(parse_category("large") == L);
  CHECK(parse_scheme("skew") == Scheme::Skew);
  CHECK_FALSE(parse_scheme("zipf").has_value());
  CHECK(to_string(Scheme::Custom) == "custom");
}

}
