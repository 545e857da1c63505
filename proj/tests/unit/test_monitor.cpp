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

#include <cmath>
#include <thread>

#include "tfgb/error.hpp"
#include "tfgb/monitor.hpp"

using namespace tfgb;
using namespace std::chrono_literals;

TEST_SUITE("monitor") {

TEST_CASE("interval below 10 ms is rejected") {
  ByteCounters c;
  ResourceMonitor m(c, {.interval = 9ms});
  CHECK_THROWS_AS(m.start(), ConfigError);
}

TEST_CASE("sample count follows the interval") {
  ByteCounters c;
  ResourceMonitor m(c, {.interval = 20ms});
  const auto t0 = std::chrono::steady_clock::now();
  m.start();
  std::this_thread::sleep_for(1s);
  const auto series = m.stop(0.2s);
  const double elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  // Periodic samples at k*20 ms plus the final one taken by stop().
  const double expected = std::floor(elapsed_ms / 20.0) + 1;
  CHECK(static_cast<double>(series.samples.size()) >= expected - 3);
  CHECK(static_cast<double>(series.samples.size()) <= expected + 1);
  CHECK(series.dropped == 0);
}

TEST_CASE("series invariants and phase split") {
  ByteCounters c;
  ResourceMonitor m(c, {.interval = 10ms, .role = "ps0"});
  m.start();
  for (int i = 0; i < 30; ++i) {
    c.tx += 100;
    c.rx += 7;
    std::this_thread::sleep_for(5ms);
  }
  const auto series = m.stop(0.08s);
  CHECK(series.role == "ps0");
  REQUIRE(series.samples.size() >= 5);
  for (std::size_t i = 1; i < series.samples.size(); ++i) {
    const auto& a = series.samples[i - 1];
    const auto& b = series.samples[i];
    CHECK(a.t_ms <= b.t_ms);
    CHECK(a.net_tx_bytes <= b.net_tx_bytes);
    CHECK(a.net_rx_bytes <= b.net_rx_bytes);
  }
  bool saw_measure = false;
  for (const auto& s : series.samples) {
    if (s.cpu_percent) CHECK(*s.cpu_percent >= 0);
    CHECK(s.phase == (s.t_ms < 80 ? Phase::Warmup : Phase::Measure));
    if (s.phase == Phase::Measure) saw_measure = true;
    else CHECK_FALSE(saw_measure);
  }
  CHECK(series.samples.back().net_tx_bytes == 3000);
}

TEST_CASE("idle periods leave net counters flat") {
  ByteCounters c;
  c.tx = 5;
  ResourceMonitor m(c, {.interval = 10ms});
  m.start();
  std::this_thread::sleep_for(60ms);
  const auto series = m.stop(0s);
  for (const auto& s : series.samples) {
    CHECK(s.net_tx_bytes == 5);
    CHECK(s.net_rx_bytes == 0);
  }
}

TEST_CASE("stop right after start yields a valid series") {
  ByteCounters c;
  ResourceMonitor m(c, {});
  m.start();
  const auto series = m.stop(2s);
  CHECK(series.samples.size() <= 1);
  CHECK(series.dropped == 0);
}

TEST_CASE("missing OS statistics degrade to empty fields") {
  ByteCounters c;
  c.rx = 11;
  ResourceMonitor m(c, {.interval = 10ms}, [] { return ProcessStats{}; });
  m.start();
  std::this_thread::sleep_for(50ms);
  const auto series = m.stop(0s);
  REQUIRE_FALSE(series.samples.empty());
  for (const auto& s : series.samples) {
    CHECK_FALSE(s.cpu_percent.has_value());
    CHECK_FALSE(s.rss_bytes.has_value());
    CHECK(s.net_rx_bytes == 11);
  }
}

TEST_CASE("real statistics are available on Linux") {
  const auto s = read_self_stats();
  CHECK(s.cpu_seconds.has_value());
  REQUIRE(s.rss_bytes.has_value());
  CHECK(*s.rss_bytes > 0);
}

TEST_CASE("bounded buffer drops the oldest samples") {
  ByteCounters c;
  ResourceMonitor m(c, {.interval = 10ms, .capacity = 3});
  m.start();
  std::this_thread::sleep_for(120ms);
  const auto series = m.stop(0s);
  CHECK(series.samples.size() == 3);
  CHECK(series.dropped >= 5);
  // The retained samples are the newest ones.
  CHECK(series.samples.back().t_ms >= 100);
}

}
