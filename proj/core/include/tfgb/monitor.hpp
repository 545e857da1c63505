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

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tfgb/transport.hpp"

namespace tfgb {

enum class Phase : std::uint8_t { Warmup, Measure };

std::string_view to_string(Phase p);

struct ResourceSample {
  double t_ms = 0;
  // Empty when the OS does not expose the statistic.
  std::optional<double> cpu_percent;
  std::optional<std::uint64_t> rss_bytes;
  std::uint64_t net_tx_bytes = 0;
  std::uint64_t net_rx_bytes = 0;
  Phase phase = Phase::Warmup;

  friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

struct MonitorSeries {
  std::string role;
  std::vector<ResourceSample> samples;
  std::uint64_t dropped = 0;

  friend bool operator==(const MonitorSeries&, const MonitorSeries&) = default;
};

struct ProcessStats {
  std::optional<double> cpu_seconds;
  std::optional<std::uint64_t> rss_bytes;
};

// getrusage() CPU time and /proc/self/statm resident size.
ProcessStats read_self_stats();

using ProcessStatsReader = std::function<ProcessStats()>;

inline constexpr std::chrono::milliseconds kMinMonitorInterval{10};
inline constexpr std::chrono::milliseconds kDefaultMonitorInterval{100};

// Samples one process on a background thread. Net counters come from the
// process's transport ByteCounters, CPU and memory from `reader`.
class ResourceMonitor {
 public:
  struct Options {
    std::chrono::milliseconds interval = kDefaultMonitorInterval;
    // Oldest samples are dropped (and counted) beyond this.
    std::size_t capacity = 1 << 16;
    std::string role = "worker";
  };

  ResourceMonitor(const ByteCounters& counters, Options options, ProcessStatsReader reader = read_self_stats);
  ~ResourceMonitor();
  ResourceMonitor(const ResourceMonitor&) = delete;
  ResourceMonitor& operator=(const ResourceMonitor&) = delete;

  // Throws ConfigError for intervals under 10 ms.
  void start();
  // Takes a final sample, stops the thread and splits phases at
  // `warmup_boundary` (relative to start).
  MonitorSeries stop(std::chrono::duration<double> warmup_boundary);

 private:
  ResourceSample take_sample();
  void push(ResourceSample s);
  void run();

  const ByteCounters& counters_;
  Options options_;
  ProcessStatsReader reader_;

  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_wall_;
  std::optional<double> last_cpu_;

  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_requested_ = false;
  std::deque<ResourceSample> samples_;
  std::uint64_t dropped_ = 0;
  std::thread thread_;
};

}  // namespace tfgb
