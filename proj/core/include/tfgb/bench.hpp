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

// The three benchmark drivers (point-to-point latency, point-to-point
// bandwidth, parameter-server throughput), their statistics, and averaging
// across repeats.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tfgb/monitor.hpp"
#include "tfgb/transport.hpp"
#include "tfgb/wire.hpp"
#include "tfgb/workload.hpp"

namespace tfgb {

enum class BenchmarkKind : std::uint8_t { Latency, Bandwidth, Throughput };
enum class Direction : std::uint8_t { Push, Pull };

std::string_view to_string(BenchmarkKind k);
std::optional<BenchmarkKind> parse_benchmark(std::string_view s);
std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

struct BenchConfig {
  BenchmarkKind benchmark = BenchmarkKind::Latency;
  std::string ip = "localhost";
  std::uint16_t port = kDefaultPort;
  // Explicit PS list; when empty, PS i lives at ip:port+i.
  std::vector<Endpoint> ps_endpoints;
  std::size_t num_ps = 1;
  std::size_t num_workers = 1;
  WireMode mode = WireMode::NonSerialized;
  Scheme scheme = Scheme::Uniform;
  std::size_t iovec_count = 10;
  BufferSizeConfig sizes;
  CategorySet categories = CategorySet::all();
  BufferCategory bias = BufferCategory::Large;
  // Scheme::Custom only.
  std::vector<std::uint32_t> custom_sizes;
  double warmup_secs = 2.0;
  double duration_secs = 10.0;
  std::uint64_t seed = 1;
  std::size_t repeats = 1;
  Direction direction = Direction::Push;
  unsigned monitor_interval_ms = 100;

  // Throws ConfigError naming the violated bound.
  void validate() const;
  std::vector<Endpoint> endpoints() const;
  PayloadSpec payload_spec() const;

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct LatencyStats {
  std::uint64_t count = 0;
  double mean_us = 0;
  double min_us = 0;
  double max_us = 0;
  double p50_us = 0;
  double p90_us = 0;
  double p99_us = 0;

  friend bool operator==(const LatencyStats&, const LatencyStats&) = default;
};

struct BandwidthResult {
  std::uint64_t rpc_count = 0;
  std::uint64_t content_bytes = 0;
  double measured_secs = 0;
  double mbytes_per_sec = 0;

  friend bool operator==(const BandwidthResult&, const BandwidthResult&) = default;
};

struct ThroughputResult {
  std::vector<std::uint64_t> per_worker_counts;
  // [worker][ps]
  std::vector<std::vector<std::uint64_t>> per_ps_counts;
  double duration_secs = 0;
  double aggregate_rpcs_per_sec = 0;

  friend bool operator==(const ThroughputResult&, const ThroughputResult&) = default;
};

// What one worker observed in one repeat.
struct WorkerRepeat {
  std::size_t repeat = 0;
  std::size_t worker = 0;
  bool ok = false;
  std::string error;

  std::uint64_t rpc_count = 0;
  std::vector<std::uint64_t> per_ps_counts;
  double measured_secs = 0;
  double wall_secs = 0;
  // Offsets from repeat start of the first and last recorded RPC starts.
  double first_sample_secs = 0;
  double last_sample_secs = 0;
  // RPCs whose response content was checked, warmup included.
  std::uint64_t verified_rpcs = 0;
  // Transport bytes during the measurement window.
  std::uint64_t net_tx_bytes = 0;
  std::uint64_t net_rx_bytes = 0;
  // FNV-1a over the payload content handed to the transport.
  std::uint64_t content_hash = 0;

  std::optional<LatencyStats> latency;
  std::optional<BandwidthResult> bandwidth;
  MonitorSeries resources;

  friend bool operator==(const WorkerRepeat&, const WorkerRepeat&) = default;
};

using Metric = std::pair<std::string, double>;

// One repeat across every worker.
struct RepeatResult {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  std::vector<WorkerRepeat> workers;
  std::optional<ThroughputResult> throughput;

  // Flat numeric view used for averaging and CSV/JSON summaries.
  std::vector<Metric> metrics() const;

  friend bool operator==(const RepeatResult&, const RepeatResult&) = default;
};

struct Aggregate {
  std::size_t successful = 0;
  std::size_t failed = 0;
  std::vector<Metric> means;

  std::optional<double> find(std::string_view name) const;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

// Nearest-rank percentiles over microsecond samples. Throws StatsError on
// empty input.
LatencyStats compute_stats(std::span<const double> samples_us);
// ceil(percent/100 * n)-th smallest of an ascending-sorted, non-empty range.
double nearest_rank(std::span<const double> sorted, unsigned percent);

std::uint64_t fnv1a64(std::span<const BufferView> buffers, std::uint64_t h = 0xcbf29ce484222325ULL);

// Runs every repeat of `cfg` as worker `worker_index`. Connections to all
// PS endpoints are opened up front (StartupError if any is unreachable);
// per-repeat failures are reported in the result, not thrown.
std::vector<WorkerRepeat> run_worker(const BenchConfig& cfg, std::size_t worker_index);

// Single-PS, single-worker drivers; throw ConfigError on other shapes.
std::vector<WorkerRepeat> run_latency(const BenchConfig& cfg);
std::vector<WorkerRepeat> run_bandwidth(const BenchConfig& cfg);
// All workers as threads of this process.
std::vector<RepeatResult> run_throughput(const BenchConfig& cfg);

// Lines per-worker repeats up by index. A repeat fails if any worker's did.
std::vector<RepeatResult> merge_repeats(const BenchConfig& cfg, const std::vector<std::vector<WorkerRepeat>>& by_worker);

// Mean of every metric over successful repeats. Throws Error if none succeeded.
Aggregate aggregate_runs(std::span<const RepeatResult> repeats);

}  // namespace tfgb
