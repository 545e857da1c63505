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

#include "tfgb/monitor.hpp"

#include <sys/resource.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include "tfgb/error.hpp"

namespace tfgb {

std::string_view to_string(Phase p) { return p == Phase::Warmup ? "warmup" : "measure"; }

ProcessStats read_self_stats() {
  ProcessStats stats;
  rusage ru{};
  if (::getrusage(RUSAGE_SELF, &ru) == 0) {
    stats.cpu_seconds = static_cast<double>(ru.ru_utime.tv_sec + ru.ru_stime.tv_sec) +
                        static_cast<double>(ru.ru_utime.tv_usec + ru.ru_stime.tv_usec) * 1e-6;
  }
  std::ifstream statm("/proc/self/statm");
  std::uint64_t size_pages = 0, resident_pages = 0;
  if (statm >> size_pages >> resident_pages) {
    stats.rss_bytes = resident_pages * static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
  }
  return stats;
}

ResourceMonitor::ResourceMonitor(const ByteCounters& counters, Options options, ProcessStatsReader reader)
    : counters_(counters), options_(std::move(options)), reader_(std::move(reader)) {}

ResourceMonitor::~ResourceMonitor() {
  if (thread_.joinable()) {
    {
      std::lock_guard lock(mu_);
      stop_requested_ = true;
    }
    cv_.notify_all();
    thread_.join();
  }
}

void ResourceMonitor::start() {
  if (options_.interval < kMinMonitorInterval) {
    throw ConfigError("monitor interval " + std::to_string(options_.interval.count()) + " ms is below 10 ms");
  }
  start_ = std::chrono::steady_clock::now();
  last_wall_ = start_;
  last_cpu_ = reader_().cpu_seconds;
  stop_requested_ = false;
  samples_.clear();
  dropped_ = 0;
  thread_ = std::thread([this] { run(); });
}

ResourceSample ResourceMonitor::take_sample() {
  const auto now = std::chrono::steady_clock::now();
  const ProcessStats stats = reader_();
  ResourceSample s;
  s.t_ms = std::chrono::duration<double, std::milli>(now - start_).count();
  s.rss_bytes = stats.rss_bytes;
  if (stats.cpu_seconds && last_cpu_) {
    const double wall = std::chrono::duration<double>(now - last_wall_).count();
    const double cpu = *stats.cpu_seconds - *last_cpu_;
    s.cpu_percent = wall > 0 ? std::max(0.0, 100.0 * cpu / wall) : 0.0;
  }
  last_cpu_ = stats.cpu_seconds;
  last_wall_ = now;
  s.net_tx_bytes = counters_.tx.load(std::memory_order_relaxed);
  s.net_rx_bytes = counters_.rx.load(std::memory_order_relaxed);
  return s;
}

void ResourceMonitor::push(ResourceSample s) {
  std::lock_guard lock(mu_);
  if (samples_.size() >= options_.capacity) {
    samples_.pop_front();
    ++dropped_;
  }
  samples_.push_back(s);
}

void ResourceMonitor::run() {
  for (std::uint64_t k = 1;; ++k) {
    const auto due = start_ + k * options_.interval;
    {
      std::unique_lock lock(mu_);
      if (cv_.wait_until(lock, due, [this] { return stop_requested_; })) return;
    }
    push(take_sample());
  }
}

MonitorSeries ResourceMonitor::stop(std::chrono::duration<double> warmup_boundary) {
  if (thread_.joinable()) {
    {
      std::lock_guard lock(mu_);
      stop_requested_ = true;
    }
    cv_.notify_all();
    thread_.join();
    push(take_sample());
  }
  MonitorSeries series;
  series.role = options_.role;
  series.dropped = dropped_;
  const double boundary_ms = std::chrono::duration<double, std::milli>(warmup_boundary).count();
  series.samples.assign(samples_.begin(), samples_.end());
  for (auto& s : series.samples) s.phase = s.t_ms < boundary_ms ? Phase::Warmup : Phase::Measure;
  samples_.clear();
  return series;
}

}  // namespace tfgb
