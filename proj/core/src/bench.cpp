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

#include "tfgb/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <exception>
#include <thread>

#include "tfgb/error.hpp"
#include "tfgb/rpc.hpp"

namespace tfgb {

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

std::vector<Connection> open_all(const std::vector<Endpoint>& endpoints, ByteCounters* counters) {
  std::vector<Connection> conns;
  conns.reserve(endpoints.size());
  for (const auto& ep : endpoints) conns.push_back(Connection::open(ep, counters));
  return conns;
}

bool same_content(const std::vector<Buffer>& got, std::span<const BufferView> want) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].size() != want[i].size()) return false;
    if (!want[i].empty() && std::memcmp(got[i].data(), want[i].data(), want[i].size()) != 0) return false;
  }
  return true;
}

// Timed RPC loop of one repeat. Throws on transport, protocol or integrity
// failure; the caller turns that into a failed repeat.
void run_repeat(const BenchConfig& cfg, std::vector<Connection>& conns, const Payload& payload,
                ByteCounters& counters, WorkerRepeat& out) {
  const bool pull = cfg.benchmark == BenchmarkKind::Throughput && cfg.direction == Direction::Pull;
  MsgType type = MsgType::PutReq;
  if (cfg.benchmark == BenchmarkKind::Latency) type = MsgType::EchoReq;
  if (pull) type = MsgType::GetReq;
  const std::span<const BufferView> request = pull ? std::span<const BufferView>{} : payload.views();

  std::vector<double> samples_us;
  out.per_ps_counts.assign(conns.size(), 0);

  const auto start = Clock::now();
  const auto warm_end = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.warmup_secs));
  const auto deadline =
      warm_end + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.duration_secs));

  bool measuring = false;
  Clock::time_point measure_start{};
  Clock::time_point last_end{};
  std::uint64_t tx0 = 0, rx0 = 0;
  std::size_t next_ps = 0;

  for (auto t = Clock::now(); t < deadline; t = Clock::now()) {
    if (!measuring && t >= warm_end) {
      measuring = true;
      measure_start = t;
      tx0 = counters.tx.load();
      rx0 = counters.rx.load();
      out.first_sample_secs = secs(t - start);
    }
    const std::size_t ps = next_ps;
    next_ps = (next_ps + 1) % conns.size();
    CallResult r = conns[ps].call(type, request, cfg.mode);

    // Echo and pull responses must carry the payload; ACKs carry nothing.
    if (type == MsgType::PutReq) {
      if (!r.buffers.empty()) throw IntegrityError("ACK carried a payload");
    } else {
      if (!same_content(r.buffers, payload.views())) {
        throw IntegrityError(std::string(to_string(r.header.type)) + " content differs from the expected payload");
      }
    }
    ++out.verified_rpcs;

    if (measuring) {
      last_end = Clock::now();
      ++out.rpc_count;
      ++out.per_ps_counts[ps];
      out.last_sample_secs = secs(t - start);
      if (cfg.benchmark == BenchmarkKind::Latency) {
        samples_us.push_back(std::chrono::duration<double, std::micro>(r.elapsed).count());
      }
    }
  }
  out.wall_secs = secs(Clock::now() - start);

  if (out.rpc_count == 0) throw Error("no RPC completed inside the measurement window");
  out.measured_secs = secs(last_end - measure_start);
  out.net_tx_bytes = counters.tx.load() - tx0;
  out.net_rx_bytes = counters.rx.load() - rx0;

  if (cfg.benchmark == BenchmarkKind::Latency) out.latency = compute_stats(samples_us);
  if (cfg.benchmark == BenchmarkKind::Bandwidth) {
    BandwidthResult bw;
    bw.rpc_count = out.rpc_count;
    bw.content_bytes = out.rpc_count * payload.total_bytes();
    bw.measured_secs = out.measured_secs;
    bw.mbytes_per_sec = static_cast<double>(bw.content_bytes) / bw.measured_secs / (1024.0 * 1024.0);
    out.bandwidth = bw;
  }
}

}  // namespace

std::string_view to_string(BenchmarkKind k) {
  switch (k) {
    case BenchmarkKind::Latency:
      return "latency";
    case BenchmarkKind::Bandwidth:
      return "bandwidth";
    case BenchmarkKind::Throughput:
      return "throughput";
  }
  return "?";
}

std::optional<BenchmarkKind> parse_benchmark(std::string_view s) {
  if (s == "latency") return BenchmarkKind::Latency;
  if (s == "bandwidth") return BenchmarkKind::Bandwidth;
  if (s == "throughput") return BenchmarkKind::Throughput;
  return std::nullopt;
}

std::string_view to_string(Direction d) { return d == Direction::Push ? "push" : "pull"; }

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "push") return Direction::Push;
  if (s == "pull") return Direction::Pull;
  return std::nullopt;
}

void BenchConfig::validate() const {
  if (num_ps < 1) throw ConfigError("num-ps must be at least 1");
  if (num_workers < 1) throw ConfigError("num-workers must be at least 1");
  if (benchmark != BenchmarkKind::Throughput && (num_ps != 1 || num_workers != 1)) {
    throw ConfigError(std::string(to_string(benchmark)) + " benchmark runs exactly one PS and one worker");
  }
  if (port < 1) throw ConfigError("port must be in [1, 65535]");
  if (ps_endpoints.empty() && port + (num_ps - 1) > 65535) {
    throw ConfigError("ports " + std::to_string(port) + ".." + std::to_string(port + num_ps - 1) +
                      " exceed the valid port range");
  }
  if (!ps_endpoints.empty() && ps_endpoints.size() != num_ps) {
    throw ConfigError("ps-endpoints lists " + std::to_string(ps_endpoints.size()) + " endpoints but num-ps is " +
                      std::to_string(num_ps));
  }
  if (iovec_count < 1) throw ConfigError("iovec-count must be at least 1");
  if (!(warmup_secs >= 0)) throw ConfigError("warmup must be non-negative");
  if (!(duration_secs > 0)) throw ConfigError("duration must be positive");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (monitor_interval_ms < kMinMonitorInterval.count()) throw ConfigError("monitor-interval must be at least 10 ms");
  payload_spec().validate();
}

std::vector<Endpoint> BenchConfig::endpoints() const {
  if (!ps_endpoints.empty()) return ps_endpoints;
  std::vector<Endpoint> eps;
  for (std::size_t i = 0; i < num_ps; ++i) eps.push_back({ip, static_cast<std::uint16_t>(port + i)});
  return eps;
}

PayloadSpec BenchConfig::payload_spec() const {
  switch (scheme) {
    case Scheme::Uniform:
      return generate_uniform(categories, iovec_count, sizes, seed);
    case Scheme::Random:
      return generate_random(categories, iovec_count, sizes, seed);
    case Scheme::Skew:
      return generate_skew(categories, iovec_count, sizes, bias, seed);
    case Scheme::Custom:
      return generate_custom(custom_sizes, seed);
  }
  throw ConfigError("unknown scheme");
}

std::vector<Metric> RepeatResult::metrics() const {
  std::vector<Metric> m;
  if (throughput) {
    std::uint64_t total = 0;
    for (auto c : throughput->per_worker_counts) total += c;
    m.emplace_back("total_rpcs", static_cast<double>(total));
    m.emplace_back("duration_secs", throughput->duration_secs);
    m.emplace_back("aggregate_rpcs_per_sec", throughput->aggregate_rpcs_per_sec);
    return m;
  }
  if (workers.empty()) return m;
  const WorkerRepeat& w = workers.front();
  if (w.latency) {
    const auto& l = *w.latency;
    m = {{"count", static_cast<double>(l.count)},
         {"mean_us", l.mean_us},
         {"min_us", l.min_us},
         {"max_us", l.max_us},
         {"p50_us", l.p50_us},
         {"p90_us", l.p90_us},
         {"p99_us", l.p99_us}};
  } else if (w.bandwidth) {
    const auto& b = *w.bandwidth;
    m = {{"rpc_count", static_cast<double>(b.rpc_count)},
         {"content_bytes", static_cast<double>(b.content_bytes)},
         {"measured_secs", b.measured_secs},
         {"mbytes_per_sec", b.mbytes_per_sec}};
  }
  return m;
}

std::optional<double> Aggregate::find(std::string_view name) const {
  for (const auto& [k, v] : means)
    if (k == name) return v;
  return std::nullopt;
}

double nearest_rank(std::span<const double> sorted, unsigned percent) {
  const std::size_t n = sorted.size();
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

LatencyStats compute_stats(std::span<const double> samples_us) {
  if (samples_us.empty()) throw StatsError("latency statistics need at least one sample");
  std::vector<double> sorted(samples_us.begin(), samples_us.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0;
  for (double v : sorted) sum += v;
  LatencyStats s;
  s.count = sorted.size();
  s.mean_us = sum / static_cast<double>(sorted.size());
  s.min_us = sorted.front();
  s.max_us = sorted.back();
  s.p50_us = nearest_rank(sorted, 50);
  s.p90_us = nearest_rank(sorted, 90);
  s.p99_us = nearest_rank(sorted, 99);
  return s;
}

std::uint64_t fnv1a64(std::span<const BufferView> buffers, std::uint64_t h) {
  for (const auto& b : buffers) {
    for (std::uint8_t byte : b) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<WorkerRepeat> run_worker(const BenchConfig& cfg, std::size_t worker_index) {
  cfg.validate();
  const Payload payload = materialize(cfg.payload_spec());
  const std::uint64_t content_hash = fnv1a64(payload.views());
  const auto endpoints = cfg.endpoints();

  ByteCounters counters;
  std::vector<Connection> conns;
  try {
    conns = open_all(endpoints, &counters);
  } catch (const ConnectError& e) {
    throw StartupError(std::string("worker ") + std::to_string(worker_index) + ": " + e.what());
  }

  std::vector<WorkerRepeat> results;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    WorkerRepeat out;
    out.repeat = r;
    out.worker = worker_index;
    out.content_hash = content_hash;

    ResourceMonitor::Options mopts;
    mopts.interval = std::chrono::milliseconds(cfg.monitor_interval_ms);
    mopts.role = "worker" + std::to_string(worker_index);
    ResourceMonitor monitor(counters, mopts);
    monitor.start();
    try {
      if (conns.empty()) conns = open_all(endpoints, &counters);
      run_repeat(cfg, conns, payload, counters, out);
      out.ok = true;
    } catch (const Error& e) {
      out.ok = false;
      out.error = e.what();
      out.latency.reset();
      out.bandwidth.reset();
      // Reconnect before the next repeat.
      conns.clear();
    }
    out.resources = monitor.stop(std::chrono::duration<double>(cfg.warmup_secs));
    results.push_back(std::move(out));
  }
  return results;
}

std::vector<WorkerRepeat> run_latency(const BenchConfig& cfg) {
  if (cfg.benchmark != BenchmarkKind::Latency) throw ConfigError("run_latency needs benchmark=latency");
  return run_worker(cfg, 0);
}

std::vector<WorkerRepeat> run_bandwidth(const BenchConfig& cfg) {
  if (cfg.benchmark != BenchmarkKind::Bandwidth) throw ConfigError("run_bandwidth needs benchmark=bandwidth");
  return run_worker(cfg, 0);
}

std::vector<RepeatResult> run_throughput(const BenchConfig& cfg) {
  if (cfg.benchmark != BenchmarkKind::Throughput) throw ConfigError("run_throughput needs benchmark=throughput");
  cfg.validate();
  std::vector<std::vector<WorkerRepeat>> by_worker(cfg.num_workers);
  std::vector<std::exception_ptr> errors(cfg.num_workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < cfg.num_workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        by_worker[w] = run_worker(cfg, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge_repeats(cfg, by_worker);
}

std::vector<RepeatResult> merge_repeats(const BenchConfig& cfg, const std::vector<std::vector<WorkerRepeat>>& by_worker) {
  std::vector<RepeatResult> out;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    RepeatResult rr;
    rr.index = r;
    rr.ok = true;
    for (std::size_t w = 0; w < by_worker.size(); ++w) {
      if (r >= by_worker[w].size()) {
        rr.ok = false;
        rr.error += "worker " + std::to_string(w) + ": missing result; ";
        continue;
      }
      const WorkerRepeat& wr = by_worker[w][r];
      if (!wr.ok) {
        rr.ok = false;
        rr.error += "worker " + std::to_string(w) + ": " + wr.error + "; ";
      }
      rr.workers.push_back(wr);
    }
    if (!rr.error.empty()) rr.error.resize(rr.error.size() - 2);
    if (rr.ok && cfg.benchmark == BenchmarkKind::Throughput) {
      ThroughputResult t;
      std::uint64_t total = 0;
      for (const auto& wr : rr.workers) {
        t.per_worker_counts.push_back(wr.rpc_count);
        t.per_ps_counts.push_back(wr.per_ps_counts);
        t.duration_secs = std::max(t.duration_secs, wr.measured_secs);
        total += wr.rpc_count;
      }
      t.aggregate_rpcs_per_sec = static_cast<double>(total) / t.duration_secs;
      rr.throughput = std::move(t);
    }
    out.push_back(std::move(rr));
  }
  return out;
}

Aggregate aggregate_runs(std::span<const RepeatResult> repeats) {
  Aggregate agg;
  std::vector<std::vector<Metric>> ok;
  for (const auto& r : repeats) {
    if (r.ok) {
      ok.push_back(r.metrics());
    } else {
      ++agg.failed;
    }
  }
  agg.successful = ok.size();
  if (ok.empty()) throw Error("no successful repeat to average");
  for (std::size_t m = 0; m < ok.front().size(); ++m) {
    double sum = 0;
    for (const auto& metrics : ok) sum += metrics.at(m).second;
    agg.means.emplace_back(ok.front()[m].first, sum / static_cast<double>(ok.size()));
  }
  return agg;
}

}  // namespace tfgb
