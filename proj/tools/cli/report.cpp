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

#include "cli/report.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <charconv>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "cli/config.hpp"
#include "tfgb/error.hpp"

namespace tfgb::cli {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

Environment Environment::capture() {
  Environment env;
  char host[256] = {};
  if (::gethostname(host, sizeof host - 1) == 0) env.hostname = host;
  utsname u{};
  if (::uname(&u) == 0) env.os = std::string(u.sysname) + " " + u.release + " " + u.machine;
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char ts[32];
  std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
  env.timestamp = ts;
  return env;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json latency_json(const LatencyStats& l) {
  return {{"count", l.count},   {"mean_us", l.mean_us}, {"min_us", l.min_us}, {"max_us", l.max_us},
          {"p50_us", l.p50_us}, {"p90_us", l.p90_us},   {"p99_us", l.p99_us}};
}

LatencyStats latency_from(const json& j) {
  LatencyStats l;
  l.count = j.at("count").get<std::uint64_t>();
  l.mean_us = j.at("mean_us").get<double>();
  l.min_us = j.at("min_us").get<double>();
  l.max_us = j.at("max_us").get<double>();
  l.p50_us = j.at("p50_us").get<double>();
  l.p90_us = j.at("p90_us").get<double>();
  l.p99_us = j.at("p99_us").get<double>();
  return l;
}

json bandwidth_json(const BandwidthResult& b) {
  return {{"rpc_count", b.rpc_count},
          {"content_bytes", b.content_bytes},
          {"measured_secs", b.measured_secs},
          {"mbytes_per_sec", b.mbytes_per_sec}};
}

BandwidthResult bandwidth_from(const json& j) {
  BandwidthResult b;
  b.rpc_count = j.at("rpc_count").get<std::uint64_t>();
  b.content_bytes = j.at("content_bytes").get<std::uint64_t>();
  b.measured_secs = j.at("measured_secs").get<double>();
  b.mbytes_per_sec = j.at("mbytes_per_sec").get<double>();
  return b;
}

json metrics_json(const std::vector<Metric>& metrics) {
  json arr = json::array();
  for (const auto& [name, value] : metrics) arr.push_back({{"name", name}, {"value", value}});
  return arr;
}

std::vector<Metric> metrics_from(const json& j) {
  std::vector<Metric> out;
  for (const auto& m : j) out.emplace_back(m.at("name").get<std::string>(), m.at("value").get<double>());
  return out;
}

}  // namespace

json to_json(const PayloadSpec& spec) {
  json buffers = json::array();
  for (const auto& b : spec.buffers) buffers.push_back({{"category", std::string(to_string(b.category))}, {"size", b.size}});
  return {{"scheme", std::string(to_string(spec.scheme))},
          {"seed", spec.seed},
          {"total_bytes", spec.total_bytes()},
          {"buffers", buffers}};
}

PayloadSpec spec_from_json(const json& j) {
  PayloadSpec spec;
  const auto scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (!scheme) throw Error("report: unknown scheme");
  spec.scheme = *scheme;
  spec.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& b : j.at("buffers")) {
    const auto cat = parse_category(b.at("category").get<std::string>());
    if (!cat) throw Error("report: unknown buffer category");
    spec.buffers.push_back({*cat, b.at("size").get<std::uint32_t>()});
  }
  return spec;
}

json to_json(const MonitorSeries& series) {
  json samples = json::array();
  for (const auto& s : series.samples) {
    samples.push_back({{"t_ms", s.t_ms},
                       {"cpu_percent", opt(s.cpu_percent)},
                       {"rss_bytes", opt(s.rss_bytes)},
                       {"net_tx_bytes", s.net_tx_bytes},
                       {"net_rx_bytes", s.net_rx_bytes},
                       {"phase", std::string(to_string(s.phase))}});
  }
  return {{"role", series.role}, {"dropped", series.dropped}, {"samples", samples}};
}

MonitorSeries series_from_json(const json& j) {
  MonitorSeries series;
  series.role = j.at("role").get<std::string>();
  series.dropped = j.at("dropped").get<std::uint64_t>();
  for (const auto& s : j.at("samples")) {
    ResourceSample r;
    r.t_ms = s.at("t_ms").get<double>();
    r.cpu_percent = opt_get<double>(s, "cpu_percent");
    r.rss_bytes = opt_get<std::uint64_t>(s, "rss_bytes");
    r.net_tx_bytes = s.at("net_tx_bytes").get<std::uint64_t>();
    r.net_rx_bytes = s.at("net_rx_bytes").get<std::uint64_t>();
    r.phase = s.at("phase").get<std::string>() == "warmup" ? Phase::Warmup : Phase::Measure;
    series.samples.push_back(r);
  }
  return series;
}

json to_json(const WorkerRepeat& w, bool with_resources) {
  json j = {{"repeat", w.repeat},
            {"worker", w.worker},
            {"ok", w.ok},
            {"error", w.error},
            {"rpc_count", w.rpc_count},
            {"per_ps_counts", w.per_ps_counts},
            {"measured_secs", w.measured_secs},
            {"wall_secs", w.wall_secs},
            {"first_sample_secs", w.first_sample_secs},
            {"last_sample_secs", w.last_sample_secs},
            {"verified_rpcs", w.verified_rpcs},
            {"net_tx_bytes", w.net_tx_bytes},
            {"net_rx_bytes", w.net_rx_bytes},
            {"content_hash", w.content_hash},
            {"latency", w.latency ? latency_json(*w.latency) : json(nullptr)},
            {"bandwidth", w.bandwidth ? bandwidth_json(*w.bandwidth) : json(nullptr)}};
  if (with_resources) j["resources"] = to_json(w.resources);
  return j;
}

WorkerRepeat worker_repeat_from_json(const json& j) {
  WorkerRepeat w;
  w.repeat = j.at("repeat").get<std::size_t>();
  w.worker = j.at("worker").get<std::size_t>();
  w.ok = j.at("ok").get<bool>();
  w.error = j.at("error").get<std::string>();
  w.rpc_count = j.at("rpc_count").get<std::uint64_t>();
  w.per_ps_counts = j.at("per_ps_counts").get<std::vector<std::uint64_t>>();
  w.measured_secs = j.at("measured_secs").get<double>();
  w.wall_secs = j.at("wall_secs").get<double>();
  w.first_sample_secs = j.at("first_sample_secs").get<double>();
  w.last_sample_secs = j.at("last_sample_secs").get<double>();
  w.verified_rpcs = j.at("verified_rpcs").get<std::uint64_t>();
  w.net_tx_bytes = j.at("net_tx_bytes").get<std::uint64_t>();
  w.net_rx_bytes = j.at("net_rx_bytes").get<std::uint64_t>();
  w.content_hash = j.at("content_hash").get<std::uint64_t>();
  if (!j.at("latency").is_null()) w.latency = latency_from(j.at("latency"));
  if (!j.at("bandwidth").is_null()) w.bandwidth = bandwidth_from(j.at("bandwidth"));
  if (j.contains("resources")) w.resources = series_from_json(j.at("resources"));
  return w;
}

BenchConfig config_from_json(const json& j) {
  const Layer layer = file_layer(j);
  return resolve(std::span<const Layer>(&layer, 1)).config;
}

json to_json(const ReportDocument& doc) {
  json repeats = json::array();
  json resources = json::array();
  for (const auto& ps : doc.ps_resources) resources.push_back(to_json(ps));
  for (const auto& r : doc.repeats) {
    json workers = json::array();
    for (const auto& w : r.workers) {
      workers.push_back(to_json(w, false));
      json series = to_json(w.resources);
      series["repeat"] = r.index;
      series["worker"] = w.worker;
      resources.push_back(std::move(series));
    }
    json t = nullptr;
    if (r.throughput) {
      t = {{"per_worker_counts", r.throughput->per_worker_counts},
           {"per_ps_counts", r.throughput->per_ps_counts},
           {"duration_secs", r.throughput->duration_secs},
           {"aggregate_rpcs_per_sec", r.throughput->aggregate_rpcs_per_sec}};
    }
    repeats.push_back({{"index", r.index},
                       {"ok", r.ok},
                       {"error", r.error},
                       {"metrics", metrics_json(r.metrics())},
                       {"throughput", t},
                       {"workers", workers}});
  }
  json averaged = nullptr;
  if (doc.averaged) {
    averaged = {{"successful", doc.averaged->successful},
                {"failed", doc.averaged->failed},
                {"means", metrics_json(doc.averaged->means)}};
  }
  return {{"schema_version", doc.schema_version},
          {"config", config_to_json(doc.config)},
          {"spec", to_json(doc.spec)},
          {"repeats", repeats},
          {"averaged", averaged},
          {"resources", resources},
          {"environment",
           {{"hostname", doc.environment.hostname},
            {"os", doc.environment.os},
            {"timestamp", doc.environment.timestamp}}}};
}

ReportDocument report_from_json(const json& j) {
  try {
    ReportDocument doc;
    doc.schema_version = j.at("schema_version").get<int>();
    if (doc.schema_version != kReportSchemaVersion) {
      throw Error("report: unsupported schema_version " + std::to_string(doc.schema_version));
    }
    doc.config = config_from_json(j.at("config"));
    doc.spec = spec_from_json(j.at("spec"));
    for (const auto& rj : j.at("repeats")) {
      RepeatResult r;
      r.index = rj.at("index").get<std::size_t>();
      r.ok = rj.at("ok").get<bool>();
      r.error = rj.at("error").get<std::string>();
      for (const auto& wj : rj.at("workers")) r.workers.push_back(worker_repeat_from_json(wj));
      if (!rj.at("throughput").is_null()) {
        const auto& tj = rj.at("throughput");
        ThroughputResult t;
        t.per_worker_counts = tj.at("per_worker_counts").get<std::vector<std::uint64_t>>();
        t.per_ps_counts = tj.at("per_ps_counts").get<std::vector<std::vector<std::uint64_t>>>();
        t.duration_secs = tj.at("duration_secs").get<double>();
        t.aggregate_rpcs_per_sec = tj.at("aggregate_rpcs_per_sec").get<double>();
        r.throughput = std::move(t);
      }
      doc.repeats.push_back(std::move(r));
    }
    if (!j.at("averaged").is_null()) {
      const auto& aj = j.at("averaged");
      Aggregate a;
      a.successful = aj.at("successful").get<std::size_t>();
      a.failed = aj.at("failed").get<std::size_t>();
      a.means = metrics_from(aj.at("means"));
      doc.averaged = std::move(a);
    }
    for (const auto& sj : j.at("resources")) {
      MonitorSeries series = series_from_json(sj);
      if (!sj.contains("repeat")) {
        doc.ps_resources.push_back(std::move(series));
        continue;
      }
      const auto rep = sj.at("repeat").get<std::size_t>();
      const auto worker = sj.at("worker").get<std::size_t>();
      bool placed = false;
      for (auto& r : doc.repeats) {
        if (r.index != rep) continue;
        for (auto& w : r.workers) {
          if (w.worker == worker) {
            w.resources = std::move(series);
            placed = true;
            break;
          }
        }
        break;
      }
      if (!placed) throw Error("report: resource series for unknown repeat/worker");
    }
    const auto& ej = j.at("environment");
    doc.environment = {ej.at("hostname").get<std::string>(), ej.at("os").get<std::string>(),
                       ej.at("timestamp").get<std::string>()};
    return doc;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::string emit_json(const ReportDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::string csv_header(const BenchConfig& cfg) {
  switch (cfg.benchmark) {
    case BenchmarkKind::Latency:
      return "repeat,worker,count,mean_us,min_us,max_us,p50_us,p90_us,p99_us";
    case BenchmarkKind::Bandwidth:
      return "repeat,worker,rpc_count,content_bytes,measured_secs,mbytes_per_sec";
    case BenchmarkKind::Throughput: {
      std::string h = "repeat,worker,rpc_count,measured_secs,rpcs_per_sec";
      for (std::size_t p = 0; p < cfg.num_ps; ++p) h += ",ps" + std::to_string(p) + "_rpcs";
      return h;
    }
  }
  return {};
}

std::string emit_csv(const ReportDocument& doc) {
  const BenchConfig& cfg = doc.config;
  const std::string header = csv_header(cfg);
  const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  std::string out = header + "\n";
  for (const auto& r : doc.repeats) {
    for (const auto& w : r.workers) {
      std::vector<std::string> cells = {std::to_string(r.index), std::to_string(w.worker)};
      if (w.ok) {
        if (cfg.benchmark == BenchmarkKind::Latency && w.latency) {
          const auto& l = *w.latency;
          cells.push_back(std::to_string(l.count));
          for (double v : {l.mean_us, l.min_us, l.max_us, l.p50_us, l.p90_us, l.p99_us}) cells.push_back(format_double(v));
        } else if (cfg.benchmark == BenchmarkKind::Bandwidth && w.bandwidth) {
          const auto& b = *w.bandwidth;
          cells.push_back(std::to_string(b.rpc_count));
          cells.push_back(std::to_string(b.content_bytes));
          cells.push_back(format_double(b.measured_secs));
          cells.push_back(format_double(b.mbytes_per_sec));
        } else if (cfg.benchmark == BenchmarkKind::Throughput) {
          cells.push_back(std::to_string(w.rpc_count));
          cells.push_back(format_double(w.measured_secs));
          cells.push_back(format_double(w.measured_secs > 0 ? static_cast<double>(w.rpc_count) / w.measured_secs : 0.0));
          for (auto c : w.per_ps_counts) cells.push_back(std::to_string(c));
        }
      }
      cells.resize(columns);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    }
  }
  return out;
}

void write_report(const ReportDocument& doc, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  auto write = [&dir](const char* name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.flush();
    if (!out) throw Error("cannot write '" + path.string() + "'");
  };
  write("report.json", emit_json(doc));
  write("report.csv", emit_csv(doc));
}

}  // namespace tfgb::cli
