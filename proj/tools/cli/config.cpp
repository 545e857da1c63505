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

#include "cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <CLI11.hpp>

#include "tfgb/error.hpp"

namespace tfgb::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    std::string item = text.substr(start, end - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text, std::uint64_t lo, std::uint64_t hi) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("--" + key + ": '" + text + "' is not a non-negative integer");
  }
  if (v < lo || v > hi) {
    throw ConfigError("--" + key + ": " + text + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("--" + key + ": '" + text + "' is not a number");
  }
  return v;
}

template <typename T, typename Parser>
T parse_enum(const std::string& key, const std::string& text, Parser parser, const char* allowed) {
  if (auto v = parser(text)) return *v;
  throw ConfigError("--" + key + ": '" + text + "' is not one of " + allowed);
}

const std::map<std::string, std::string>& key_help() {
  static const std::map<std::string, std::string> help = {
      {"benchmark", "latency | bandwidth | throughput"},
      {"ip", "PS host (default localhost)"},
      {"port", "First PS port; PS i listens on port+i (default 50001)"},
      {"num-ps", "Parameter-server processes (default 1)"},
      {"num-workers", "Worker processes (default 1)"},
      {"mode", "non-serialized | serialized (default non-serialized)"},
      {"scheme", "uniform | random | skew | custom (default uniform)"},
      {"iovec-count", "Buffers per payload (default 10)"},
      {"small", "Small buffer bytes, [1, 1024) (default 10)"},
      {"medium", "Medium buffer bytes, [1024, 1048576) (default 10240)"},
      {"large", "Large buffer bytes, [1048576, 10485760] (default 1048576)"},
      {"categories", "Comma list of small,medium,large (default all)"},
      {"bias", "Skew bias category (default large)"},
      {"warmup", "Warmup seconds per repeat (default 2)"},
      {"duration", "Measured seconds per repeat (default 10)"},
      {"seed", "Workload seed (default 1)"},
      {"repeats", "Repeats to run and average (default 1)"},
      {"direction", "Bandwidth direction: push | pull (default push)"},
      {"monitor-interval", "Resource sampling interval in ms, >= 10 (default 100)"},
      {"ps-endpoints", "Comma list of host:port, overrides ip/port placement"},
      {"custom-sizes", "Comma list of buffer sizes for --scheme custom"},
      {"output", "Driver report directory (default tfgb-results)"},
      {"role", "driver | ps | worker"},
      {"result-path", "Child result file"},
      {"ps-index", "Index of this PS"},
      {"worker-index", "Index of this worker"},
      {"startup-timeout", "Seconds to wait for PS readiness (default 10)"},
  };
  return help;
}

constexpr std::uint64_t kNoLimit = std::numeric_limits<std::uint32_t>::max();

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Driver:
      return "driver";
    case Role::Ps:
      return "ps";
    case Role::Worker:
      return "worker";
  }
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "benchmark", "ip",       "port",       "num-ps",          "num-workers", "mode",
      "scheme",    "iovec-count", "small",   "medium",          "large",       "categories",
      "bias",      "warmup",   "duration",   "seed",            "repeats",     "direction",
      "monitor-interval", "ps-endpoints", "custom-sizes", "output", "role", "result-path",
      "ps-index",  "worker-index", "startup-timeout",
  };
  return keys;
}

std::string env_name(const std::string& key) {
  std::string name = "TFGB_";
  for (char c : key) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

std::optional<std::string> system_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

Layer env_layer(const EnvLookup& env) {
  Layer layer;
  for (const auto& key : config_keys()) {
    if (auto v = env(env_name(key))) layer[key] = *v;
  }
  return layer;
}

Layer file_layer(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  const auto& keys = config_keys();
  Layer layer;
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("config file: unknown key '" + key + "'");
    auto scalar = [&key](const nlohmann::json& v) -> std::string {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number() || v.is_boolean()) return v.dump();
      throw ConfigError("config file: '" + key + "' must be a string, number or list");
    };
    if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += scalar(item);
      }
      layer[key] = joined;
    } else {
      layer[key] = scalar(value);
    }
  }
  return layer;
}

Layer read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return file_layer(doc);
}

RoleSpec resolve(std::span<const Layer> layers) {
  Layer merged;
  for (const auto& layer : layers)
    for (const auto& [k, v] : layer) merged[k] = v;

  RoleSpec spec;
  BenchConfig& cfg = spec.config;
  auto get = [&merged](const char* key) -> const std::string* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  if (auto v = get("benchmark"))
    cfg.benchmark = parse_enum<BenchmarkKind>("benchmark", *v, parse_benchmark, "latency|bandwidth|throughput");
  if (auto v = get("ip")) {
    if (v->empty()) throw ConfigError("--ip must not be empty");
    cfg.ip = *v;
  }
  if (auto v = get("port")) cfg.port = static_cast<std::uint16_t>(parse_uint("port", *v, 1, 65535));
  if (auto v = get("ps-endpoints")) {
    for (const auto& item : split_list(*v)) cfg.ps_endpoints.push_back(Endpoint::parse(item));
  }
  if (auto v = get("num-ps")) {
    cfg.num_ps = parse_uint("num-ps", *v, 1, kNoLimit);
  } else if (!cfg.ps_endpoints.empty()) {
    cfg.num_ps = cfg.ps_endpoints.size();
  }
  if (auto v = get("num-workers")) cfg.num_workers = parse_uint("num-workers", *v, 1, kNoLimit);
  if (auto v = get("mode")) cfg.mode = parse_enum<WireMode>("mode", *v, parse_mode, "non-serialized|serialized");
  if (auto v = get("scheme")) cfg.scheme = parse_enum<Scheme>("scheme", *v, parse_scheme, "uniform|random|skew|custom");
  if (auto v = get("iovec-count")) cfg.iovec_count = parse_uint("iovec-count", *v, 1, kNoLimit);
  if (auto v = get("small")) cfg.sizes.small_bytes = static_cast<std::uint32_t>(parse_uint("small", *v, 0, kNoLimit));
  if (auto v = get("medium")) cfg.sizes.medium_bytes = static_cast<std::uint32_t>(parse_uint("medium", *v, 0, kNoLimit));
  if (auto v = get("large")) cfg.sizes.large_bytes = static_cast<std::uint32_t>(parse_uint("large", *v, 0, kNoLimit));
  if (auto v = get("categories")) {
    CategorySet set;
    for (const auto& item : split_list(*v)) set.insert(parse_enum<BufferCategory>("categories", item, parse_category, "small|medium|large"));
    if (set.empty()) throw ConfigError("--categories must name at least one category");
    cfg.categories = set;
  }
  if (auto v = get("bias")) cfg.bias = parse_enum<BufferCategory>("bias", *v, parse_category, "small|medium|large");
  if (auto v = get("custom-sizes")) {
    for (const auto& item : split_list(*v)) {
      cfg.custom_sizes.push_back(static_cast<std::uint32_t>(parse_uint("custom-sizes", item, 1, kLargeMax)));
    }
  }
  if (auto v = get("warmup")) cfg.warmup_secs = parse_double("warmup", *v);
  if (auto v = get("duration")) cfg.duration_secs = parse_double("duration", *v);
  if (auto v = get("seed")) cfg.seed = parse_uint("seed", *v, 0, std::numeric_limits<std::uint64_t>::max());
  if (auto v = get("repeats")) cfg.repeats = parse_uint("repeats", *v, 1, kNoLimit);
  if (auto v = get("direction")) cfg.direction = parse_enum<Direction>("direction", *v, parse_direction, "push|pull");
  if (auto v = get("monitor-interval")) {
    cfg.monitor_interval_ms = static_cast<unsigned>(parse_uint("monitor-interval", *v, 10, kNoLimit));
  }

  if (auto v = get("role")) {
    if (*v == "driver") spec.role = Role::Driver;
    else if (*v == "ps") spec.role = Role::Ps;
    else if (*v == "worker") spec.role = Role::Worker;
    else throw ConfigError("--role: '" + *v + "' is not one of driver|ps|worker");
  }
  if (auto v = get("output")) spec.result_path = *v;
  if (spec.role != Role::Driver) {
    if (auto v = get("result-path")) {
      spec.result_path = *v;
    } else {
      spec.result_path.clear();
    }
  }
  if (auto v = get("ps-index"); v && spec.role == Role::Ps) spec.index = parse_uint("ps-index", *v, 0, kNoLimit);
  if (auto v = get("worker-index"); v && spec.role == Role::Worker) {
    spec.index = parse_uint("worker-index", *v, 0, kNoLimit);
  }
  if (auto v = get("startup-timeout")) spec.startup_timeout_secs = parse_double("startup-timeout", *v);

  cfg.validate();
  if (spec.role == Role::Ps && spec.index >= cfg.num_ps) {
    throw ConfigError("--ps-index " + std::to_string(spec.index) + " but only " + std::to_string(cfg.num_ps) + " PS");
  }
  if (spec.role == Role::Worker && spec.index >= cfg.num_workers) {
    throw ConfigError("--worker-index " + std::to_string(spec.index) + " but only " + std::to_string(cfg.num_workers) +
                      " workers");
  }
  if (!(spec.startup_timeout_secs > 0)) throw ConfigError("--startup-timeout must be positive");
  return spec;
}

RoleSpec parse_config(std::span<const std::string> args, const EnvLookup& env) {
  CLI::App app{"Parameter-server RPC micro-benchmark suite", "tfgb"};
  app.require_subcommand(0, 1);
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_keys()) options[key] = app.add_option("--" + key, values[key], key_help().at(key));
  std::string config_path;
  app.add_option("--config", config_path, "JSON file of key/value settings");

  std::vector<CLI::App*> drivers;
  for (const char* name : {"latency", "bandwidth", "throughput"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " benchmark (driver mode)");
    sub->fallthrough();
    drivers.push_back(sub);
  }
  std::string which;
  auto* role_cmd = app.add_subcommand("role", "Run one process of a manual deployment");
  role_cmd->add_option("which", which, "ps or worker")->required()->check(CLI::IsMember({"ps", "worker"}));
  role_cmd->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    RoleSpec spec;
    spec.help = app.help();
    return spec;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  Layer flags;
  for (const auto& [key, opt] : options)
    if (opt->count() > 0) flags[key] = values[key];
  for (auto* sub : drivers) {
    if (!sub->parsed()) continue;
    if (flags.count("benchmark") && flags["benchmark"] != sub->get_name()) {
      throw ConfigError("--benchmark " + flags["benchmark"] + " conflicts with subcommand '" + sub->get_name() + "'");
    }
    flags["benchmark"] = sub->get_name();
  }
  if (role_cmd->parsed()) flags["role"] = which;

  if (config_path.empty()) {
    if (auto v = env("TFGB_CONFIG")) config_path = *v;
  }
  std::vector<Layer> layers;
  layers.push_back(env_layer(env));
  if (!config_path.empty()) layers.push_back(read_config_file(config_path));
  layers.push_back(std::move(flags));
  return resolve(layers);
}

nlohmann::json config_to_json(const BenchConfig& cfg) {
  nlohmann::json j;
  j["benchmark"] = std::string(to_string(cfg.benchmark));
  j["ip"] = cfg.ip;
  j["port"] = cfg.port;
  if (!cfg.ps_endpoints.empty()) {
    std::vector<std::string> eps;
    for (const auto& e : cfg.ps_endpoints) eps.push_back(e.to_string());
    j["ps-endpoints"] = eps;
  }
  j["num-ps"] = cfg.num_ps;
  j["num-workers"] = cfg.num_workers;
  j["mode"] = std::string(to_string(cfg.mode));
  j["scheme"] = std::string(to_string(cfg.scheme));
  j["iovec-count"] = cfg.iovec_count;
  j["small"] = cfg.sizes.small_bytes;
  j["medium"] = cfg.sizes.medium_bytes;
  j["large"] = cfg.sizes.large_bytes;
  std::vector<std::string> cats;
  for (auto c : cfg.categories.ascending()) cats.emplace_back(to_string(c));
  j["categories"] = cats;
  j["bias"] = std::string(to_string(cfg.bias));
  if (!cfg.custom_sizes.empty()) j["custom-sizes"] = cfg.custom_sizes;
  j["warmup"] = cfg.warmup_secs;
  j["duration"] = cfg.duration_secs;
  j["seed"] = cfg.seed;
  j["repeats"] = cfg.repeats;
  j["direction"] = std::string(to_string(cfg.direction));
  j["monitor-interval"] = cfg.monitor_interval_ms;
  return j;
}

}  // namespace tfgb::cli
