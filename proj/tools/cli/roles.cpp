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

#include "cli/roles.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "cli/report.hpp"
#include "tfgb/error.hpp"
#include "tfgb/monitor.hpp"
#include "tfgb/rpc.hpp"

namespace tfgb::cli {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw Error("cannot write '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot rename '" + tmp + "' to '" + path + "'");
}

int run_ps_role(const RoleSpec& spec) {
  const BenchConfig& cfg = spec.config;
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGTERM);
  sigaddset(&sigs, SIGINT);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  ServerConfig scfg;
  scfg.endpoint = cfg.endpoints().at(spec.index);
  scfg.response_spec = cfg.payload_spec();
  scfg.mode = cfg.mode;
  ParameterServer server(scfg);
  server.start();

  ResourceMonitor::Options mopts;
  mopts.interval = std::chrono::milliseconds(cfg.monitor_interval_ms);
  mopts.role = "ps" + std::to_string(spec.index);
  ResourceMonitor monitor(server.counters(), mopts);
  monitor.start();

  std::cout << "READY " << server.bound_endpoint().to_string() << std::endl;

  int sig = 0;
  sigwait(&sigs, &sig);
  MonitorSeries series = monitor.stop(std::chrono::duration<double>(cfg.warmup_secs));
  server.stop();

  json out = {{"role", "ps"},
              {"index", spec.index},
              {"config", config_to_json(cfg)},
              {"frames_served", server.frames_served()},
              {"connections_dropped", server.connections_dropped()},
              {"resources", to_json(series)}};
  if (spec.result_path.empty()) {
    std::cerr << "ps " << spec.index << ": served " << server.frames_served() << " frames\n";
  } else {
    write_json_file(spec.result_path, out);
  }
  return 0;
}

int run_worker_role(const RoleSpec& spec) {
  const BenchConfig& cfg = spec.config;
  const std::vector<WorkerRepeat> repeats = run_worker(cfg, spec.index);
  json list = json::array();
  bool all_ok = true;
  for (const auto& r : repeats) {
    list.push_back(to_json(r));
    all_ok = all_ok && r.ok;
  }
  json out = {{"role", "worker"}, {"index", spec.index}, {"config", config_to_json(cfg)}, {"repeats", list}};
  if (spec.result_path.empty()) {
    std::cout << out.dump(2) << std::endl;
  } else {
    write_json_file(spec.result_path, out);
  }
  for (const auto& r : repeats)
    if (!r.ok) std::cerr << "worker " << spec.index << " repeat " << r.repeat << " failed: " << r.error << '\n';
  return all_ok ? 0 : kExitPartialFailure;
}

int run_main(std::span<const std::string> args, const std::string& self_exe) {
  RoleSpec spec;
  try {
    spec = parse_config(args);
  } catch (const ConfigError& e) {
    std::cerr << "tfgb: " << e.what() << "\nRun 'tfgb --help' for usage.\n";
    return kExitUsage;
  }
  if (spec.help) {
    std::cout << *spec.help;
    return 0;
  }
  try {
    switch (spec.role) {
      case Role::Ps:
        return run_ps_role(spec);
      case Role::Worker:
        return run_worker_role(spec);
      case Role::Driver:
        return run_driver(spec, self_exe);
    }
  } catch (const ConfigError& e) {
    std::cerr << "tfgb " << to_string(spec.role) << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "tfgb " << to_string(spec.role) << ": " << e.what() << '\n';
  }
  return 1;
}

}  // namespace tfgb::cli
