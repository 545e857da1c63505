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

#include <span>
#include <string>

#include <json.hpp>

#include "cli/config.hpp"

namespace tfgb::cli {

// Worker exit status when at least one repeat failed but results were written.
inline constexpr int kExitPartialFailure = 3;
inline constexpr int kExitUsage = 2;

// Serves until SIGTERM/SIGINT. Prints "READY host:port" once listening.
int run_ps_role(const RoleSpec& spec);
int run_worker_role(const RoleSpec& spec);
// Spawns PS and worker children from `self_exe`, collects their results and
// writes the report. Returns 0 iff every repeat on every worker succeeded.
int run_driver(const RoleSpec& spec, const std::string& self_exe);

// Full command line entry point (argv without the program name).
int run_main(std::span<const std::string> args, const std::string& self_exe);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace tfgb::cli
