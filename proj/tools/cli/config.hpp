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

// Command-line configuration. Every setting is a key named like its flag
// ("num-ps" for --num-ps); values come from four layers, highest first:
// flags, the JSON config file, TFGB_<KEY> environment variables, defaults.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfgb/bench.hpp"

namespace tfgb::cli {

enum class Role { Driver, Ps, Worker };

std::string_view to_string(Role r);

struct RoleSpec {
  Role role = Role::Driver;
  BenchConfig config;
  // Driver: report directory. Children: the JSON result file.
  std::string result_path = "tfgb-results";
  // PS or worker index for child roles.
  std::size_t index = 0;
  double startup_timeout_secs = 10.0;
  // Set when --help was requested; nothing else is meaningful then.
  std::optional<std::string> help;
};

// Raw key -> text values of one layer.
using Layer = std::map<std::string, std::string>;
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Keys accepted in every layer.
const std::vector<std::string>& config_keys();
// "num-ps" -> "TFGB_NUM_PS".
std::string env_name(const std::string& key);

std::optional<std::string> system_env(const std::string& name);

Layer env_layer(const EnvLookup& env);
// JSON object keyed by flag name. Arrays become comma-joined lists.
Layer file_layer(const nlohmann::json& doc);
Layer read_config_file(const std::string& path);

// Applies `layers` in order, later ones overriding earlier ones, on top of
// the defaults, and validates the result. Throws ConfigError.
RoleSpec resolve(std::span<const Layer> layers);

// argv without the program name.
RoleSpec parse_config(std::span<const std::string> args, const EnvLookup& env = system_env);

// The effective configuration in config-file form; resolve() of this
// document reproduces `cfg` exactly.
nlohmann::json config_to_json(const BenchConfig& cfg);

}  // namespace tfgb::cli
