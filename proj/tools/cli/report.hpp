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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfgb/bench.hpp"

namespace tfgb::cli {

inline constexpr int kReportSchemaVersion = 1;

struct Environment {
  std::string hostname;
  std::string os;
  // UTC, ISO 8601.
  std::string timestamp;

  static Environment capture();

  friend bool operator==(const Environment&, const Environment&) = default;
};

struct ReportDocument {
  int schema_version = kReportSchemaVersion;
  BenchConfig config;
  PayloadSpec spec;
  std::vector<RepeatResult> repeats;
  std::optional<Aggregate> averaged;
  // PS-side series. Worker series live inside `repeats`.
  std::vector<MonitorSeries> ps_resources;
  Environment environment;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

// Worker series are hoisted into the top-level "resources" list (tagged
// with repeat and worker) and reattached by from_json.
nlohmann::json to_json(const ReportDocument& doc);
ReportDocument report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PayloadSpec& spec);
PayloadSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MonitorSeries& series);
MonitorSeries series_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WorkerRepeat& w, bool with_resources = true);
WorkerRepeat worker_repeat_from_json(const nlohmann::json& j);
BenchConfig config_from_json(const nlohmann::json& j);

std::string emit_json(const ReportDocument& doc);
// One row per repeat per worker. Failed rows keep their keys and leave the
// metric cells empty.
std::string emit_csv(const ReportDocument& doc);
std::string csv_header(const BenchConfig& cfg);

// Writes <dir>/report.json and <dir>/report.csv, creating `dir`. Throws
// Error if anything cannot be written.
void write_report(const ReportDocument& doc, const std::string& dir);

// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace tfgb::cli
