// Copyright 2026 The edgebench Authors
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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgebench/harness.hpp"
#include "edgebench/shm.hpp"
#include "edgebench/spool.hpp"

namespace edgebench::config {

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { kSyntaxError, kUnknownKey, kInvalidValue };

  ConfigError(Kind kind, std::string key_path, const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : std::runtime_error(what), kind_(kind), key_path_(std::move(key_path)), line_(line), column_(column) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& key_path() const noexcept { return key_path_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  Kind kind_;
  std::string key_path_;
  std::size_t line_;
  std::size_t column_;
};

struct SpoolSection {
  std::filesystem::path inbox;
  std::filesystem::path journal;
  spool::SinkConfig sink;
  double scan_interval_seconds = 10.0;
  double stability_interval_seconds = 2.0;

  spool::SpoolerConfig to_spooler_config() const;
};

struct RmsSection {
  std::size_t window_len = 1000;
  double default_dt_seconds = 1.0;
};

struct DetectorSection {
  shm::DetectorConfig detector;
  std::optional<std::filesystem::path> state_file;
};

struct MetricsSection {
  double idle_unstable_threshold_pct = 5.0;
};

struct CliConfig {
  std::optional<harness::BenchmarkPlan> plan;
  std::optional<DetectorSection> detector;
  std::optional<SpoolSection> spool;
  std::optional<RmsSection> rms;
  std::optional<MetricsSection> metrics;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::string> log_level;
};

// Parses JSON text (comments allowed). Every unknown key is an error; absent
// sections stay empty and absent keys take their module defaults.
CliConfig parse_config(std::string_view text);
CliConfig load_config(const std::filesystem::path& path);

// Raw document form, so overrides can be applied before the strict parse.
nlohmann::json parse_document(std::string_view text);
CliConfig from_document(const nlohmann::json& doc);

// Sets `dotted` (e.g. "plan.repetitions_R") to `value`. The value is read as
// JSON when it parses as JSON, otherwise as a plain string.
void apply_override(nlohmann::json& doc, std::string_view dotted, std::string_view value);

}  // namespace edgebench::config
