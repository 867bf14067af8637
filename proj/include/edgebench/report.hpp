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

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "edgebench/harness.hpp"
#include "edgebench/metrics.hpp"
#include "edgebench/sampler.hpp"
#include "edgebench/shm.hpp"

namespace edgebench::report {

class ReportError : public std::runtime_error {
 public:
  enum class Kind { kMissingMetric, kInvalidProfile, kParse, kEmptyInput };

  ReportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct DeviceProfile {
  std::string label;
  std::string soc;
  std::string processor;
  unsigned cores = 1;
  double clock_ghz = 0.0;
  double memory_gb = 0.0;
  std::string notes;

  void validate() const;
  bool operator==(const DeviceProfile&) const = default;
};

// The two reference boards: BeagleBone AI-64 (TDA4VM) and Raspberry Pi 4
// (BCM2711).
std::vector<DeviceProfile> builtin_devices();

// {"devices": [{"label", "soc", "processor", "cores", "clock_ghz",
// "memory_gb", "notes"}]}
std::vector<DeviceProfile> load_devices(const std::filesystem::path& path);
nlohmann::json devices_to_json(std::span<const DeviceProfile> devices);
std::string render_devices(std::span<const DeviceProfile> devices);

inline constexpr std::array<const char*, 3> kRadarAxes = {metrics::kCpuDeltaPct, metrics::kLatencySeconds,
                                                          metrics::kMemPeakBytes};

struct RadarDevice {
  std::string label;
  std::array<double, 3> raw{};
  std::array<double, 3> v{};
  double area = 0.0;
  // Set when a negative CPU delta was drawn at 0.
  bool cpu_clamped = false;
};

struct RadarData {
  std::array<std::string, 3> axes{kRadarAxes[0], kRadarAxes[1], kRadarAxes[2]};
  std::vector<RadarDevice> devices;
};

// Each axis is divided by its maximum over the devices.
RadarData normalize_radar(std::span<const metrics::MetricsSummary> summaries);

// Triangle spanned by v along three axes 120 degrees apart.
double radar_area(const std::array<double, 3>& v);

// Rows sorted by device label, then metric name.
std::string emit_csv(std::span<const metrics::MetricsSummary> summaries);
std::string emit_json(std::span<const metrics::MetricsSummary> summaries);
std::vector<metrics::MetricsSummary> parse_csv(std::string_view text);
std::vector<metrics::MetricsSummary> parse_json(std::string_view text);

// Reads a summary file written by emit_csv or emit_json (picked by extension).
std::vector<metrics::MetricsSummary> load_summaries(const std::filesystem::path& path);

// Human-readable mean ± std per device; memory in MB (10^6 bytes).
std::string render_table(std::span<const metrics::MetricsSummary> summaries);

std::string emit_radar_svg(const RadarData& radar);
std::string emit_cpu_timeseries_svg(const sampler::SampleLog& log, std::span<const harness::PhaseWindow> windows);
std::string emit_rms_svg(std::span<const shm::RmsPoint> points, std::span<const shm::AnomalyEvent> events = {});

}  // namespace edgebench::report
