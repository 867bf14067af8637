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
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/harness.hpp"
#include "edgebench/sampler.hpp"

namespace edgebench::metrics {

class MetricsError : public std::runtime_error {
 public:
  enum class Kind { kEmptyWindow, kIdleBaselineUnavailable, kIncompleteRun, kNoMemorySamples, kAllRunsExcluded };

  MetricsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kDefaultIdleUnstablePct = 5.0;

// Mean cpu_pct of samples with window.start <= t < window.end. Records whose
// CPU read failed are skipped.
double phase_mean_cpu(const sampler::SampleLog& samples, const harness::PhaseWindow& window);

struct CpuDelta {
  double delta_pct = 0.0;
  double active_mean_pct = 0.0;
  double idle_mean_pct = 0.0;
  double idle_std_pct = 0.0;
  bool idle_unstable = false;
};

// Active mean minus the pooled pre+post idle mean. Not clamped; negative
// deltas are returned as-is and flagged unstable.
CpuDelta cpu_delta(const harness::RunRecord& run,
                   double idle_unstable_threshold_pct = kDefaultIdleUnstablePct);

// Seconds between Active.start and Active.end. Padding is never included.
double active_latency(const harness::RunRecord& run);

struct MemoryStats {
  std::uint64_t peak_bytes = 0;
  double mean_bytes = 0.0;
  std::vector<std::optional<std::uint64_t>> per_item_peaks;
};

MemoryStats memory_stats(const harness::RunRecord& run);

struct RunMetrics {
  std::size_t run_index = 0;
  std::optional<CpuDelta> cpu;
  std::optional<double> latency_seconds;
  std::optional<MemoryStats> memory;
  std::vector<double> per_item_latency_seconds;
  // Failed runs carry the reason they are excluded from aggregation.
  std::optional<std::string> excluded_reason;
  std::vector<std::string> notes;
};

// Computes every metric that is available for the run; unavailable ones are
// left empty with a note instead of failing the whole run.
RunMetrics compute_run_metrics(const harness::RunRecord& run,
                               double idle_unstable_threshold_pct = kDefaultIdleUnstablePct);

struct Stats {
  double mean = 0.0;
  double sample_std = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n = 0;
};

// Mean, n-1 standard deviation, min and max. Requires a non-empty span.
Stats describe(std::span<const double> values);

struct ExcludedRun {
  std::size_t run_index = 0;
  std::string reason;
};

inline constexpr const char* kCpuDeltaPct = "cpu_delta_pct";
inline constexpr const char* kLatencySeconds = "latency_seconds";
inline constexpr const char* kMemPeakBytes = "mem_peak_bytes";

struct MetricsSummary {
  std::string device_label;
  std::size_t n_runs = 0;
  std::optional<Stats> cpu_delta_pct;
  std::optional<Stats> latency_seconds;
  std::optional<Stats> mem_peak_bytes;
  std::optional<Stats> per_item_latency_seconds;
  std::vector<ExcludedRun> excluded_runs;

  const std::optional<Stats>* find(std::string_view metric) const;
};

MetricsSummary aggregate(std::span<const RunMetrics> per_run, const std::string& device_label);

}  // namespace edgebench::metrics
