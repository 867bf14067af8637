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

#include "edgebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace edgebench::metrics {

using harness::PhaseWindow;
using harness::RunRecord;
using sampler::SampleFlag;

namespace {

std::vector<double> cpu_in(const sampler::SampleLog& samples, const PhaseWindow& w) {
  std::vector<double> out;
  for (const auto& s : samples.records) {
    if (s.flag == SampleFlag::kReadFailed) continue;
    if (w.contains(s.t)) out.push_back(s.cpu_pct);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double phase_mean_cpu(const sampler::SampleLog& samples, const PhaseWindow& window) {
  auto v = cpu_in(samples, window);
  if (v.empty()) {
    throw MetricsError(MetricsError::Kind::kEmptyWindow,
                       fmt::format("no samples inside the {} window ({:.3f} s long)",
                                   harness::to_string(window.phase), window.seconds()));
  }
  return mean_of(v);
}

CpuDelta cpu_delta(const RunRecord& run, double idle_unstable_threshold_pct) {
  auto idle = cpu_in(run.samples, run.pre_pad);
  auto post = cpu_in(run.samples, run.post_pad);
  if (run.pre_pad.end <= run.pre_pad.start || run.post_pad.end <= run.post_pad.start ||
      idle.empty() || post.empty()) {
    throw MetricsError(MetricsError::Kind::kIdleBaselineUnavailable,
                       "idle baseline needs samples in both padding windows");
  }
  idle.insert(idle.end(), post.begin(), post.end());
  CpuDelta d;
  d.active_mean_pct = phase_mean_cpu(run.samples, run.active);
  d.idle_mean_pct = mean_of(idle);
  d.idle_std_pct = sample_std(idle, d.idle_mean_pct);
  d.delta_pct = d.active_mean_pct - d.idle_mean_pct;
  d.idle_unstable = d.idle_std_pct > idle_unstable_threshold_pct || d.delta_pct < 0;
  return d;
}

double active_latency(const RunRecord& run) {
  if (!run.measured() || run.active.end <= run.active.start) {
    throw MetricsError(MetricsError::Kind::kIncompleteRun,
                       fmt::format("run {} has no completed active window", run.run_index));
  }
  return run.active.seconds();
}

MemoryStats memory_stats(const RunRecord& run) {
  MemoryStats m;
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : run.samples.records) {
    if (!s.workload_rss_bytes || !run.active.contains(s.t)) continue;
    m.peak_bytes = std::max(m.peak_bytes, *s.workload_rss_bytes);
    sum += static_cast<double>(*s.workload_rss_bytes);
    ++n;
  }
  if (n == 0) {
    throw MetricsError(MetricsError::Kind::kNoMemorySamples,
                       fmt::format("run {}: no RSS samples in the active window; use a shorter "
                                   "sampling interval",
                                   run.run_index));
  }
  m.mean_bytes = sum / static_cast<double>(n);
  for (const auto& mark : run.item_marks) m.per_item_peaks.push_back(mark.peak_rss_bytes);
  return m;
}

RunMetrics compute_run_metrics(const RunRecord& run, double idle_unstable_threshold_pct) {
  RunMetrics rm;
  rm.run_index = run.run_index;
  if (run.status != harness::RunStatus::kCompleted) {
    rm.excluded_reason = harness::to_string(run.status);
    if (run.status == harness::RunStatus::kNonZeroExit) {
      rm.excluded_reason = fmt::format("nonzero_exit({})", run.workload_exit);
    }
    return rm;
  }
  rm.latency_seconds = active_latency(run);
  try {
    rm.cpu = cpu_delta(run, idle_unstable_threshold_pct);
  } catch (const MetricsError& e) {
    rm.notes.push_back(e.what());
  }
  try {
    rm.memory = memory_stats(run);
  } catch (const MetricsError& e) {
    rm.notes.push_back(e.what());
  }
  for (const auto& mark : run.item_marks) {
    rm.per_item_latency_seconds.push_back(seconds_between(mark.start, mark.end));
  }
  return rm;
}

Stats describe(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("describe() needs at least one value");
  Stats s;
  s.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sample_std = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding can push the mean of near-identical values just outside [min, max].
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

const std::optional<Stats>* MetricsSummary::find(std::string_view metric) const {
  if (metric == kCpuDeltaPct) return &cpu_delta_pct;
  if (metric == kLatencySeconds) return &latency_seconds;
  if (metric == kMemPeakBytes) return &mem_peak_bytes;
  if (metric == "per_item_latency_seconds") return &per_item_latency_seconds;
  return nullptr;
}

MetricsSummary aggregate(std::span<const RunMetrics> per_run, const std::string& device_label) {
  MetricsSummary s;
  s.device_label = device_label;
  std::vector<double> cpu, lat, mem, items;
  for (const auto& r : per_run) {
    if (r.excluded_reason) {
      s.excluded_runs.push_back({r.run_index, *r.excluded_reason});
      continue;
    }
    ++s.n_runs;
    if (r.cpu) cpu.push_back(r.cpu->delta_pct);
    if (r.latency_seconds) lat.push_back(*r.latency_seconds);
    if (r.memory) mem.push_back(static_cast<double>(r.memory->peak_bytes));
    items.insert(items.end(), r.per_item_latency_seconds.begin(), r.per_item_latency_seconds.end());
  }
  if (s.n_runs == 0) {
    throw MetricsError(MetricsError::Kind::kAllRunsExcluded,
                       fmt::format("all {} runs of '{}' were excluded", per_run.size(), device_label));
  }
  if (!cpu.empty()) s.cpu_delta_pct = describe(cpu);
  if (!lat.empty()) s.latency_seconds = describe(lat);
  if (!mem.empty()) s.mem_peak_bytes = describe(mem);
  if (!items.empty()) s.per_item_latency_seconds = describe(items);
  return s;
}

}  // namespace edgebench::metrics
