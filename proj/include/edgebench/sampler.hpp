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

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "edgebench/clock.hpp"

namespace edgebench::sampler {

class SamplerError : public std::runtime_error {
 public:
  enum class Kind { kCounterSourceUnavailable, kNonMonotonicCounters, kProcessGone, kInvalidArgument };

  SamplerError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct TickPair {
  std::uint64_t busy_ticks = 0;
  std::uint64_t total_ticks = 0;
};

struct CpuCounters {
  std::vector<TickPair> per_core;
  TickPair aggregate;
  MonoTime captured_at{};
};

// Read /proc/stat (or another file with the same layout, for tests).
CpuCounters snapshot_cpu(const std::filesystem::path& stat_path = "/proc/stat");

// Parse the contents of a /proc/stat style table. busy = total - idle - iowait;
// guest time is already folded into user/nice and is not counted twice.
CpuCounters parse_proc_stat(const std::string& text, MonoTime captured_at);

// System-wide busy percentage between two snapshots. Returns 0 when no ticks
// elapsed. Throws kNonMonotonicCounters if any cumulative counter went backwards.
double cpu_percent(const CpuCounters& prev, const CpuCounters& cur);

// Resident set size of a process. Throws kProcessGone for exited or zombie
// processes.
std::uint64_t process_rss(pid_t pid);

// Sum of RSS over root_pid and all of its live descendants.
std::uint64_t process_tree_rss(pid_t root_pid);

// Direct children map built from /proc/<pid>/stat ppid fields.
std::vector<pid_t> descendants_of(pid_t root_pid);

enum class SampleFlag {
  kOk,
  kStall,       // spacing to the previous record exceeded 2x the cadence
  kReadFailed,  // CPU counters could not be read; cpu_pct is meaningless
};

struct SampleRecord {
  MonoTime t{};
  double cpu_pct = 0.0;
  std::optional<std::uint64_t> workload_rss_bytes;
  SampleFlag flag = SampleFlag::kOk;
};

struct SampleLog {
  std::chrono::nanoseconds interval{};
  std::vector<SampleRecord> records;
  ClockAnchor anchor{};
};

inline constexpr std::chrono::nanoseconds kMinInterval = std::chrono::milliseconds(10);
inline constexpr std::chrono::nanoseconds kDefaultInterval = std::chrono::seconds(1);

// Shared pid slot the orchestrator fills while the workload is alive. Zero
// means "no workload".
using WorkloadPidSlot = std::atomic<pid_t>;

// Sample CPU and (when the slot holds a pid) workload RSS every `interval`
// until `stop` is requested. The first snapshot is taken before returning the
// first record, so records start one interval after the call.
SampleLog run_sampler(std::chrono::nanoseconds interval, const WorkloadPidSlot* workload_pid,
                      std::stop_token stop);

// Owns one sampling thread. The log is handed over by stop().
class Sampler {
 public:
  Sampler(std::chrono::nanoseconds interval, const WorkloadPidSlot* workload_pid);
  ~Sampler();

  Sampler(const Sampler&) = delete;
  Sampler& operator=(const Sampler&) = delete;

  // Monotonic time of the sampler's baseline snapshot.
  MonoTime started_at() const { return started_at_; }

  SampleLog stop();

 private:
  std::chrono::nanoseconds interval_;
  const WorkloadPidSlot* workload_pid_;
  MonoTime started_at_{};
  std::optional<SampleLog> result_;
  std::jthread thread_;
};

void write_samples_csv(const SampleLog& log, const std::filesystem::path& path);
SampleLog read_samples_csv(const std::filesystem::path& path);

}  // namespace edgebench::sampler
