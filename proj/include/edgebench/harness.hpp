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

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgebench/clock.hpp"
#include "edgebench/markers.hpp"
#include "edgebench/sampler.hpp"

namespace edgebench::harness {

class HarnessError : public std::runtime_error {
 public:
  enum class Kind { kInvalidPlan, kArtifactWriteFailed };

  HarnessError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct WorkloadSpec {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, std::string> env;
  std::filesystem::path working_dir;
  std::vector<std::string> input_manifest;
};

struct BenchmarkPlan {
  WorkloadSpec workload;
  std::size_t batch_size = 100;
  std::size_t repetitions = 10;
  std::chrono::duration<double> padding{30.0};
  std::chrono::duration<double> sampling_interval{1.0};
  std::optional<std::string> pre_run_hook;
  std::string device_label = "device";
};

// Throws HarnessError(kInvalidPlan) describing the first violated rule.
void validate(const BenchmarkPlan& plan);

nlohmann::json plan_to_json(const BenchmarkPlan& plan);

// Short stable identifier of a plan, used as the artifact directory name.
std::string plan_hash(const BenchmarkPlan& plan);

enum class Phase { kPrePad, kActive, kPostPad };

struct PhaseWindow {
  Phase phase = Phase::kPrePad;
  MonoTime start{};
  MonoTime end{};

  double seconds() const { return seconds_between(start, end); }
  bool contains(MonoTime t) const { return start <= t && t < end; }
};

enum class RunStatus {
  kCompleted,
  kNonZeroExit,   // recorded with exit status, excluded from aggregates
  kSpawnFailed,
  kHookFailed,    // aborted before any measurement
  kAborted,       // operator abort; the run is void
};

const char* to_string(RunStatus status);
const char* to_string(Phase phase);

struct RunRecord {
  std::size_t run_index = 0;
  RunStatus status = RunStatus::kCompleted;
  PhaseWindow pre_pad{Phase::kPrePad};
  PhaseWindow active{Phase::kActive};
  PhaseWindow post_pad{Phase::kPostPad};
  sampler::SampleLog samples;
  std::vector<ItemMark> item_marks;
  // Exit code, or -signal when the workload was killed by a signal.
  int workload_exit = 0;
  std::vector<std::string> warnings;
  std::filesystem::path stdout_log;
  std::filesystem::path stderr_log;

  bool measured() const { return status == RunStatus::kCompleted || status == RunStatus::kNonZeroExit; }
};

struct HarnessOptions {
  // Root of the artifact tree; runs land in <root>/<plan-hash>/<run-index>/.
  std::filesystem::path output_root = "runs";
  // How long to keep reading workload stdout after it exits (orphaned
  // grandchildren may hold the pipe open).
  std::chrono::milliseconds drain_timeout{1000};
};

// One repetition of the padded protocol: hook, PrePad, workload, PostPad.
RunRecord execute_repetition(const BenchmarkPlan& plan, std::size_t run_index,
                             const HarnessOptions& options, std::stop_token stop = {});

// All R repetitions in order. Always returns exactly R records; runs that could
// not be measured are flagged, never dropped.
std::vector<RunRecord> run_plan(const BenchmarkPlan& plan, const HarnessOptions& options,
                                std::stop_token stop = {});

// Attach the maximum RSS sample inside each mark's [start, end] interval.
void attribute_item_peaks(std::vector<ItemMark>& marks, const sampler::SampleLog& samples);

std::filesystem::path run_directory(const BenchmarkPlan& plan, const HarnessOptions& options,
                                    std::size_t run_index);

// meta.json, samples.csv and marks.csv for a record. Also used to reload runs.
void write_run_artifacts(const RunRecord& record, const std::filesystem::path& dir);
RunRecord read_run_artifacts(const std::filesystem::path& dir);

}  // namespace edgebench::harness
