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

#include "edgebench/sampler.hpp"

#include <unistd.h>

#include <charconv>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/os.h>

namespace edgebench::sampler {

namespace {

std::optional<std::string> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

// Fields after the closing paren of comm in /proc/<pid>/stat.
struct StatTail {
  char state = '?';
  pid_t ppid = 0;
};

std::optional<StatTail> read_stat_tail(pid_t pid) {
  auto text = slurp(fmt::format("/proc/{}/stat", pid));
  if (!text) return std::nullopt;
  auto close = text->rfind(')');
  if (close == std::string::npos || close + 2 >= text->size()) return std::nullopt;
  std::istringstream rest(text->substr(close + 2));
  StatTail tail;
  long ppid = 0;
  if (!(rest >> tail.state >> ppid)) return std::nullopt;
  tail.ppid = static_cast<pid_t>(ppid);
  return tail;
}

const std::uint64_t kPageSize = static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));

}  // namespace

CpuCounters parse_proc_stat(const std::string& text, MonoTime captured_at) {
  CpuCounters out;
  out.captured_at = captured_at;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    // Only "cpuN" rows; the summary "cpu" row is recomputed from the cores.
    if (line.size() < 4 || line.compare(0, 3, "cpu") != 0 || line[3] < '0' || line[3] > '9') continue;
    std::istringstream fields(line);
    std::string label;
    fields >> label;
    std::uint64_t v[8] = {};
    int n = 0;
    std::string tok;
    while (n < 8 && fields >> tok) {
      if (!parse_u64(tok, v[n])) {
        throw SamplerError(SamplerError::Kind::kCounterSourceUnavailable,
                           "malformed cpu row: " + line);
      }
      ++n;
    }
    if (n < 4) {
      throw SamplerError(SamplerError::Kind::kCounterSourceUnavailable, "short cpu row: " + line);
    }
    // user nice system idle iowait irq softirq steal
    std::uint64_t total = 0;
    for (int i = 0; i < n; ++i) total += v[i];
    std::uint64_t idle = v[3] + (n > 4 ? v[4] : 0);
    TickPair tp{total - idle, total};
    out.per_core.push_back(tp);
    out.aggregate.busy_ticks += tp.busy_ticks;
    out.aggregate.total_ticks += tp.total_ticks;
  }
  if (out.per_core.empty()) {
    throw SamplerError(SamplerError::Kind::kCounterSourceUnavailable, "no per-core cpu rows");
  }
  return out;
}

CpuCounters snapshot_cpu(const std::filesystem::path& stat_path) {
  auto text = slurp(stat_path);
  auto now = MonoClock::now();
  if (!text) {
    throw SamplerError(SamplerError::Kind::kCounterSourceUnavailable,
                       "cannot read " + stat_path.string());
  }
  return parse_proc_stat(*text, now);
}

double cpu_percent(const CpuCounters& prev, const CpuCounters& cur) {
  auto check = [](const TickPair& a, const TickPair& b) {
    if (b.busy_ticks < a.busy_ticks || b.total_ticks < a.total_ticks) {
      throw SamplerError(SamplerError::Kind::kNonMonotonicCounters,
                         "cumulative cpu counters went backwards");
    }
  };
  check(prev.aggregate, cur.aggregate);
  if (prev.per_core.size() == cur.per_core.size()) {
    for (std::size_t i = 0; i < cur.per_core.size(); ++i) check(prev.per_core[i], cur.per_core[i]);
  }
  const std::uint64_t total = cur.aggregate.total_ticks - prev.aggregate.total_ticks;
  const std::uint64_t busy = cur.aggregate.busy_ticks - prev.aggregate.busy_ticks;
  if (total == 0) return 0.0;
  double pct = 100.0 * static_cast<double>(busy) / static_cast<double>(total);
  return pct > 100.0 ? 100.0 : pct;
}

std::uint64_t process_rss(pid_t pid) {
  auto tail = read_stat_tail(pid);
  if (!tail || tail->state == 'Z' || tail->state == 'X') {
    throw SamplerError(SamplerError::Kind::kProcessGone, fmt::format("process {} is gone", pid));
  }
  auto statm = slurp(fmt::format("/proc/{}/statm", pid));
  if (!statm) {
    throw SamplerError(SamplerError::Kind::kProcessGone, fmt::format("process {} is gone", pid));
  }
  std::istringstream fields(*statm);
  std::uint64_t size = 0, resident = 0;
  if (!(fields >> size >> resident)) {
    throw SamplerError(SamplerError::Kind::kProcessGone,
                       fmt::format("unreadable statm for {}", pid));
  }
  return resident * kPageSize;
}

std::vector<pid_t> descendants_of(pid_t root_pid) {
  std::unordered_multimap<pid_t, pid_t> children;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator("/proc", ec)) {
    const auto name = entry.path().filename().string();
    long pid = 0;
    auto [p, perr] = std::from_chars(name.data(), name.data() + name.size(), pid);
    if (perr != std::errc() || p != name.data() + name.size()) continue;
    if (auto tail = read_stat_tail(static_cast<pid_t>(pid))) {
      children.emplace(tail->ppid, static_cast<pid_t>(pid));
    }
  }
  std::vector<pid_t> out;
  std::vector<pid_t> frontier{root_pid};
  while (!frontier.empty()) {
    pid_t parent = frontier.back();
    frontier.pop_back();
    auto [lo, hi] = children.equal_range(parent);
    for (auto it = lo; it != hi; ++it) {
      out.push_back(it->second);
      frontier.push_back(it->second);
    }
  }
  return out;
}

std::uint64_t process_tree_rss(pid_t root_pid) {
  std::uint64_t total = process_rss(root_pid);
  for (pid_t child : descendants_of(root_pid)) {
    try {
      total += process_rss(child);
    } catch (const SamplerError&) {
      // exited between enumeration and read
    }
  }
  return total;
}

namespace {

SampleLog sample_from(CpuCounters baseline, std::chrono::nanoseconds interval,
                      const WorkloadPidSlot* workload_pid, std::stop_token stop) {
  SampleLog log;
  log.interval = interval;
  log.anchor = ClockAnchor::now();

  std::mutex mu;
  std::condition_variable_any cv;
  CpuCounters prev = std::move(baseline);
  MonoTime last_t = prev.captured_at;
  MonoTime next = prev.captured_at + interval;

  auto take = [&] {
    SampleRecord rec;
    try {
      CpuCounters cur = snapshot_cpu();
      rec.cpu_pct = cpu_percent(prev, cur);
      rec.t = cur.captured_at;
      prev = std::move(cur);
    } catch (const SamplerError&) {
      rec.t = MonoClock::now();
      rec.flag = SampleFlag::kReadFailed;
    }
    if (workload_pid != nullptr) {
      if (pid_t pid = workload_pid->load(std::memory_order_acquire); pid > 0) {
        try {
          rec.workload_rss_bytes = process_tree_rss(pid);
        } catch (const SamplerError&) {
        }
      }
    }
    if (rec.t <= last_t) rec.t = last_t + std::chrono::nanoseconds(1);
    if (rec.flag == SampleFlag::kOk && rec.t - last_t > 2 * interval) rec.flag = SampleFlag::kStall;
    last_t = rec.t;
    log.records.push_back(std::move(rec));
  };

  while (true) {
    {
      std::unique_lock lock(mu);
      cv.wait_until(lock, stop, next, [] { return false; });
    }
    if (stop.stop_requested()) break;
    take();
    auto now = MonoClock::now();
    next += interval;
    while (next <= now) next += interval;
  }
  // Close the log at the stop point so it covers the caller's last window.
  if (MonoClock::now() - last_t >= interval / 2) take();
  return log;
}

void require_interval(std::chrono::nanoseconds interval) {
  if (interval < kMinInterval) {
    throw SamplerError(SamplerError::Kind::kInvalidArgument,
                       fmt::format("sampling interval {} ns is below the 10 ms floor",
                                   interval.count()));
  }
}

}  // namespace

SampleLog run_sampler(std::chrono::nanoseconds interval, const WorkloadPidSlot* workload_pid,
                      std::stop_token stop) {
  require_interval(interval);
  return sample_from(snapshot_cpu(), interval, workload_pid, std::move(stop));
}

Sampler::Sampler(std::chrono::nanoseconds interval, const WorkloadPidSlot* workload_pid)
    : interval_(interval), workload_pid_(workload_pid) {
  require_interval(interval_);
  CpuCounters baseline = snapshot_cpu();
  started_at_ = baseline.captured_at;
  thread_ = std::jthread([this, baseline = std::move(baseline)](std::stop_token st) mutable {
    result_ = sample_from(std::move(baseline), interval_, workload_pid_, std::move(st));
  });
}

Sampler::~Sampler() = default;

SampleLog Sampler::stop() {
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
  SampleLog out = result_ ? std::move(*result_) : SampleLog{interval_, {}, {}};
  result_.reset();
  return out;
}

namespace {

const char* flag_name(SampleFlag f) {
  switch (f) {
    case SampleFlag::kOk: return "ok";
    case SampleFlag::kStall: return "stall";
    case SampleFlag::kReadFailed: return "read_failed";
  }
  return "ok";
}

SampleFlag flag_from(std::string_view s) {
  if (s == "stall") return SampleFlag::kStall;
  if (s == "read_failed") return SampleFlag::kReadFailed;
  return SampleFlag::kOk;
}

}  // namespace

void write_samples_csv(const SampleLog& log, const std::filesystem::path& path) {
  auto out = fmt::output_file(path.string());
  out.print("# interval_ns={} anchor_wall_ns={} anchor_mono_ns={}\n", log.interval.count(),
            log.anchor.wall.time_since_epoch().count(), to_ns(log.anchor.mono));
  out.print("t_ns,cpu_pct,workload_rss_bytes,flag\n");
  for (const auto& r : log.records) {
    out.print("{},{},{},{}\n", to_ns(r.t), r.cpu_pct,
              r.workload_rss_bytes ? fmt::format("{}", *r.workload_rss_bytes) : std::string(),
              flag_name(r.flag));
  }
}

SampleLog read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  SampleLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream kv(line.substr(1));
      std::string item;
      while (kv >> item) {
        auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        auto key = item.substr(0, eq);
        auto value = std::stoll(item.substr(eq + 1));
        if (key == "interval_ns") log.interval = std::chrono::nanoseconds(value);
        if (key == "anchor_wall_ns") log.anchor.wall = WallTime(std::chrono::nanoseconds(value));
        if (key == "anchor_mono_ns") log.anchor.mono = mono_from_ns(value);
      }
      continue;
    }
    if (line.rfind("t_ns", 0) == 0) continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (line.back() == ',') cols.emplace_back();
    if (cols.size() < 3) throw std::runtime_error("malformed samples row: " + line);
    SampleRecord rec;
    rec.t = mono_from_ns(std::stoll(cols[0]));
    rec.cpu_pct = std::stod(cols[1]);
    if (!cols[2].empty()) rec.workload_rss_bytes = std::stoull(cols[2]);
    if (cols.size() > 3) rec.flag = flag_from(cols[3]);
    log.records.push_back(rec);
  }
  return log;
}

}  // namespace edgebench::sampler
