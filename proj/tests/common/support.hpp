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

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/harness.hpp"
#include "edgebench/sampler.hpp"
#include "edgebench/tdms.hpp"

namespace edgebench::testing {

inline std::filesystem::path fixture_dir() { return EDGEBENCH_FIXTURE_DIR; }
inline std::filesystem::path tools_dir() { return EDGEBENCH_TOOLS_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "edgebench-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv with stdout and stderr captured to files.
inline CommandResult run_command(const std::vector<std::string>& argv, const std::filesystem::path& scratch) {
  const auto out_path = scratch / ".cmd.out";
  const auto err_path = scratch / ".cmd.err";
  std::cout.flush();
  std::fflush(nullptr);
  pid_t pid = ::fork();
  if (pid == 0) {
    std::FILE* o = std::freopen(out_path.c_str(), "w", stdout);
    std::FILE* e = std::freopen(err_path.c_str(), "w", stderr);
    if (!o || !e) _exit(127);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execv(args[0], args.data());
    _exit(127);
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  CommandResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
  r.out = read_text(out_path);
  r.err = read_text(err_path);
  return r;
}

// Random names mix ASCII, quotes, slashes and multi-byte UTF-8.
inline std::string random_name(std::mt19937_64& rng) {
  static const std::array<std::string, 12> kParts = {"a", "vgp", "_7", "'", "/", " ", "t", "é", "漢", "Z", "0", "b"};
  std::uniform_int_distribution<int> len(1, 5), pick(0, static_cast<int>(kParts.size()) - 1);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += kParts[pick(rng)];
  return s;
}

template <typename T>
T random_bits(std::mt19937_64& rng) {
  std::uint64_t raw = rng();
  T v;
  std::memcpy(&v, &raw, sizeof(T));
  return v;
}

inline tdms::Timestamp random_timestamp(std::mt19937_64& rng) {
  return {static_cast<std::int64_t>(rng() % 8000000000ULL), rng()};
}

inline tdms::Value random_value(std::mt19937_64& rng) {
  switch (rng() % 13) {
    case 0: return random_bits<std::int8_t>(rng);
    case 1: return random_bits<std::int16_t>(rng);
    case 2: return random_bits<std::int32_t>(rng);
    case 3: return random_bits<std::int64_t>(rng);
    case 4: return random_bits<std::uint8_t>(rng);
    case 5: return random_bits<std::uint16_t>(rng);
    case 6: return random_bits<std::uint32_t>(rng);
    case 7: return random_bits<std::uint64_t>(rng);
    case 8: return random_bits<float>(rng);
    case 9: return random_bits<double>(rng);
    case 10: return random_name(rng);
    case 11: return static_cast<bool>(rng() & 1);
    default: return random_timestamp(rng);
  }
}

template <typename T, typename Gen>
std::vector<T> fill(std::size_t n, Gen&& gen) {
  std::vector<T> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(gen());
  return v;
}

inline tdms::Samples random_samples(std::mt19937_64& rng) {
  const std::size_t n = rng() % 40;
  auto bits = [&]<typename T>() { return fill<T>(n, [&] { return random_bits<T>(rng); }); };
  switch (rng() % 14) {
    case 0: return std::monostate{};
    case 1: return bits.template operator()<std::int8_t>();
    case 2: return bits.template operator()<std::int16_t>();
    case 3: return bits.template operator()<std::int32_t>();
    case 4: return bits.template operator()<std::int64_t>();
    case 5: return bits.template operator()<std::uint8_t>();
    case 6: return bits.template operator()<std::uint16_t>();
    case 7: return bits.template operator()<std::uint32_t>();
    case 8: return bits.template operator()<std::uint64_t>();
    case 9: return bits.template operator()<float>();
    case 10: return bits.template operator()<double>();
    case 11: return fill<std::string>(n, [&] { return rng() % 4 == 0 ? std::string() : random_name(rng); });
    case 12: return fill<bool>(n, [&] { return static_cast<bool>(rng() & 1); });
    default: return fill<tdms::Timestamp>(n, [&] { return random_timestamp(rng); });
  }
}

inline std::vector<tdms::Property> random_properties(std::mt19937_64& rng) {
  std::vector<tdms::Property> props;
  const std::size_t n = rng() % 4;
  for (std::size_t i = 0; i < n; ++i) props.push_back({"p" + std::to_string(i) + random_name(rng), random_value(rng)});
  return props;
}

inline tdms::File random_model(std::mt19937_64& rng) {
  tdms::File f;
  f.properties = random_properties(rng);
  const std::size_t groups = rng() % 4;
  for (std::size_t g = 0; g < groups; ++g) {
    tdms::Group group;
    group.name = "g" + std::to_string(g) + random_name(rng);
    group.properties = random_properties(rng);
    const std::size_t channels = rng() % 5;
    for (std::size_t c = 0; c < channels; ++c) {
      group.channels.push_back({"c" + std::to_string(c) + random_name(rng), random_samples(rng), random_properties(rng)});
    }
    f.groups.push_back(std::move(group));
  }
  return f;
}

// Builds a completed RunRecord from per-sample values. Samples are spaced 1 s
// apart; each phase gets the listed samples in order.
struct SyntheticRun {
  std::vector<double> pre_cpu;
  std::vector<double> active_cpu;
  std::vector<double> post_cpu;
  double active_seconds = 0.0;
  std::vector<std::uint64_t> active_rss;  // one per active sample, optional
};

inline harness::RunRecord make_run(const SyntheticRun& spec, std::size_t run_index = 0) {
  using std::chrono::duration_cast;
  using std::chrono::nanoseconds;
  harness::RunRecord r;
  r.run_index = run_index;
  r.status = harness::RunStatus::kCompleted;
  r.samples.interval = std::chrono::seconds(1);
  const MonoTime t0 = mono_from_ns(1'000'000'000'000);
  auto at = [&](double s) { return t0 + duration_cast<MonoClock::duration>(std::chrono::duration<double>(s)); };
  const double pre_len = static_cast<double>(spec.pre_cpu.size());
  const double post_len = static_cast<double>(spec.post_cpu.size());
  r.pre_pad = {harness::Phase::kPrePad, at(0), at(pre_len)};
  r.active = {harness::Phase::kActive, at(pre_len), at(pre_len + spec.active_seconds)};
  r.post_pad = {harness::Phase::kPostPad, r.active.end, r.active.end + (at(post_len) - at(0))};
  auto place = [&](const std::vector<double>& values, MonoTime start, MonoTime end, bool rss) {
    if (values.empty()) return;
    const double span = seconds_between(start, end);
    for (std::size_t i = 0; i < values.size(); ++i) {
      // Spread evenly inside [start, end).
      const double off = span * (static_cast<double>(i) + 0.5) / static_cast<double>(values.size());
      sampler::SampleRecord rec;
      rec.t = start + duration_cast<MonoClock::duration>(std::chrono::duration<double>(off));
      rec.cpu_pct = values[i];
      if (rss && i < spec.active_rss.size()) rec.workload_rss_bytes = spec.active_rss[i];
      r.samples.records.push_back(rec);
    }
  };
  place(spec.pre_cpu, r.pre_pad.start, r.pre_pad.end, false);
  place(spec.active_cpu, r.active.start, r.active.end, true);
  place(spec.post_cpu, r.post_pad.start, r.post_pad.end, false);
  return r;
}

// Mean and n-1 standard deviation by definition, in long double.
inline std::pair<double, double> brute_mean_std(const std::vector<double>& v) {
  long double sum = 0;
  for (double x : v) sum += x;
  const long double mean = sum / static_cast<long double>(v.size());
  long double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const long double var = v.size() > 1 ? ss / static_cast<long double>(v.size() - 1) : 0.0L;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var))};
}

inline bool rel_close(double a, double b, double rel) {
  if (a == b) return true;
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace edgebench::testing
