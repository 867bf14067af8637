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

#include <doctest.h>

#include <random>

#include "../common/replay.hpp"
#include "../common/support.hpp"
#include "edgebench/metrics.hpp"

using namespace edgebench;
using namespace edgebench::testing;
using metrics::MetricsError;

namespace {

metrics::MetricsError::Kind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const MetricsError& e) {
    return e.kind();
  }
  FAIL("expected MetricsError");
  return {};
}

}  // namespace

TEST_CASE("phase means") {
  SyntheticRun s;
  s.pre_cpu = {10, 10, 10, 10, 10};
  s.active_cpu = {40, 50, 60};
  s.post_cpu = {12, 8};
  s.active_seconds = 3;
  const auto r = make_run(s);
  CHECK(metrics::phase_mean_cpu(r.samples, r.pre_pad) == 10.0);
  CHECK(metrics::phase_mean_cpu(r.samples, r.active) == 50.0);
  CHECK(metrics::phase_mean_cpu(r.samples, r.post_pad) == 10.0);

  harness::PhaseWindow empty{harness::Phase::kActive, r.post_pad.end, r.post_pad.end};
  CHECK(kind_of([&] { metrics::phase_mean_cpu(r.samples, empty); }) == MetricsError::Kind::kEmptyWindow);
}

TEST_CASE("read failures are skipped") {
  SyntheticRun s;
  s.pre_cpu = {5, 5};
  s.active_cpu = {50, 0, 70};
  s.post_cpu = {5};
  s.active_seconds = 3;
  auto r = make_run(s);
  r.samples.records[3].flag = sampler::SampleFlag::kReadFailed;
  CHECK(metrics::phase_mean_cpu(r.samples, r.active) == 60.0);
}

TEST_CASE("cpu delta against the pooled idle baseline") {
  SyntheticRun s;
  s.pre_cpu.assign(30, 10.0);
  s.active_cpu.assign(20, 40.0);
  s.post_cpu.assign(30, 10.0);
  s.active_seconds = 20;
  const auto d = metrics::cpu_delta(make_run(s));
  CHECK(d.delta_pct == 30.0);
  CHECK(d.idle_mean_pct == 10.0);
  CHECK(d.active_mean_pct == 40.0);
  CHECK_FALSE(d.idle_unstable);

  SUBCASE("pre and post are pooled, not averaged") {
    s.pre_cpu.assign(10, 0.0);
    s.post_cpu.assign(30, 20.0);
    CHECK(metrics::cpu_delta(make_run(s)).idle_mean_pct == 15.0);
  }
  SUBCASE("negative deltas are reported and flagged") {
    s.active_cpu.assign(20, 8.0);
    const auto neg = metrics::cpu_delta(make_run(s));
    CHECK(neg.delta_pct == -2.0);
    CHECK(neg.idle_unstable);
  }
  SUBCASE("noisy baseline is flagged") {
    for (std::size_t i = 0; i < s.pre_cpu.size(); ++i) s.pre_cpu[i] = (i % 2) ? 0.0 : 30.0;
    CHECK(metrics::cpu_delta(make_run(s)).idle_unstable);
    CHECK_FALSE(metrics::cpu_delta(make_run(s), 50.0).idle_unstable);
  }
  SUBCASE("no padding, no baseline") {
    s.pre_cpu.clear();
    s.post_cpu.clear();
    const auto r = make_run(s);
    CHECK(kind_of([&] { metrics::cpu_delta(r); }) == MetricsError::Kind::kIdleBaselineUnavailable);
    const auto rm = metrics::compute_run_metrics(r);
    CHECK_FALSE(rm.cpu);
    CHECK(rm.latency_seconds);
    CHECK(rm.notes.size() >= 1);
  }
}

TEST_CASE("delta is invariant under a common shift") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    SyntheticRun s;
    for (int i = 0; i < 10; ++i) s.pre_cpu.push_back(u(rng));
    for (int i = 0; i < 7; ++i) s.active_cpu.push_back(u(rng) + 20);
    for (int i = 0; i < 10; ++i) s.post_cpu.push_back(u(rng));
    s.active_seconds = 7;
    const double c = u(rng);
    SyntheticRun shifted = s;
    for (auto* v : {&shifted.pre_cpu, &shifted.active_cpu, &shifted.post_cpu})
      for (double& x : *v) x += c;
    const double a = metrics::cpu_delta(make_run(s)).delta_pct;
    const double b = metrics::cpu_delta(make_run(shifted)).delta_pct;
    CHECK(std::fabs(a - b) < 1e-9);
  }
}

TEST_CASE("latency is the active window only") {
  for (std::size_t pad : {1u, 10u, 60u}) {
    SyntheticRun s;
    s.pre_cpu.assign(pad, 1.0);
    s.post_cpu.assign(pad, 1.0);
    s.active_cpu = {50};
    s.active_seconds = 67.73;
    CHECK(metrics::active_latency(make_run(s)) == doctest::Approx(67.73).epsilon(1e-12));
  }
  auto r = make_run({{1}, {50}, {1}, 2.0, {}});
  r.status = harness::RunStatus::kSpawnFailed;
  CHECK(kind_of([&] { metrics::active_latency(r); }) == MetricsError::Kind::kIncompleteRun);
}

TEST_CASE("memory peak and mean") {
  SyntheticRun s;
  s.pre_cpu = {1};
  s.active_cpu = {50, 50, 50, 50};
  s.post_cpu = {1};
  s.active_seconds = 4;
  s.active_rss = {100'000'000, 200'000'000, 300'000'000, 250'000'000};
  const auto m = metrics::memory_stats(make_run(s));
  CHECK(m.peak_bytes == 300'000'000u);
  CHECK(m.mean_bytes == 212'500'000.0);

  s.active_rss.clear();
  const auto r = make_run(s);
  CHECK(kind_of([&] { metrics::memory_stats(r); }) == MetricsError::Kind::kNoMemorySamples);
}

TEST_CASE("item peaks come from samples inside each item") {
  SyntheticRun s;
  s.pre_cpu = {1};
  s.active_cpu = {50, 50, 50, 50};
  s.post_cpu = {1};
  s.active_seconds = 4;
  s.active_rss = {10, 40, 30, 20};
  auto r = make_run(s);
  const auto a = r.active.start;
  auto sec = [](double x) { return std::chrono::duration_cast<MonoClock::duration>(std::chrono::duration<double>(x)); };
  r.item_marks = {{0, a, a + sec(2)}, {1, a + sec(2), a + sec(4)}, {2, a + sec(3.9), a + sec(3.95)}};
  harness::attribute_item_peaks(r.item_marks, r.samples);
  CHECK(r.item_marks[0].peak_rss_bytes == 40u);
  CHECK(r.item_marks[1].peak_rss_bytes == 30u);
  CHECK_FALSE(r.item_marks[2].peak_rss_bytes);
  const auto m = metrics::memory_stats(r);
  for (const auto& p : m.per_item_peaks)
    if (p) CHECK(*p <= m.peak_bytes);
}

TEST_CASE("describe") {
  const std::vector<double> v{10, 20, 30};
  const auto s = metrics::describe(v);
  CHECK(s.mean == 20.0);
  CHECK(s.sample_std == 10.0);
  CHECK(s.min == 10.0);
  CHECK(s.max == 30.0);
  CHECK(s.n == 3);

  const std::vector<double> one{4.5};
  CHECK(metrics::describe(one).sample_std == 0.0);
  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK(metrics::describe(five).sample_std == doctest::Approx(1.5811388300841898).epsilon(1e-15));
  CHECK_THROWS(metrics::describe(std::span<const double>{}));

  std::mt19937_64 rng(11);
  std::lognormal_distribution<double> ln(3.0, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> x(2 + rng() % 40);
    for (double& e : x) e = ln(rng);
    const auto d = metrics::describe(x);
    const auto [m, sd] = brute_mean_std(x);
    CHECK(rel_close(d.mean, m, 1e-12));
    CHECK(rel_close(d.sample_std, sd, 1e-12));
    CHECK(d.min <= d.mean);
    CHECK(d.mean <= d.max);
  }
}

TEST_CASE("aggregation excludes failed runs and counts per metric") {
  std::vector<metrics::RunMetrics> runs(4);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    runs[i].run_index = i;
    runs[i].latency_seconds = 1.0 + static_cast<double>(i);
    runs[i].cpu = metrics::CpuDelta{10.0 * static_cast<double>(i + 1)};
  }
  runs[1].excluded_reason = "nonzero_exit(3)";
  runs[2].cpu.reset();
  const auto s = metrics::aggregate(runs, "dev");
  CHECK(s.n_runs == 3);
  REQUIRE(s.excluded_runs.size() == 1);
  CHECK(s.excluded_runs[0].run_index == 1);
  CHECK(s.latency_seconds->n == 3);
  CHECK(s.latency_seconds->mean == doctest::Approx((1.0 + 3.0 + 4.0) / 3));
  CHECK(s.cpu_delta_pct->n == 2);
  CHECK(s.cpu_delta_pct->mean == 25.0);
  CHECK_FALSE(s.mem_peak_bytes);
  CHECK(s.find(metrics::kLatencySeconds) == &s.latency_seconds);
  CHECK(s.find("nope") == nullptr);

  for (auto& r : runs) r.excluded_reason = "spawn_failed";
  CHECK(kind_of([&] { metrics::aggregate(runs, "dev"); }) == MetricsError::Kind::kAllRunsExcluded);
}

TEST_CASE("replayed device runs reproduce the reported means") {
  for (const auto& dev : {kRpi4, kBbai64}) {
    CAPTURE(dev.label);
    std::vector<metrics::RunMetrics> per_run;
    for (const auto& r : replay_runs(dev)) per_run.push_back(metrics::compute_run_metrics(r));
    const auto s = metrics::aggregate(per_run, dev.label);
    CHECK(s.n_runs == 10);
    CHECK(s.cpu_delta_pct->mean == doctest::Approx(dev.cpu_delta_pct).epsilon(1e-9));
    CHECK(s.latency_seconds->mean == doctest::Approx(dev.latency_seconds).epsilon(1e-9));
    CHECK(s.mem_peak_bytes->mean / 1e6 == doctest::Approx(dev.mem_peak_mb).epsilon(1e-9));
    CHECK(s.cpu_delta_pct->sample_std > 0);
  }
}
