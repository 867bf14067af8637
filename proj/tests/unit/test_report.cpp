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
#include <regex>

#include "../common/replay.hpp"
#include "../common/support.hpp"
#include "edgebench/report.hpp"

using namespace edgebench;
using namespace edgebench::testing;
using namespace edgebench::report;

namespace {

metrics::Stats stat(double mean, double sd = 0.0, std::size_t n = 10) { return {mean, sd, mean - sd, mean + sd, n}; }

metrics::MetricsSummary summary(const std::string& label, double cpu, double lat, double mem_bytes) {
  metrics::MetricsSummary s;
  s.device_label = label;
  s.n_runs = 10;
  s.cpu_delta_pct = stat(cpu, 1.5);
  s.latency_seconds = stat(lat, 0.25);
  s.mem_peak_bytes = stat(mem_bytes, 2e6);
  return s;
}

std::vector<metrics::MetricsSummary> boards() {
  return {summary("rpi4", 29.96, 67.73, 548.44e6), summary("bbai64", 53.02, 67.56, 691.43e6)};
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

WallTime at_s(std::int64_t ns) { return WallTime(std::chrono::nanoseconds(ns)); }

const RadarDevice& by_label(const RadarData& r, const std::string& label) {
  for (const auto& d : r.devices)
    if (d.label == label) return d;
  throw std::runtime_error("no device " + label);
}

}  // namespace

TEST_CASE("radar values for the two boards") {
  const auto radar = normalize_radar(boards());
  const auto& rpi = by_label(radar, "rpi4");
  const auto& bb = by_label(radar, "bbai64");
  CHECK(rpi.v[0] == doctest::Approx(0.5650697849867974).epsilon(1e-12));
  CHECK(rpi.v[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rpi.v[2] == doctest::Approx(0.793196708271264).epsilon(1e-12));
  CHECK(bb.v[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bb.v[1] == doctest::Approx(0.9974900339583641).epsilon(1e-12));
  CHECK(bb.v[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rpi.area == doctest::Approx(0.7822279139094928).epsilon(1e-12));
  CHECK(bb.area == doctest::Approx(1.296864411321965).epsilon(1e-12));
  CHECK(rpi.area < bb.area);
}

TEST_CASE("radar area properties") {
  CHECK(radar_area({1, 1, 1}) == doctest::Approx(1.299038105676658).epsilon(1e-15));
  CHECK(radar_area({0, 0, 0}) == 0.0);
  CHECK(radar_area({1, 0, 0}) == 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 3> v{u(rng), u(rng), u(rng)};
    const double a = radar_area(v);
    CHECK(a >= 0.0);
    CHECK(a <= radar_area({1, 1, 1}) + 1e-15);
    CHECK(radar_area({v[1], v[2], v[0]}) == doctest::Approx(a).epsilon(1e-14));
    CHECK(radar_area({v[2], v[1], v[0]}) == doctest::Approx(a).epsilon(1e-14));
    auto w = v;
    w[i % 3] = std::min(1.0, w[i % 3] + 0.1);
    CHECK(radar_area(w) >= a - 1e-15);
  }
}

TEST_CASE("normalization ignores per-axis units") {
  auto scaled = boards();
  for (auto& s : scaled) {
    s.latency_seconds->mean *= 1000.0;
    s.mem_peak_bytes->mean /= 1e6;
  }
  const auto a = normalize_radar(boards());
  const auto b = normalize_radar(scaled);
  for (std::size_t d = 0; d < 2; ++d) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(a.devices[d].v[k] == doctest::Approx(b.devices[d].v[k]).epsilon(1e-12));
    CHECK(a.devices[d].area == doctest::Approx(b.devices[d].area).epsilon(1e-12));
  }
}

TEST_CASE("radar edge cases") {
  auto s = boards();
  s[0].cpu_delta_pct->mean = -3.0;
  const auto r = normalize_radar(s);
  CHECK(by_label(r, "rpi4").cpu_clamped);
  CHECK(by_label(r, "rpi4").v[0] == 0.0);
  CHECK_FALSE(by_label(r, "bbai64").cpu_clamped);

  s = boards();
  s[1].mem_peak_bytes.reset();
  CHECK_THROWS_AS(normalize_radar(s), ReportError);
}

TEST_CASE("summary CSV and JSON") {
  auto s = boards();
  s[0].excluded_runs.push_back({3, "nonzero_exit(1)"});
  s[0].n_runs = 9;
  s[0].latency_seconds->mean = 0.1 + 0.2;
  const auto csv = emit_csv(s);
  CHECK(csv.rfind("device,metric,mean,std,min,max,n_runs\n", 0) == 0);
  CHECK(csv.find("bbai64") < csv.find("rpi4"));
  CHECK(csv == emit_csv(std::vector{s[1], s[0]}));
  const auto json = emit_json(s);
  CHECK(json == emit_json(std::vector{s[1], s[0]}));

  for (const auto& back : {parse_csv(csv), parse_json(json)}) {
    REQUIRE(back.size() == 2);
    const auto& rpi = back[0].device_label == "rpi4" ? back[0] : back[1];
    CHECK(rpi.latency_seconds->mean == 0.1 + 0.2);
    CHECK(rpi.cpu_delta_pct->sample_std == s[0].cpu_delta_pct->sample_std);
    CHECK(rpi.mem_peak_bytes->max == s[0].mem_peak_bytes->max);
    CHECK(rpi.latency_seconds->n == 10);
  }
  CHECK(emit_csv(parse_csv(csv)) == csv);
  const auto j2 = parse_json(json);
  const auto& rpi = j2[0].device_label == "rpi4" ? j2[0] : j2[1];
  REQUIRE(rpi.excluded_runs.size() == 1);
  CHECK(rpi.excluded_runs[0].reason == "nonzero_exit(1)");
  CHECK(emit_json(j2) == json);

  CHECK_THROWS_AS(parse_csv("device,metric\nx,y\n"), ReportError);
  CHECK_THROWS_AS(parse_json("{\"format\":\"other\"}"), ReportError);

  TempDir d;
  write_text(d / "s.csv", csv);
  write_text(d / "s.json", json);
  CHECK(load_summaries(d / "s.csv").size() == 2);
  CHECK(load_summaries(d / "s.json").size() == 2);
}

TEST_CASE("table shows two decimals") {
  const auto t = render_table(boards());
  CHECK(t.find("29.96 ± 1.50") != std::string::npos);
  CHECK(t.find("53.02") != std::string::npos);
  CHECK(t.find("67.73") != std::string::npos);
  CHECK(t.find("67.56") != std::string::npos);
  CHECK(t.find("548.44 ± 2.00") != std::string::npos);
  CHECK(t.find("691.43") != std::string::npos);
  auto s = boards();
  s[0].cpu_delta_pct.reset();
  CHECK(render_table(s).find("n/a") != std::string::npos);
}

TEST_CASE("radar SVG") {
  const auto svg = emit_radar_svg(normalize_radar(boards()));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polygon") == 2);
  CHECK(count(svg, "data-device=\"rpi4\"") == 1);
  CHECK(svg.find("rpi4 (area 0.782)") != std::string::npos);
  CHECK(svg.find("bbai64 (area 1.297)") != std::string::npos);
  CHECK(count(svg, "<line") == 3);
}

TEST_CASE("CPU time series SVG") {
  SyntheticRun spec;
  spec.pre_cpu.assign(5, 10.0);
  spec.active_cpu.assign(3, 90.0);
  spec.post_cpu.assign(5, 10.0);
  spec.active_seconds = 3.0;
  const auto run = make_run(spec);
  const std::vector<harness::PhaseWindow> windows{run.pre_pad, run.active, run.post_pad};
  const auto svg = emit_cpu_timeseries_svg(run.samples, windows);
  CHECK(count(svg, "<polyline class=\"cpu\"") == 1);
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, std::regex(R"re(class="phase-active"[^>]*data-start-s="([^"]+)" data-end-s="([^"]+)")re")));
  CHECK(std::stod(m[1]) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(std::stod(m[2]) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(count(svg, "class=\"phase-pre_pad\"") == 1);
  CHECK(count(svg, "class=\"phase-post_pad\"") == 1);

  const auto empty = emit_cpu_timeseries_svg({}, {});
  CHECK(empty.find("no data") != std::string::npos);
  CHECK(empty.find("<polyline") == std::string::npos);
}

TEST_CASE("RMS SVG") {
  std::vector<shm::RmsPoint> pts;
  for (int i = 0; i < 10; ++i) {
    pts.push_back({"g/a", at_s(i * 1'000'000'000LL), 100, 1.0 + i});
    pts.push_back({"g/b", at_s(i * 1'000'000'000LL), 100, 2.0});
  }
  std::vector<shm::AnomalyEvent> ev{{"g/a", at_s(9'000'000'000LL), 10.0, 5.0, 9.0}};
  const auto svg = emit_rms_svg(pts, ev);
  CHECK(count(svg, "<polyline class=\"rms\"") == 2);
  CHECK(count(svg, "data-channel=\"g/a\"") == 1);
  CHECK(count(svg, "<circle class=\"anomaly\"") == 1);
  CHECK(emit_rms_svg({}).find("no data") != std::string::npos);
}

TEST_CASE("device registry") {
  const auto devs = builtin_devices();
  REQUIRE(devs.size() == 2);
  const auto& bb = devs[0].label == "bbai64" ? devs[0] : devs[1];
  const auto& rpi = devs[0].label == "rpi4" ? devs[0] : devs[1];
  CHECK(bb.soc == "TDA4VM");
  CHECK(bb.cores == 2);
  CHECK(bb.clock_ghz == 2.0);
  CHECK(bb.memory_gb == 4.0);
  CHECK(rpi.soc == "BCM2711");
  CHECK(rpi.cores == 4);
  CHECK(rpi.clock_ghz == 1.5);
  CHECK(rpi.memory_gb == 4.0);
  const auto text = render_devices(devs);
  CHECK(text.find("TDA4VM") != std::string::npos);
  CHECK(text.find("BCM2711") != std::string::npos);

  TempDir d;
  write_text(d / "devs.json", devices_to_json(devs).dump());
  CHECK(load_devices(d / "devs.json") == devs);
  write_text(d / "bad.json", R"({"devices":[{"label":"x","soc":"s","processor":"p","cores":0,"clock_ghz":1,"memory_gb":1}]})");
  CHECK_THROWS_AS(load_devices(d / "bad.json"), ReportError);
}

TEST_CASE("replayed runs flow into the radar") {
  std::vector<metrics::MetricsSummary> sums;
  for (const auto& dev : {kRpi4, kBbai64}) {
    std::vector<metrics::RunMetrics> per_run;
    for (const auto& r : replay_runs(dev)) per_run.push_back(metrics::compute_run_metrics(r));
    sums.push_back(metrics::aggregate(per_run, dev.label));
  }
  const auto radar = normalize_radar(parse_json(emit_json(sums)));
  CHECK(by_label(radar, "rpi4").area == doctest::Approx(0.7822279139094928).epsilon(1e-9));
  CHECK(by_label(radar, "bbai64").area == doctest::Approx(1.296864411321965).epsilon(1e-9));
}
