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

#include "../common/support.hpp"
#include "edgebench/config.hpp"

using namespace edgebench;
using namespace edgebench::config;

namespace {

ConfigError error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError for " << text);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("absent keys take module defaults") {
  const auto c = parse_config(R"({"plan": {"workload": {"command": "/bin/true"}}})");
  REQUIRE(c.plan);
  CHECK(c.plan->batch_size == 100);
  CHECK(c.plan->repetitions == 10);
  CHECK(c.plan->padding.count() == 30.0);
  CHECK(c.plan->sampling_interval.count() == 1.0);
  CHECK_FALSE(c.spool);
  CHECK_FALSE(c.detector);

  const auto empty = parse_config("  \n");
  CHECK_FALSE(empty.plan);
  CHECK_FALSE(empty.log_level);
}

TEST_CASE("full document") {
  const auto c = parse_config(R"({
    // comments are allowed
    "plan": {
      "workload": {"command": "python3", "args": ["infer.py"], "env": {"OMP_NUM_THREADS": "2"},
                   "working_dir": "/opt/model", "input_manifest": ["a.png", "b.png"]},
      "batch_size_B": 2, "repetitions_R": 3, "padding_seconds": 5, "sampling_interval": 0.5,
      "pre_run_hook": "sync", "device_label": "rpi4"
    },
    "detector": {"trailing_window": 48, "min_history": 10, "z_threshold": 4.5, "absolute_floor": 0.01,
                 "state_file": "det.json"},
    "spool": {"inbox": "/data/in", "journal": "/var/lib/j.jsonl", "scan_interval_seconds": 5,
              "stability_interval_seconds": 1,
              "sink": {"kind": "http-put", "target": "http://h:8080/up", "retain_after_ack_seconds": 60},
              "retry": {"max_attempts": 4, "base_backoff_seconds": 1, "multiplier": 3, "jitter": 0.2}},
    "rms": {"window_len": 500, "default_dt_seconds": 0.001},
    "metrics": {"idle_unstable_threshold_pct": 7.5},
    "output_dir": "out",
    "log_level": "debug"
  })");
  CHECK(c.plan->workload.args == std::vector<std::string>{"infer.py"});
  CHECK(c.plan->workload.env.at("OMP_NUM_THREADS") == "2");
  CHECK(c.plan->pre_run_hook == "sync");
  CHECK(c.plan->device_label == "rpi4");
  CHECK(c.detector->detector.trailing_window == 48);
  CHECK(c.detector->detector.absolute_floor == 0.01);
  CHECK(c.detector->state_file == "det.json");
  CHECK(c.spool->sink.kind == spool::SinkConfig::Kind::kHttpPut);
  CHECK(c.spool->sink.retry.max_attempts == 4);
  CHECK(c.spool->sink.retain_after_ack.count() == 60.0);
  const auto sc = c.spool->to_spooler_config();
  CHECK(sc.scan_interval.count() == 5.0);
  CHECK(sc.stability_interval.count() == 1.0);
  CHECK(c.rms->window_len == 500);
  CHECK(c.metrics->idle_unstable_threshold_pct == 7.5);
  CHECK(c.output_dir == "out");
  CHECK(c.log_level == "debug");
}

TEST_CASE("unknown keys name their path") {
  auto e = error_of(R"({"plan": {"workload": {"command": "x"}, "padings": 3}})");
  CHECK(e.kind() == ConfigError::Kind::kUnknownKey);
  CHECK(e.key_path() == "plan.padings");
  CHECK(std::string(e.what()).find("plan.padings") != std::string::npos);

  CHECK(error_of(R"({"spool": {"retry": {"max_attempt": 3}}})").key_path() == "spool.retry.max_attempt");
  CHECK(error_of(R"({"bogus": 1})").key_path() == "bogus");
}

TEST_CASE("syntax errors carry line and column") {
  const auto e = error_of("{\n  \"plan\": {\n    \"batch_size_B\": ,\n  }\n}\n");
  CHECK(e.kind() == ConfigError::Kind::kSyntaxError);
  CHECK(e.line() == 3);
  CHECK(e.column() == 21);
}

TEST_CASE("invalid values name their path") {
  struct Case {
    const char* text;
    const char* path;
  };
  for (const auto& c : std::vector<Case>{
           {R"({"plan": {"workload": {"command": "x"}, "batch_size_B": 0}})", "plan.batch_size_B"},
           {R"({"plan": {"workload": {"command": "x"}, "padding_seconds": -1}})", "plan.padding_seconds"},
           {R"({"plan": {"workload": {"command": "x"}, "repetitions_R": "ten"}})", "plan.repetitions_R"},
           {R"({"plan": {"workload": {"command": "x"}, "batch_size_B": 3, "workload": {"command": "x", "input_manifest": ["a"]}}})",
            "plan.workload.input_manifest"},
           {R"({"spool": {"sink": {"kind": "ftp"}}})", "spool.sink.kind"},
           {R"({"spool": {"retry": {"jitter": 1.5}}})", "spool.retry.jitter"},
           {R"({"detector": {"z_threshold": 0}})", "detector.z_threshold"},
           {R"({"log_level": "loud"})", "log_level"},
       }) {
    CAPTURE(c.text);
    const auto e = error_of(c.text);
    CHECK(e.kind() == ConfigError::Kind::kInvalidValue);
    CHECK(e.key_path() == c.path);
  }
}

TEST_CASE("overrides") {
  auto doc = parse_document(R"({"plan": {"workload": {"command": "x"}, "repetitions_R": 10}})");
  apply_override(doc, "plan.repetitions_R", "3");
  apply_override(doc, "plan.device_label", "bbai64");
  apply_override(doc, "plan.workload.args", R"(["--fast"])");
  apply_override(doc, "log_level", "warn");
  const auto c = from_document(doc);
  CHECK(c.plan->repetitions == 3);
  CHECK(c.plan->device_label == "bbai64");
  CHECK(c.plan->workload.args == std::vector<std::string>{"--fast"});
  CHECK(c.log_level == "warn");

  auto fresh = parse_document("");
  apply_override(fresh, "rms.window_len", "250");
  CHECK(from_document(fresh).rms->window_len == 250);

  apply_override(fresh, "plan.padings", "3");
  CHECK_THROWS_AS(from_document(fresh), ConfigError);
  CHECK_THROWS_AS(apply_override(fresh, "a..b", "1"), ConfigError);
}

TEST_CASE("config files") {
  testing::TempDir d;
  testing::write_text(d / "c.json", R"({"rms": {"window_len": 10}})");
  CHECK(load_config(d / "c.json").rms->window_len == 10);
  CHECK_THROWS_AS(load_config(d / "missing.json"), ConfigError);
}
