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

#include "edgebench/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace edgebench::config {

using nlohmann::json;
using Kind = ConfigError::Kind;

namespace {

std::string join_path(const std::string& base, std::string_view key) {
  return base.empty() ? std::string(key) : base + "." + std::string(key);
}

[[noreturn]] void invalid(const std::string& path, const std::string& why) {
  throw ConfigError(Kind::kInvalidValue, path, fmt::format("{}: {}", path, why));
}

// Reads keys from one JSON object and rejects whatever was not consumed.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* get(std::string_view key) {
    used_.insert(std::string(key));
    auto it = obj_.find(std::string(key));
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  std::string path(std::string_view key) const { return join_path(path_, key); }

  template <typename Fn>
  void with(std::string_view key, Fn&& fn) {
    if (const json* v = get(key)) fn(*v, path(key));
  }

  void number(std::string_view key, double& out, double lo, bool lo_inclusive = true) {
    with(key, [&](const json& v, const std::string& p) {
      if (!v.is_number()) invalid(p, "expected a number");
      double d = v.get<double>();
      if (!std::isfinite(d) || d < lo || (!lo_inclusive && d == lo)) {
        invalid(p, fmt::format("must be {} {}", lo_inclusive ? ">=" : ">", lo));
      }
      out = d;
    });
  }

  template <typename T>
  void count(std::string_view key, T& out, std::uint64_t lo) {
    with(key, [&](const json& v, const std::string& p) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        invalid(p, "expected a non-negative integer");
      }
      auto n = v.get<std::uint64_t>();
      if (n < lo) invalid(p, fmt::format("must be >= {}", lo));
      out = static_cast<T>(n);
    });
  }

  void string(std::string_view key, std::string& out) {
    with(key, [&](const json& v, const std::string& p) {
      if (!v.is_string()) invalid(p, "expected a string");
      out = v.get<std::string>();
    });
  }

  void path_value(std::string_view key, std::filesystem::path& out) {
    std::string s;
    bool seen = false;
    with(key, [&](const json& v, const std::string& p) {
      if (!v.is_string() || v.get<std::string>().empty()) invalid(p, "expected a non-empty path string");
      s = v.get<std::string>();
      seen = true;
    });
    if (seen) out = s;
  }

  void strings(std::string_view key, std::vector<std::string>& out) {
    with(key, [&](const json& v, const std::string& p) {
      if (!v.is_array()) invalid(p, "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) invalid(fmt::format("{}[{}]", p, i), "expected a string");
        out.push_back(v[i].get<std::string>());
      }
    });
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!used_.contains(k)) {
        const std::string p = join_path(path_, k);
        throw ConfigError(Kind::kUnknownKey, p, fmt::format("unknown key '{}'", p));
      }
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> used_;
};

harness::BenchmarkPlan read_plan(const json& j) {
  harness::BenchmarkPlan plan;
  Section s(j, "plan");
  s.with("workload", [&](const json& w, const std::string& p) {
    Section ws(w, p);
    ws.string("command", plan.workload.command);
    ws.strings("args", plan.workload.args);
    ws.with("env", [&](const json& env, const std::string& ep) {
      if (!env.is_object()) invalid(ep, "expected an object of strings");
      for (const auto& [k, v] : env.items()) {
        if (!v.is_string()) invalid(join_path(ep, k), "expected a string");
        plan.workload.env[k] = v.get<std::string>();
      }
    });
    ws.path_value("working_dir", plan.workload.working_dir);
    ws.strings("input_manifest", plan.workload.input_manifest);
    ws.finish();
  });
  s.count("batch_size_B", plan.batch_size, 1);
  s.count("repetitions_R", plan.repetitions, 1);
  double pad = plan.padding.count(), interval = plan.sampling_interval.count();
  s.number("padding_seconds", pad, 0.0);
  s.number("sampling_interval", interval, 0.01);
  plan.padding = std::chrono::duration<double>(pad);
  plan.sampling_interval = std::chrono::duration<double>(interval);
  s.with("pre_run_hook", [&](const json& v, const std::string& p) {
    if (!v.is_string()) invalid(p, "expected a string");
    plan.pre_run_hook = v.get<std::string>();
  });
  s.string("device_label", plan.device_label);
  s.finish();
  if (!plan.workload.input_manifest.empty() && plan.workload.input_manifest.size() != plan.batch_size) {
    invalid("plan.workload.input_manifest",
            fmt::format("has {} items but batch_size_B is {}", plan.workload.input_manifest.size(), plan.batch_size));
  }
  return plan;
}

DetectorSection read_detector(const json& j) {
  DetectorSection d;
  Section s(j, "detector");
  s.count("trailing_window", d.detector.trailing_window, 2);
  s.count("min_history", d.detector.min_history, 2);
  s.number("z_threshold", d.detector.z_threshold, 0.0, false);
  s.with("absolute_floor", [&](const json& v, const std::string& p) {
    if (!v.is_number() || v.get<double>() < 0) invalid(p, "expected a number >= 0");
    d.detector.absolute_floor = v.get<double>();
  });
  s.with("state_file", [&](const json& v, const std::string& p) {
    if (!v.is_string() || v.get<std::string>().empty()) invalid(p, "expected a non-empty path string");
    d.state_file = v.get<std::string>();
  });
  s.finish();
  if (d.detector.min_history > d.detector.trailing_window) {
    invalid("detector.min_history", "must not exceed detector.trailing_window");
  }
  return d;
}

SpoolSection read_spool(const json& j) {
  SpoolSection sp;
  Section s(j, "spool");
  s.path_value("inbox", sp.inbox);
  s.path_value("journal", sp.journal);
  s.number("scan_interval_seconds", sp.scan_interval_seconds, 0.0, false);
  s.number("stability_interval_seconds", sp.stability_interval_seconds, 0.0);
  s.with("sink", [&](const json& k, const std::string& p) {
    Section ks(k, p);
    ks.with("kind", [&](const json& v, const std::string& kp) {
      if (v == "directory") {
        sp.sink.kind = spool::SinkConfig::Kind::kDirectoryCopy;
      } else if (v == "http-put") {
        sp.sink.kind = spool::SinkConfig::Kind::kHttpPut;
      } else {
        invalid(kp, "expected \"directory\" or \"http-put\"");
      }
    });
    ks.string("target", sp.sink.target);
    double retain = sp.sink.retain_after_ack.count();
    ks.number("retain_after_ack_seconds", retain, 0.0);
    sp.sink.retain_after_ack = std::chrono::duration<double>(retain);
    ks.finish();
  });
  s.with("retry", [&](const json& r, const std::string& p) {
    Section rs(r, p);
    auto& retry = sp.sink.retry;
    rs.count("max_attempts", retry.max_attempts, 1);
    double base = retry.base_backoff.count();
    rs.number("base_backoff_seconds", base, 0.0, false);
    retry.base_backoff = std::chrono::duration<double>(base);
    rs.number("multiplier", retry.multiplier, 1.0);
    rs.number("jitter", retry.jitter, 0.0);
    if (retry.jitter >= 1.0) invalid(rs.path("jitter"), "must be < 1");
    rs.finish();
  });
  s.finish();
  return sp;
}

RmsSection read_rms(const json& j) {
  RmsSection r;
  Section s(j, "rms");
  s.count("window_len", r.window_len, 1);
  s.number("default_dt_seconds", r.default_dt_seconds, 0.0, false);
  s.finish();
  return r;
}

MetricsSection read_metrics(const json& j) {
  MetricsSection m;
  Section s(j, "metrics");
  s.number("idle_unstable_threshold_pct", m.idle_unstable_threshold_pct, 0.0);
  s.finish();
  return m;
}

}  // namespace

spool::SpoolerConfig SpoolSection::to_spooler_config() const {
  spool::SpoolerConfig c;
  c.inbox = inbox;
  c.journal = journal;
  c.sink = sink;
  c.scan_interval = std::chrono::duration<double>(scan_interval_seconds);
  c.stability_interval = std::chrono::duration<double>(stability_interval_seconds);
  return c;
}

json parse_document(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t at = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError(Kind::kSyntaxError, "", fmt::format("line {}, column {}: {}", line, col, msg), line, col);
  }
}

CliConfig from_document(const json& doc) {
  CliConfig c;
  Section root(doc, "");
  root.with("plan", [&](const json& v, const std::string&) { c.plan = read_plan(v); });
  root.with("detector", [&](const json& v, const std::string&) { c.detector = read_detector(v); });
  root.with("spool", [&](const json& v, const std::string&) { c.spool = read_spool(v); });
  root.with("rms", [&](const json& v, const std::string&) { c.rms = read_rms(v); });
  root.with("metrics", [&](const json& v, const std::string&) { c.metrics = read_metrics(v); });
  root.with("output_dir", [&](const json& v, const std::string& p) {
    if (!v.is_string() || v.get<std::string>().empty()) invalid(p, "expected a non-empty path string");
    c.output_dir = v.get<std::string>();
  });
  root.with("log_level", [&](const json& v, const std::string& p) {
    static const std::set<std::string> kLevels = {"trace", "debug", "info", "warn", "error", "critical", "off"};
    if (!v.is_string() || !kLevels.contains(v.get<std::string>())) {
      invalid(p, "expected one of trace, debug, info, warn, error, critical, off");
    }
    c.log_level = v.get<std::string>();
  });
  root.finish();
  return c;
}

CliConfig parse_config(std::string_view text) { return from_document(parse_document(text)); }

CliConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(Kind::kInvalidValue, "--config", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(json& doc, std::string_view dotted, std::string_view value) {
  if (dotted.empty()) throw ConfigError(Kind::kUnknownKey, "", "empty override key");
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (key.empty()) throw ConfigError(Kind::kUnknownKey, std::string(dotted), "malformed key '" + std::string(dotted) + "'");
    if (!node->is_object()) {
      if (!node->is_null()) invalid(std::string(dotted.substr(0, start ? start - 1 : 0)), "is not a section");
      *node = json::object();
    }
    node = &(*node)[key];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  *node = std::move(parsed);
}

}  // namespace edgebench::config
