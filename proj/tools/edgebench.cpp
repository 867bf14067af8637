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

#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stop_token>
#include <thread>
#include <variant>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "edgebench/config.hpp"
#include "edgebench/csv.hpp"
#include "edgebench/digest.hpp"
#include "edgebench/harness.hpp"
#include "edgebench/metrics.hpp"
#include "edgebench/report.hpp"
#include "edgebench/shm.hpp"
#include "edgebench/spool.hpp"
#include "edgebench/tdms.hpp"

namespace fs = std::filesystem;
using namespace edgebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAllExcluded = 3;

// Errors that point at the configuration rather than the measurement.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<int> g_signals{0};

void on_signal(int) {
  if (g_signals.fetch_add(1) > 0) _exit(130);
}

// Turns SIGINT/SIGTERM into a stop request.
class SignalStop {
 public:
  SignalStop() {
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    watcher_ = std::jthread([this](std::stop_token st) {
      while (!st.stop_requested()) {
        if (g_signals.load() > 0) {
          spdlog::warn("interrupted; stopping");
          source_.request_stop();
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
    });
  }

  std::stop_token token() const { return source_.get_token(); }
  bool stopped() const { return source_.stop_requested(); }

 private:
  std::stop_source source_;
  std::jthread watcher_;
};

void setup_logging(const std::string& level) {
  const bool color = std::getenv("EDGEBENCH_NO_COLOR") == nullptr && ::isatty(STDERR_FILENO);
  std::shared_ptr<spdlog::logger> logger;
  if (color) {
    logger = spdlog::stderr_color_mt("edgebench");
  } else {
    logger = spdlog::stderr_logger_mt("edgebench");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%H:%M:%S.%e %^%l%$ %v");
  spdlog::set_level(spdlog::level::from_str(level));
}

// Writes next to the destination and renames, so watchers never see a partial file.
void write_atomically(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.parent_path() / fmt::format(".{}.{}.tmp", path.filename().string(), ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    out << bytes;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void emit(const std::string& out_path, const std::string& bytes) {
  if (out_path.empty() || out_path == "-") {
    std::cout << bytes;
    std::cout.flush();
  } else {
    write_atomically(out_path, bytes);
    spdlog::info("wrote {}", out_path);
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits "--a.b value" and "--a.b=value" overrides out of argv.
std::vector<std::pair<std::string, std::string>> take_overrides(std::vector<std::string>& args) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) == 0 && a.size() > 2) {
      const std::string body = a.substr(2);
      const auto eq = body.find('=');
      const std::string key = body.substr(0, eq);
      if (key.find('.') != std::string::npos) {
        if (eq != std::string::npos) {
          out.emplace_back(key, body.substr(eq + 1));
        } else if (i + 1 < args.size()) {
          out.emplace_back(key, args[++i]);
        } else {
          throw UsageError("override --" + key + " needs a value");
        }
        continue;
      }
    }
    rest.push_back(a);
  }
  args = std::move(rest);
  return out;
}

std::string render_value(const tdms::Samples& samples, std::size_t i) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else {
          using E = typename T::value_type;
          const auto& x = v[i];
          if constexpr (std::is_same_v<E, std::string>) {
            return csv::field(x);
          } else if constexpr (std::is_same_v<E, bool>) {
            return x ? "true" : "false";
          } else if constexpr (std::is_same_v<E, tdms::Timestamp>) {
            return shm::format_iso8601(shm::from_tdms_timestamp(x));
          } else if constexpr (std::is_floating_point_v<E>) {
            return csv::number(static_cast<double>(x));
          } else {
            return std::to_string(static_cast<std::conditional_t<std::is_signed_v<E>, long long, unsigned long long>>(x));
          }
        }
      },
      samples);
}

struct Context {
  config::CliConfig cfg;
  SignalStop* signals = nullptr;
};

int cmd_bench(const Context& ctx, const std::string& out_flag) {
  if (!ctx.cfg.plan) throw UsageError("bench needs a 'plan' section in the config");
  const auto& plan = *ctx.cfg.plan;
  try {
    harness::validate(plan);
  } catch (const harness::HarnessError& e) {
    throw UsageError(e.what());
  }
  harness::HarnessOptions opts;
  opts.output_root = !out_flag.empty() ? fs::path(out_flag) : ctx.cfg.output_dir.value_or("runs");
  const double threshold = ctx.cfg.metrics ? ctx.cfg.metrics->idle_unstable_threshold_pct
                                           : metrics::kDefaultIdleUnstablePct;
  spdlog::info("plan {}: B={} R={} padding={}s on '{}'", harness::plan_hash(plan), plan.batch_size, plan.repetitions,
               plan.padding.count(), plan.device_label);
  const auto records = harness::run_plan(plan, opts, ctx.signals->token());
  std::vector<metrics::RunMetrics> per_run;
  for (const auto& r : records) {
    auto m = metrics::compute_run_metrics(r, threshold);
    for (const auto& w : r.warnings) spdlog::warn("run {}: {}", r.run_index, w);
    for (const auto& n : m.notes) spdlog::warn("run {}: {}", r.run_index, n);
    if (m.excluded_reason) spdlog::warn("run {} excluded: {}", r.run_index, *m.excluded_reason);
    per_run.push_back(std::move(m));
  }
  metrics::MetricsSummary summary;
  try {
    summary = metrics::aggregate(per_run, plan.device_label);
  } catch (const metrics::MetricsError& e) {
    spdlog::error("{}", e.what());
    return kExitAllExcluded;
  }
  const fs::path dir = opts.output_root / harness::plan_hash(plan);
  std::vector<metrics::MetricsSummary> one{summary};
  write_atomically(dir / "summary.csv", report::emit_csv(one));
  write_atomically(dir / "summary.json", report::emit_json(one));
  std::cout << report::render_table(one);
  spdlog::info("artifacts in {}", dir.string());
  return ctx.signals->stopped() ? kExitError : kExitOk;
}

shm::RmsOptions rms_options(const Context& ctx, std::size_t window_flag) {
  shm::RmsOptions o;
  const config::RmsSection sec = ctx.cfg.rms.value_or(config::RmsSection{});
  o.window_len = window_flag ? window_flag : sec.window_len;
  o.default_dt = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(sec.default_dt_seconds));
  return o;
}

std::vector<shm::RmsPoint> load_points(const Context& ctx, const std::vector<std::string>& inputs, std::size_t window) {
  std::vector<shm::RmsPoint> points;
  for (const auto& in : inputs) {
    std::vector<shm::RmsPoint> more;
    if (fs::path(in).extension() == ".tdms") {
      more = shm::file_rms(tdms::read_file(in), rms_options(ctx, window));
    } else {
      std::ifstream f(in);
      if (!f) throw UsageError("cannot read " + in);
      more = shm::read_rms_csv(f);
    }
    points.insert(points.end(), more.begin(), more.end());
  }
  return points;
}

int cmd_rms(const Context& ctx, const std::vector<std::string>& inputs, std::size_t window, const std::string& out,
            const std::string& json_out) {
  std::vector<shm::RmsPoint> all;
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& in : inputs) {
    shm::RmsReport r;
    r.source = in;
    r.checksum = sha256_file(in);
    r.points = shm::file_rms(tdms::read_file(in), rms_options(ctx, window));
    spdlog::info("{}: {} RMS points", in, r.points.size());
    all.insert(all.end(), r.points.begin(), r.points.end());
    reports.push_back(shm::to_json(r));
  }
  std::ostringstream csv_out;
  shm::write_rms_csv(csv_out, all);
  emit(out, csv_out.str());
  if (!json_out.empty()) emit(json_out, (reports.size() == 1 ? reports[0] : reports).dump(2) + "\n");
  return kExitOk;
}

int cmd_detect(const Context& ctx, const std::vector<std::string>& inputs, std::size_t window, const std::string& out,
               const std::string& state_flag) {
  const config::DetectorSection sec = ctx.cfg.detector.value_or(config::DetectorSection{});
  try {
    sec.detector.validate();
  } catch (const shm::ShmError& e) {
    throw UsageError(e.what());
  }
  std::optional<fs::path> state_path = sec.state_file;
  if (!state_flag.empty()) state_path = state_flag;
  shm::DetectorState state = state_path ? shm::DetectorState::load(*state_path) : shm::DetectorState{};
  const auto points = load_points(ctx, inputs, window);
  const auto events = shm::detect(points, sec.detector, state);
  for (const auto& e : events) {
    spdlog::warn("anomaly on {} at {}: {} {} than expected {} (z={:.2f})", e.channel_id, shm::format_iso8601(e.at),
                 csv::number(e.observed), shm::to_string(e.direction), csv::number(e.expected), e.score);
  }
  if (state_path) state.save(*state_path);
  std::ostringstream csv_out;
  shm::write_events_csv(csv_out, events);
  emit(out, csv_out.str());
  return kExitOk;
}

int cmd_spool(const Context& ctx, bool once, double until_idle) {
  if (!ctx.cfg.spool) throw UsageError("spool needs a 'spool' section in the config");
  spool::SpoolerConfig sc = ctx.cfg.spool->to_spooler_config();
  try {
    sc.validate();
  } catch (const spool::SpoolError& e) {
    throw UsageError(e.what());
  }
  spool::Spooler spooler(sc, spool::make_sink(sc.sink));
  int rc = kExitOk;
  if (once) {
    spooler.step();
  } else if (until_idle > 0) {
    if (!spooler.run_until_quiescent(std::chrono::duration<double>(until_idle), ctx.signals->token())) {
      spdlog::error("spool did not drain within {} s", until_idle);
      rc = kExitError;
    }
  } else {
    spooler.run(ctx.signals->token());
  }
  const auto s = spooler.summary();
  std::cout << fmt::format("enqueued={} attempts={} acked={} failed={} pending={} purged={}\n", s.enqueued,
                           s.attempts, s.acked, s.failed, s.pending, s.purged);
  if (s.failed > 0) rc = kExitError;
  return rc;
}

std::vector<metrics::MetricsSummary> load_all(const std::vector<std::string>& inputs) {
  std::vector<metrics::MetricsSummary> all;
  for (const auto& in : inputs) {
    auto more = report::load_summaries(in);
    all.insert(all.end(), more.begin(), more.end());
  }
  return all;
}

int cmd_report_radar(const std::vector<std::string>& inputs, const std::string& out) {
  const auto all = load_all(inputs);
  const auto radar = report::normalize_radar(all);
  for (const auto& d : radar.devices) {
    spdlog::info("{}: v=({:.4f}, {:.4f}, {:.4f}) area={:.4f}{}", d.label, d.v[0], d.v[1], d.v[2], d.area,
                 d.cpu_clamped ? " (negative cpu delta drawn at 0)" : "");
  }
  emit(out, report::emit_radar_svg(radar));
  return kExitOk;
}

int cmd_report_timeseries(const std::string& run_dir, const std::string& rms_in, const std::string& events_in,
                          const std::string& out) {
  if (run_dir.empty() == rms_in.empty()) throw UsageError("report timeseries needs exactly one of --run or --rms");
  if (!run_dir.empty()) {
    const auto rec = harness::read_run_artifacts(run_dir);
    const std::vector<harness::PhaseWindow> windows{rec.pre_pad, rec.active, rec.post_pad};
    emit(out, report::emit_cpu_timeseries_svg(rec.samples, windows));
    return kExitOk;
  }
  std::ifstream pin(rms_in);
  if (!pin) throw UsageError("cannot read " + rms_in);
  const auto points = shm::read_rms_csv(pin);
  std::vector<shm::AnomalyEvent> events;
  if (!events_in.empty()) {
    std::ifstream ein(events_in);
    if (!ein) throw UsageError("cannot read " + events_in);
    events = shm::read_events_csv(ein);
  }
  emit(out, report::emit_rms_svg(points, events));
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto overrides = take_overrides(args);

  CLI::App app{"Edge device resource benchmarking and SHM data path", "edgebench"};
  app.set_version_flag("--version", "edgebench 0.1.0");
  app.require_subcommand(1);
  std::string config_path, log_level;
  app.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  std::string out;
  auto* bench = app.add_subcommand("bench", "Run the padded benchmark plan");
  bench->add_option("-o,--out", out, "Artifact root (default: output_dir or runs/)");

  auto* tdms_cmd = app.add_subcommand("tdms", "Inspect TDMS files")->require_subcommand(1);
  std::string tdms_file, group, channel;
  auto* tdms_ls = tdms_cmd->add_subcommand("ls", "List groups, channels and properties");
  tdms_ls->add_option("file", tdms_file)->required()->check(CLI::ExistingFile);
  auto* tdms_dump = tdms_cmd->add_subcommand("dump", "Write one channel as CSV");
  tdms_dump->add_option("file", tdms_file)->required()->check(CLI::ExistingFile);
  tdms_dump->add_option("group", group)->required();
  tdms_dump->add_option("channel", channel)->required();

  std::vector<std::string> inputs;
  std::size_t window = 0;
  std::string json_out;
  auto* rms = app.add_subcommand("rms", "Windowed RMS of every numeric channel");
  rms->add_option("files", inputs, "TDMS files")->required()->check(CLI::ExistingFile);
  rms->add_option("-w,--window", window, "Samples per window (default: rms.window_len)");
  rms->add_option("-o,--out", out, "RMS CSV (default: stdout)");
  rms->add_option("--json", json_out, "Also write the structured report");

  std::string state_file;
  auto* detect = app.add_subcommand("detect", "Anomaly detection over RMS series");
  detect->add_option("inputs", inputs, "RMS CSV or TDMS files, in time order")->required()->check(CLI::ExistingFile);
  detect->add_option("-w,--window", window, "RMS window for TDMS inputs");
  detect->add_option("-o,--out", out, "Events CSV (default: stdout)");
  detect->add_option("--state", state_file, "Detector state carried across invocations");

  auto* spool_cmd = app.add_subcommand("spool", "Store-and-forward upload")->require_subcommand(1);
  bool once = false;
  double until_idle = 0;
  auto* spool_run = spool_cmd->add_subcommand("run", "Forward inbox files to the sink");
  spool_run->add_flag("--once", once, "Single scan and forward pass");
  spool_run->add_option("--until-idle", until_idle, "Exit once drained, failing after this many seconds");

  auto* report_cmd = app.add_subcommand("report", "Tables and plots")->require_subcommand(1);
  auto* report_table = report_cmd->add_subcommand("table", "mean ± std per device");
  report_table->add_option("--in", inputs, "Summary CSV/JSON files")->required()->check(CLI::ExistingFile);
  std::string csv_out;
  report_table->add_option("--csv", csv_out, "Also write the merged summary CSV");
  report_table->add_option("--json", json_out, "Also write the merged summary JSON");
  auto* report_radar = report_cmd->add_subcommand("radar", "Normalized three-axis radar");
  report_radar->add_option("--in", inputs, "Summary CSV/JSON files")->required()->check(CLI::ExistingFile);
  report_radar->add_option("-o,--out", out, "SVG (default: stdout)");
  std::string run_dir, rms_in, events_in;
  auto* report_ts = report_cmd->add_subcommand("timeseries", "CPU or RMS time series");
  report_ts->add_option("--run", run_dir, "Run artifact directory")->check(CLI::ExistingDirectory);
  report_ts->add_option("--rms", rms_in, "RMS CSV")->check(CLI::ExistingFile);
  report_ts->add_option("--events", events_in, "Events CSV to mark on the RMS plot")->check(CLI::ExistingFile);
  report_ts->add_option("-o,--out", out, "SVG (default: stdout)");

  auto* devices = app.add_subcommand("devices", "Device registry")->require_subcommand(1);
  std::string registry;
  auto* devices_ls = devices->add_subcommand("ls", "List known devices");
  devices_ls->add_option("--registry", registry, "Registry JSON (default: built-in table)")->check(CLI::ExistingFile);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Context ctx;
  std::string level = "info";
  try {
    nlohmann::json doc = config_path.empty() ? nlohmann::json::object() : config::parse_document(slurp(config_path));
    for (const auto& [k, v] : overrides) config::apply_override(doc, k, v);
    ctx.cfg = config::from_document(doc);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (ctx.cfg.log_level) level = *ctx.cfg.log_level;
  if (const char* env = std::getenv("EDGEBENCH_LOG"); env && *env) level = env;
  if (!log_level.empty()) level = log_level;
  setup_logging(level);

  SignalStop signals;
  ctx.signals = &signals;
  try {
    if (*bench) return cmd_bench(ctx, out);
    if (*tdms_ls) {
      std::cout << tdms::render(tdms::hierarchy(tdms::read_file(tdms_file)));
      return kExitOk;
    }
    if (*tdms_dump) {
      const auto file = tdms::read_file(tdms_file);
      const auto* ch = file.find_channel(group, channel);
      if (!ch) {
        spdlog::error("no channel /'{}'/'{}' in {}", group, channel, tdms_file);
        return kExitError;
      }
      std::string text = "index," + csv::field(channel) + "\n";
      for (std::size_t i = 0; i < ch->size(); ++i) text += std::to_string(i) + "," + render_value(ch->samples, i) + "\n";
      std::cout << text;
      return kExitOk;
    }
    if (*rms) return cmd_rms(ctx, inputs, window, out, json_out);
    if (*detect) return cmd_detect(ctx, inputs, window, out, state_file);
    if (*spool_run) return cmd_spool(ctx, once, until_idle);
    if (*report_table) {
      const auto all = load_all(inputs);
      std::cout << report::render_table(all);
      if (!csv_out.empty()) emit(csv_out, report::emit_csv(all));
      if (!json_out.empty()) emit(json_out, report::emit_json(all));
      return kExitOk;
    }
    if (*report_radar) return cmd_report_radar(inputs, out);
    if (*report_ts) return cmd_report_timeseries(run_dir, rms_in, events_in, out);
    if (*devices_ls) {
      const auto list = registry.empty() ? report::builtin_devices() : report::load_devices(registry);
      std::cout << report::render_devices(list);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  } catch (const report::ReportError& e) {
    spdlog::error("{}", e.what());
    return e.kind() == report::ReportError::Kind::kInvalidProfile ? kExitConfig : kExitError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return kExitError;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
