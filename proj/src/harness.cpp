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

#include "edgebench/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>
#include <spdlog/spdlog.h>

#include "edgebench/digest.hpp"

extern char** environ;

namespace edgebench::harness {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kNonZeroExit: return "nonzero_exit";
    case RunStatus::kSpawnFailed: return "spawn_failed";
    case RunStatus::kHookFailed: return "hook_failed";
    case RunStatus::kAborted: return "aborted";
  }
  return "completed";
}

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::kPrePad: return "pre_pad";
    case Phase::kActive: return "active";
    case Phase::kPostPad: return "post_pad";
  }
  return "pre_pad";
}

namespace {

RunStatus status_from(std::string_view s) {
  for (auto st : {RunStatus::kCompleted, RunStatus::kNonZeroExit, RunStatus::kSpawnFailed,
                  RunStatus::kHookFailed, RunStatus::kAborted}) {
    if (s == to_string(st)) return st;
  }
  throw std::runtime_error(fmt::format("unknown run status '{}'", s));
}

// RAII file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

// Sleeps unless stop is requested first. Returns false when interrupted.
bool interruptible_sleep(std::chrono::duration<double> d, std::stop_token stop) {
  if (d.count() <= 0) return !stop.stop_requested();
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  auto until = MonoClock::now() + std::chrono::duration_cast<MonoClock::duration>(d);
  return !cv.wait_until(lock, stop, until, [] { return false; }) && !stop.stop_requested();
}

std::optional<std::string> resolve_executable(const WorkloadSpec& w) {
  auto executable = [](const fs::path& p) { return ::access(p.c_str(), X_OK) == 0 && !fs::is_directory(p); };
  if (w.command.find('/') != std::string::npos) {
    fs::path p(w.command);
    if (p.is_relative() && !w.working_dir.empty()) p = w.working_dir / p;
    if (executable(p)) return fs::absolute(p).string();
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  std::string_view paths = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
  while (!paths.empty()) {
    auto colon = paths.find(':');
    std::string_view dir = paths.substr(0, colon);
    fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / w.command;
    if (executable(candidate)) return candidate.string();
    if (colon == std::string_view::npos) break;
    paths.remove_prefix(colon + 1);
  }
  return std::nullopt;
}

std::vector<std::string> build_environment(const BenchmarkPlan& plan, std::size_t run_index,
                                           const fs::path& manifest) {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  for (const auto& [k, v] : plan.workload.env) env[k] = v;
  env["EDGEBENCH_RUN_INDEX"] = std::to_string(run_index);
  env["EDGEBENCH_BATCH_SIZE"] = std::to_string(plan.batch_size);
  if (!manifest.empty()) env["EDGEBENCH_MANIFEST"] = manifest.string();
  std::vector<std::string> out;
  out.reserve(env.size());
  for (const auto& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

struct Spawned {
  pid_t pid = -1;
  Fd stdout_read;
};

// fork/exec with stdin from /dev/null, stdout to a pipe, stderr to a file.
// Throws std::system_error when the child could not be started.
Spawned spawn(const std::string& exe, const WorkloadSpec& w, const std::vector<std::string>& env,
              int stderr_fd) {
  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
  Fd out_r(out_pipe[0]), out_w(out_pipe[1]);
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
  Fd err_r(err_pipe[0]), err_w(err_pipe[1]);
  Fd devnull(::open("/dev/null", O_RDONLY | O_CLOEXEC));

  std::vector<std::string> argv_s{w.command};
  argv_s.insert(argv_s.end(), w.args.begin(), w.args.end());
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::vector<std::string> env_s = env;
  std::vector<char*> envp;
  for (auto& e : env_s) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::string wd = w.working_dir.string();

  pid_t pid = ::fork();
  if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
  if (pid == 0) {
    // Only async-signal-safe calls from here on.
    ::setpgid(0, 0);
    if (devnull.get() >= 0) ::dup2(devnull.get(), STDIN_FILENO);
    ::dup2(out_w.get(), STDOUT_FILENO);
    ::dup2(stderr_fd, STDERR_FILENO);
    int err = 0;
    if (!wd.empty() && ::chdir(wd.c_str()) != 0) {
      err = errno;
    } else {
      ::execve(exe.c_str(), argv.data(), envp.data());
      err = errno;
    }
    [[maybe_unused]] auto n = ::write(err_w.get(), &err, sizeof err);
    ::_exit(127);
  }
  out_w.reset();
  err_w.reset();
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err_r.get(), &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  if (n > 0) {
    ::waitpid(pid, nullptr, 0);
    throw std::system_error(child_errno, std::generic_category(), "exec " + exe);
  }
  return Spawned{pid, std::move(out_r)};
}

// Reads workload stdout, timestamps each line at receipt, mirrors it to
// stdout.log and feeds the marker parser.
class StdoutReader {
 public:
  StdoutReader(Fd fd, const fs::path& log_path, std::size_t batch_size)
      : fd_(std::move(fd)), log_(fmt::output_file(log_path.string())), parser_(batch_size) {
    thread_ = std::thread([this] { loop(); });
  }

  ~StdoutReader() { finish(MonoClock::now()); }

  // Stop reading once the pipe is drained or the deadline passes.
  MarkerResult finish(MonoTime deadline) {
    if (thread_.joinable()) {
      deadline_ns_.store(to_ns(deadline), std::memory_order_release);
      thread_.join();
      log_.close();
    }
    return std::move(result_);
  }

 private:
  void loop() {
    std::string pending;
    char buf[4096];
    while (true) {
      pollfd pfd{fd_.get(), POLLIN, 0};
      int r = ::poll(&pfd, 1, 50);
      if (r < 0 && errno == EINTR) continue;
      if (r > 0) {
        ssize_t n = ::read(fd_.get(), buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        auto received = MonoClock::now();
        log_.print("{}", std::string_view(buf, static_cast<std::size_t>(n)));
        pending.append(buf, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = pending.find('\n')) != std::string::npos) {
          parser_.feed(std::string_view(pending).substr(0, pos), received);
          pending.erase(0, pos + 1);
        }
        continue;
      }
      auto deadline = deadline_ns_.load(std::memory_order_acquire);
      if (deadline != 0 && to_ns(MonoClock::now()) >= deadline) break;
    }
    if (!pending.empty()) parser_.feed(pending, MonoClock::now());
    result_ = parser_.finish();
  }

  Fd fd_;
  fmt::ostream log_;
  MarkerParser parser_;
  MarkerResult result_;
  std::atomic<std::int64_t> deadline_ns_{0};
  std::thread thread_;
};

int open_pidfd(pid_t pid) {
#ifdef SYS_pidfd_open
  return static_cast<int>(::syscall(SYS_pidfd_open, pid, 0));
#else
  (void)pid;
  return -1;
#endif
}

// Blocks until the child has exited without reaping it, so the pid cannot be
// recycled while the sampler may still read it. Returns false if stop was
// requested first.
bool wait_exit_unreaped(pid_t pid, std::stop_token stop) {
  Fd pidfd(open_pidfd(pid));
  while (true) {
    if (stop.stop_requested()) return false;
    if (pidfd) {
      pollfd pfd{pidfd.get(), POLLIN, 0};
      int r = ::poll(&pfd, 1, 100);
      if (r > 0) return true;
      if (r < 0 && errno != EINTR) pidfd.reset();
      continue;
    }
    siginfo_t info{};
    int r = ::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOWAIT | WNOHANG);
    if (r == 0 && info.si_pid == pid) return true;
    if (r < 0 && errno != EINTR) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

int reap(pid_t pid) {
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return -WTERMSIG(status);
  return status;
}

json window_json(const PhaseWindow& w) {
  return {{"phase", to_string(w.phase)}, {"start_ns", to_ns(w.start)}, {"end_ns", to_ns(w.end)}};
}

PhaseWindow window_from(const json& j, Phase phase) {
  return PhaseWindow{phase, mono_from_ns(j.at("start_ns").get<std::int64_t>()),
                     mono_from_ns(j.at("end_ns").get<std::int64_t>())};
}

}  // namespace

void validate(const BenchmarkPlan& plan) {
  auto fail = [](const std::string& msg) { throw HarnessError(HarnessError::Kind::kInvalidPlan, msg); };
  if (plan.workload.command.empty()) fail("workload.command is empty");
  if (plan.batch_size < 1) fail("batch_size_B must be >= 1");
  if (plan.repetitions < 1) fail("repetitions_R must be >= 1");
  if (plan.padding.count() < 0) fail("padding_seconds must be >= 0");
  if (plan.sampling_interval.count() <= 0) fail("sampling_interval must be > 0");
  if (plan.sampling_interval < sampler::kMinInterval) fail("sampling_interval must be >= 10 ms");
  if (!plan.workload.input_manifest.empty() && plan.workload.input_manifest.size() != plan.batch_size) {
    fail(fmt::format("input_manifest has {} items but batch_size_B is {}",
                     plan.workload.input_manifest.size(), plan.batch_size));
  }
}

json plan_to_json(const BenchmarkPlan& plan) {
  json w = {{"command", plan.workload.command},
            {"args", plan.workload.args},
            {"env", plan.workload.env},
            {"working_dir", plan.workload.working_dir.string()},
            {"input_manifest", plan.workload.input_manifest}};
  json j = {{"workload", w},
            {"batch_size_B", plan.batch_size},
            {"repetitions_R", plan.repetitions},
            {"padding_seconds", plan.padding.count()},
            {"sampling_interval", plan.sampling_interval.count()},
            {"device_label", plan.device_label}};
  j["pre_run_hook"] = plan.pre_run_hook ? json(*plan.pre_run_hook) : json(nullptr);
  return j;
}

std::string plan_hash(const BenchmarkPlan& plan) {
  return sha256_hex(plan_to_json(plan).dump()).substr(0, 12);
}

fs::path run_directory(const BenchmarkPlan& plan, const HarnessOptions& options,
                       std::size_t run_index) {
  return options.output_root / plan_hash(plan) / std::to_string(run_index);
}

void attribute_item_peaks(std::vector<ItemMark>& marks, const sampler::SampleLog& samples) {
  for (auto& m : marks) {
    m.peak_rss_bytes.reset();
    for (const auto& s : samples.records) {
      if (s.t < m.start || s.t > m.end || !s.workload_rss_bytes) continue;
      m.peak_rss_bytes = std::max(m.peak_rss_bytes.value_or(0), *s.workload_rss_bytes);
    }
  }
}

RunRecord execute_repetition(const BenchmarkPlan& plan, std::size_t run_index,
                             const HarnessOptions& options, std::stop_token stop) {
  validate(plan);
  RunRecord rec;
  rec.run_index = run_index;
  const fs::path dir = run_directory(plan, options, run_index);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw HarnessError(HarnessError::Kind::kArtifactWriteFailed,
                       fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
  rec.stdout_log = dir / "stdout.log";
  rec.stderr_log = dir / "stderr.log";

  auto finish = [&](RunRecord& r) -> RunRecord {
    write_run_artifacts(r, dir);
    return std::move(r);
  };

  if (stop.stop_requested()) {
    rec.status = RunStatus::kAborted;
    rec.warnings.push_back("aborted before start");
    return finish(rec);
  }

  if (plan.pre_run_hook) {
    int rc = std::system(plan.pre_run_hook->c_str());
    if (rc != 0) {
      rec.status = RunStatus::kHookFailed;
      rec.warnings.push_back(fmt::format("pre_run_hook exited with status {}", rc));
      spdlog::warn("run {}: pre_run_hook failed ({}), repetition skipped", run_index, rc);
      return finish(rec);
    }
  }

  fs::path manifest;
  if (!plan.workload.input_manifest.empty()) {
    manifest = dir / "manifest.txt";
    auto out = fmt::output_file(manifest.string());
    for (const auto& item : plan.workload.input_manifest) out.print("{}\n", item);
  }
  auto env = build_environment(plan, run_index, manifest);
  auto exe = resolve_executable(plan.workload);

  Fd stderr_fd(::open(rec.stderr_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644));
  if (!stderr_fd) {
    throw HarnessError(HarnessError::Kind::kArtifactWriteFailed,
                       "cannot open " + rec.stderr_log.string());
  }

  sampler::WorkloadPidSlot pid_slot{0};
  const auto interval =
      std::chrono::duration_cast<std::chrono::nanoseconds>(plan.sampling_interval);
  sampler::Sampler sampler(interval, &pid_slot);

  rec.pre_pad.start = sampler.started_at();
  bool aborted = !interruptible_sleep(plan.padding, stop);
  rec.pre_pad.end = MonoClock::now();

  std::optional<StdoutReader> reader;
  if (!aborted) {
    rec.active.start = MonoClock::now();
    if (!exe) {
      rec.active.end = MonoClock::now();
      rec.status = RunStatus::kSpawnFailed;
      rec.warnings.push_back("workload command not found or not executable: " + plan.workload.command);
    } else {
      try {
        Spawned child = spawn(*exe, plan.workload, env, stderr_fd.get());
        pid_slot.store(child.pid, std::memory_order_release);
        reader.emplace(std::move(child.stdout_read), rec.stdout_log, plan.batch_size);
        bool exited = wait_exit_unreaped(child.pid, stop);
        rec.active.end = MonoClock::now();
        pid_slot.store(0, std::memory_order_release);
        if (!exited) {
          ::kill(-child.pid, SIGTERM);
          aborted = true;
        }
        rec.workload_exit = reap(child.pid);
        if (!aborted && rec.workload_exit != 0) {
          rec.status = RunStatus::kNonZeroExit;
          rec.warnings.push_back(fmt::format("workload exited with status {}", rec.workload_exit));
        }
      } catch (const std::system_error& e) {
        rec.active.end = MonoClock::now();
        rec.status = RunStatus::kSpawnFailed;
        rec.warnings.push_back(fmt::format("spawn failed: {}", e.what()));
      }
    }
  } else {
    rec.active.start = rec.active.end = rec.pre_pad.end;
  }

  rec.post_pad.start = MonoClock::now();
  if (!aborted) aborted = !interruptible_sleep(plan.padding, stop);
  rec.post_pad.end = MonoClock::now();
  rec.samples = sampler.stop();

  if (reader) {
    auto deadline = std::max(MonoClock::now(), rec.active.end + options.drain_timeout);
    MarkerResult markers = reader->finish(deadline);
    for (auto& w : markers.warnings) rec.warnings.push_back("marker: " + w);
    for (auto& m : markers.marks) {
      // A marker written just before exit can be read after the exit was seen.
      if (m.end > rec.active.end) {
        if (m.start > rec.active.end) {
          rec.warnings.push_back(fmt::format("marker: item {} arrived after exit; dropped", m.item_index));
          continue;
        }
        m.end = rec.active.end;
      }
      rec.item_marks.push_back(m);
    }
  } else {
    fmt::output_file(rec.stdout_log.string()).close();
  }
  attribute_item_peaks(rec.item_marks, rec.samples);

  if (aborted) {
    rec.status = RunStatus::kAborted;
    rec.warnings.push_back("operator abort; run void");
  }
  return finish(rec);
}

std::vector<RunRecord> run_plan(const BenchmarkPlan& plan, const HarnessOptions& options,
                                std::stop_token stop) {
  validate(plan);
  const fs::path root = options.output_root / plan_hash(plan);
  std::error_code ec;
  fs::create_directories(root, ec);
  {
    std::ofstream out(root / "plan.json");
    out << plan_to_json(plan).dump(2) << "\n";
    if (!out) {
      throw HarnessError(HarnessError::Kind::kArtifactWriteFailed,
                         "cannot write " + (root / "plan.json").string());
    }
  }
  std::vector<RunRecord> records;
  records.reserve(plan.repetitions);
  for (std::size_t i = 0; i < plan.repetitions; ++i) {
    spdlog::info("run {}/{} on '{}'", i + 1, plan.repetitions, plan.device_label);
    records.push_back(execute_repetition(plan, i, options, stop));
    const auto& r = records.back();
    spdlog::info("run {} {}: active {:.3f} s, {} samples, {} item marks", i, to_string(r.status),
                 r.active.seconds(), r.samples.records.size(), r.item_marks.size());
  }
  return records;
}

void write_run_artifacts(const RunRecord& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  sampler::write_samples_csv(r.samples, dir / "samples.csv");
  {
    auto out = fmt::output_file((dir / "marks.csv").string());
    out.print("item_index,start_ns,end_ns,peak_rss_bytes\n");
    for (const auto& m : r.item_marks) {
      out.print("{},{},{},{}\n", m.item_index, to_ns(m.start), to_ns(m.end),
                m.peak_rss_bytes ? fmt::format("{}", *m.peak_rss_bytes) : std::string());
    }
  }
  json meta = {{"run_index", r.run_index},
               {"status", to_string(r.status)},
               {"workload_exit", r.workload_exit},
               {"windows", {window_json(r.pre_pad), window_json(r.active), window_json(r.post_pad)}},
               {"warnings", r.warnings},
               {"anchor_wall_ns", r.samples.anchor.wall.time_since_epoch().count()},
               {"anchor_mono_ns", to_ns(r.samples.anchor.mono)},
               {"stdout_log", r.stdout_log.filename().string()},
               {"stderr_log", r.stderr_log.filename().string()}};
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
  if (!out) {
    throw HarnessError(HarnessError::Kind::kArtifactWriteFailed,
                       "cannot write " + (dir / "meta.json").string());
  }
}

RunRecord read_run_artifacts(const fs::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw std::runtime_error("cannot read " + (dir / "meta.json").string());
  json meta = json::parse(in);
  RunRecord r;
  r.run_index = meta.at("run_index").get<std::size_t>();
  r.status = status_from(meta.at("status").get<std::string>());
  r.workload_exit = meta.at("workload_exit").get<int>();
  const auto& w = meta.at("windows");
  r.pre_pad = window_from(w.at(0), Phase::kPrePad);
  r.active = window_from(w.at(1), Phase::kActive);
  r.post_pad = window_from(w.at(2), Phase::kPostPad);
  r.warnings = meta.value("warnings", std::vector<std::string>{});
  r.stdout_log = dir / meta.value("stdout_log", "stdout.log");
  r.stderr_log = dir / meta.value("stderr_log", "stderr.log");
  r.samples = sampler::read_samples_csv(dir / "samples.csv");

  std::ifstream marks(dir / "marks.csv");
  std::string line;
  while (std::getline(marks, line)) {
    if (line.empty() || line.rfind("item_index", 0) == 0) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      cols.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols.size() < 3) continue;
    ItemMark m;
    m.item_index = std::stoull(cols[0]);
    m.start = mono_from_ns(std::stoll(cols[1]));
    m.end = mono_from_ns(std::stoll(cols[2]));
    if (cols.size() > 3 && !cols[3].empty()) m.peak_rss_bytes = std::stoull(cols[3]);
    r.item_marks.push_back(m);
  }
  return r;
}

}  // namespace edgebench::harness
