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

#include "edgebench/spool.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/inotify.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "edgebench/digest.hpp"

namespace edgebench::spool {

namespace fs = std::filesystem;
using nlohmann::json;
using Err = SpoolError::Kind;

const char* to_string(EntryState s) {
  switch (s) {
    case EntryState::kPending: return "Pending";
    case EntryState::kInFlight: return "InFlight";
    case EntryState::kAcked: return "Acked";
    case EntryState::kFailed: return "Failed";
  }
  return "Pending";
}

namespace {

EntryState state_from(std::string_view s) {
  for (auto st : {EntryState::kPending, EntryState::kInFlight, EntryState::kAcked, EntryState::kFailed}) {
    if (s == to_string(st)) return st;
  }
  throw SpoolError(Err::kBadJournal, fmt::format("unknown entry state '{}'", s));
}

std::int64_t ns(WallTime t) { return t.time_since_epoch().count(); }
WallTime wall(std::int64_t v) { return WallTime(std::chrono::nanoseconds(v)); }

WallTime after(WallTime t, std::chrono::duration<double> d) {
  return t + std::chrono::duration_cast<std::chrono::nanoseconds>(d);
}

// True when `p` is `dir` or lies beneath it.
bool inside(const fs::path& p, const fs::path& dir) {
  std::error_code ec;
  auto a = fs::weakly_canonical(p, ec);
  auto b = fs::weakly_canonical(dir, ec);
  auto [ai, bi] = std::mismatch(a.begin(), a.end(), b.begin(), b.end());
  return bi == b.end();
}

void fsync_path(const fs::path& p, int flags) {
  int fd = ::open(p.c_str(), flags | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

void SinkConfig::validate() const {
  if (target.empty()) throw SpoolError(Err::kInvalidConfig, "sink target is empty");
  if (retry.max_attempts < 1) throw SpoolError(Err::kInvalidConfig, "retry.max_attempts must be >= 1");
  if (!(retry.base_backoff.count() > 0)) throw SpoolError(Err::kInvalidConfig, "retry.base_backoff must be > 0");
  if (!(retry.multiplier >= 1.0)) throw SpoolError(Err::kInvalidConfig, "retry.multiplier must be >= 1");
  if (retry.jitter < 0.0 || retry.jitter >= 1.0) throw SpoolError(Err::kInvalidConfig, "retry.jitter must be in [0, 1)");
  if (retain_after_ack.count() < 0) throw SpoolError(Err::kInvalidConfig, "retain_after_ack must be >= 0");
  if (kind == Kind::kHttpPut && target.rfind("http://", 0) != 0) {
    throw SpoolError(Err::kInvalidConfig, "http-put sink target must start with http://");
  }
}

std::string sink_object_name(const SpoolEntry& entry) {
  return entry.source_path.filename().string() + "." + entry.checksum.substr(0, 8);
}

std::chrono::duration<double> backoff_delay(const RetryPolicy& policy, std::uint32_t attempts) {
  const double exp = attempts == 0 ? 0.0 : static_cast<double>(attempts - 1);
  return policy.base_backoff * std::pow(policy.multiplier, exp);
}

namespace {

// Temporary copies left by a spooler that was killed mid-copy.
void remove_orphaned_partials(const fs::path& dir, const std::string& object) {
  const std::string prefix = "." + object + ".partial-";
  std::error_code ec;
  for (const auto& f : fs::directory_iterator(dir, ec)) {
    const std::string name = f.path().filename().string();
    if (name.rfind(prefix, 0) != 0) continue;
    const std::string pid_text = name.substr(prefix.size());
    pid_t pid = 0;
    auto [end, err] = std::from_chars(pid_text.data(), pid_text.data() + pid_text.size(), pid);
    if (err != std::errc() || end != pid_text.data() + pid_text.size() || pid <= 0) continue;
    if (pid != ::getpid() && ::kill(pid, 0) != 0 && errno == ESRCH) fs::remove(f.path(), ec);
  }
}

}  // namespace

std::string DirectorySink::deliver(const SpoolEntry& entry) {
  std::error_code ec;
  fs::create_directories(target_, ec);
  if (ec) throw SpoolError(Err::kSinkUnreachable, fmt::format("cannot create {}: {}", target_.string(), ec.message()));
  const fs::path dest = target_ / sink_object_name(entry);
  if (fs::exists(dest, ec)) {
    try {
      if (sha256_file(dest) == entry.checksum) return dest.string();
    } catch (const std::system_error&) {
    }
  }
  remove_orphaned_partials(target_, dest.filename().string());
  fs::path tmp = target_ / fmt::format(".{}.partial-{}", dest.filename().string(), ::getpid());
  fs::copy_file(entry.source_path, tmp, fs::copy_options::overwrite_existing, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw SpoolError(Err::kSinkUnreachable, fmt::format("copy to {} failed: {}", target_.string(), ec.message()));
  }
  fsync_path(tmp, O_RDONLY);
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw SpoolError(Err::kSinkUnreachable, fmt::format("rename into {} failed: {}", target_.string(), ec.message()));
  }
  fsync_path(target_, O_RDONLY | O_DIRECTORY);
  std::string got;
  try {
    got = sha256_file(dest);
  } catch (const std::system_error& e) {
    throw SpoolError(Err::kSinkUnreachable, e.what());
  }
  if (got != entry.checksum) {
    fs::remove(dest, ec);
    throw SpoolError(Err::kChecksumMismatchAtSink,
                     fmt::format("{}: sink copy hashes to {}, expected {}", dest.string(), got, entry.checksum));
  }
  return dest.string();
}

HttpPutSink::HttpPutSink(std::string url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) throw SpoolError(Err::kInvalidConfig, "http sink needs an http:// URL");
  auto slash = url.find('/', kScheme.size());
  origin_ = url.substr(0, slash);
  prefix_ = slash == std::string::npos ? "" : url.substr(slash);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

std::string HttpPutSink::deliver(const SpoolEntry& entry) {
  std::ifstream in(entry.source_path, std::ios::binary);
  if (!in) throw SpoolError(Err::kSinkUnreachable, "cannot read " + entry.source_path.string());
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (sha256_hex(body) != entry.checksum) {
    throw SpoolError(Err::kChecksumMismatchAtSink, entry.source_path.string() + " changed since it was enqueued");
  }
  httplib::Client client(origin_);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  const std::string path = prefix_ + "/" + httplib::detail::encode_url(sink_object_name(entry));
  httplib::Headers headers{{kDigestHeader, entry.checksum}};
  auto res = client.Put(path, headers, body, "application/octet-stream");
  if (!res) {
    throw SpoolError(Err::kSinkUnreachable, fmt::format("PUT {}{}: {}", origin_, path, httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw SpoolError(Err::kSinkUnreachable, fmt::format("PUT {}{} returned {}", origin_, path, res->status));
  }
  if (res->get_header_value(kDigestHeader) != entry.checksum) {
    throw SpoolError(Err::kChecksumMismatchAtSink,
                     fmt::format("PUT {}{} acknowledged digest '{}'", origin_, path, res->get_header_value(kDigestHeader)));
  }
  return origin_ + path;
}

std::unique_ptr<Sink> make_sink(const SinkConfig& config) {
  config.validate();
  if (config.kind == SinkConfig::Kind::kHttpPut) return std::make_unique<HttpPutSink>(config.target);
  return std::make_unique<DirectorySink>(config.target);
}

InboxScanner::InboxScanner(fs::path dir, std::chrono::duration<double> stability_interval)
    : dir_(std::move(dir)), stability_(std::chrono::duration_cast<MonoClock::duration>(stability_interval)) {
  inotify_fd_ = ::inotify_init1(IN_NONBLOCK | IN_CLOEXEC);
  if (inotify_fd_ >= 0 && ::inotify_add_watch(inotify_fd_, dir_.c_str(), IN_MOVED_TO) < 0) {
    ::close(inotify_fd_);
    inotify_fd_ = -1;
  }
}

InboxScanner::~InboxScanner() {
  if (inotify_fd_ >= 0) ::close(inotify_fd_);
}

bool InboxScanner::ignored_name(const std::string& name) {
  if (name.empty() || name[0] == '.' || name.back() == '~') return true;
  for (std::string_view suffix : {".tmp", ".part", ".partial", ".swp", ".filepart"}) {
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return true;
    }
  }
  return false;
}

void InboxScanner::drain_renames() {
  if (inotify_fd_ < 0) return;
  alignas(inotify_event) char buf[8192];
  while (true) {
    ssize_t n = ::read(inotify_fd_, buf, sizeof buf);
    if (n <= 0) break;
    for (char* p = buf; p < buf + n;) {
      auto* ev = reinterpret_cast<inotify_event*>(p);
      if ((ev->mask & IN_MOVED_TO) && ev->len > 0) renamed_.insert(ev->name);
      p += sizeof(inotify_event) + ev->len;
    }
  }
}

std::vector<fs::path> InboxScanner::scan() {
  drain_renames();
  std::error_code ec;
  fs::directory_iterator it(dir_, ec);
  if (ec) throw SpoolError(Err::kDirUnreadable, fmt::format("cannot read inbox {}: {}", dir_.string(), ec.message()));
  const auto now = MonoClock::now();
  std::vector<fs::path> out;
  std::set<std::string> present;
  for (const auto& entry : it) {
    const std::string name = entry.path().filename().string();
    if (ignored_name(name) || !entry.is_regular_file(ec)) continue;
    present.insert(name);
    const auto size = entry.file_size(ec);
    if (ec) continue;
    const auto mtime = entry.last_write_time(ec);
    if (ec) continue;

    bool stable = false;
    if (renamed_.erase(name) > 0) {
      stable = true;
    } else {
      auto obs = observed_.find(name);
      if (obs == observed_.end() || obs->second.size != size || obs->second.mtime != mtime) {
        observed_[name] = Observation{size, mtime, now};
      } else if (now - obs->second.since >= stability_) {
        stable = true;
      }
    }
    if (!stable) continue;
    auto prev = emitted_.find(name);
    if (prev != emitted_.end() && prev->second.first == size && prev->second.second == mtime) continue;
    emitted_[name] = {size, mtime};
    out.push_back(entry.path());
  }
  std::erase_if(observed_, [&](const auto& kv) { return !present.contains(kv.first); });
  std::erase_if(emitted_, [&](const auto& kv) { return !present.contains(kv.first); });
  std::sort(out.begin(), out.end());
  return out;
}

json entry_to_json(const SpoolEntry& e) {
  return {{"id", e.id},
          {"path", e.source_path.string()},
          {"size", e.size_bytes},
          {"checksum", e.checksum},
          {"state", to_string(e.state)},
          {"attempts", e.attempts},
          {"first_seen_ns", ns(e.first_seen)},
          {"last_attempt_ns", ns(e.last_attempt)},
          {"next_eligible_ns", ns(e.next_eligible)},
          {"acked_at_ns", ns(e.acked_at)},
          {"source_removed", e.source_removed},
          {"location", e.sink_location},
          {"error", e.last_error}};
}

SpoolEntry entry_from_json(const json& j) {
  SpoolEntry e;
  e.id = j.at("id").get<std::uint64_t>();
  e.source_path = j.at("path").get<std::string>();
  e.size_bytes = j.at("size").get<std::uint64_t>();
  e.checksum = j.at("checksum").get<std::string>();
  e.state = state_from(j.at("state").get<std::string>());
  e.attempts = j.at("attempts").get<std::uint32_t>();
  e.first_seen = wall(j.at("first_seen_ns").get<std::int64_t>());
  e.last_attempt = wall(j.at("last_attempt_ns").get<std::int64_t>());
  e.next_eligible = wall(j.at("next_eligible_ns").get<std::int64_t>());
  e.acked_at = wall(j.at("acked_at_ns").get<std::int64_t>());
  e.source_removed = j.at("source_removed").get<bool>();
  e.sink_location = j.value("location", "");
  e.last_error = j.value("error", "");
  return e;
}

Journal::Journal(fs::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
  const bool fresh = !fs::exists(path_, ec) || fs::file_size(path_, ec) == 0;
  if (!fresh) replay(path_);  // validates the header
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw SpoolError(Err::kJournalWriteFailed, fmt::format("cannot open journal {}: {}", path_.string(), std::strerror(errno)));
  }
  if (fresh) {
    std::string header = json{{"format", "edgebench-spool-journal"}, {"version", kVersion}}.dump() + "\n";
    if (::write(fd_, header.data(), header.size()) != static_cast<ssize_t>(header.size()) || ::fdatasync(fd_) != 0) {
      throw SpoolError(Err::kJournalWriteFailed, "cannot write journal header to " + path_.string());
    }
  }
}

Journal::~Journal() {
  if (fd_ >= 0) ::close(fd_);
}

void Journal::append(const SpoolEntry& entry, std::string_view event) {
  json rec = entry_to_json(entry);
  rec["event"] = event;
  rec["ts_ns"] = ns(wall_now());
  const std::string line = rec.dump() + "\n";
  std::lock_guard lock(mu_);
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw SpoolError(Err::kJournalWriteFailed, fmt::format("journal append failed: {}", std::strerror(errno)));
    off += static_cast<std::size_t>(n);
  }
  if (::fdatasync(fd_) != 0) {
    throw SpoolError(Err::kJournalWriteFailed, fmt::format("journal sync failed: {}", std::strerror(errno)));
  }
}

std::map<std::uint64_t, SpoolEntry> Journal::replay(const fs::path& path) {
  std::map<std::uint64_t, SpoolEntry> out;
  std::ifstream in(path);
  if (!in) return out;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  // A line without its newline was cut off by a crash.
  in.clear();
  in.seekg(0, std::ios::end);
  bool ends_with_newline = true;
  if (in.tellg() > 0) {
    in.seekg(-1, std::ios::end);
    ends_with_newline = in.get() == '\n';
  }
  if (lines.empty()) return out;
  json header;
  try {
    header = json::parse(lines[0]);
  } catch (const json::exception&) {
    throw SpoolError(Err::kBadJournal, path.string() + ": unreadable header");
  }
  if (header.value("format", "") != "edgebench-spool-journal" || header.value("version", 0) != kVersion) {
    throw SpoolError(Err::kBadJournal, path.string() + ": not a version 1 spool journal");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      SpoolEntry e = entry_from_json(json::parse(lines[i]));
      if (e.state == EntryState::kInFlight) e.state = EntryState::kPending;
      out[e.id] = std::move(e);
    } catch (const std::exception& ex) {
      if (i + 1 == lines.size() && !ends_with_newline) {
        spdlog::warn("journal {}: ignoring torn final record", path.string());
        break;
      }
      throw SpoolError(Err::kBadJournal, fmt::format("{}:{}: {}", path.string(), i + 1, ex.what()));
    }
  }
  return out;
}

void SpoolerConfig::validate() const {
  sink.validate();
  if (inbox.empty()) throw SpoolError(Err::kInvalidConfig, "spool inbox is not set");
  if (journal.empty()) throw SpoolError(Err::kInvalidConfig, "spool journal is not set");
  if (inside(journal, inbox)) throw SpoolError(Err::kInvalidConfig, "the journal must live outside the inbox");
  if (sink.kind == SinkConfig::Kind::kDirectoryCopy && inside(sink.target, inbox)) {
    throw SpoolError(Err::kInvalidConfig, "the sink directory must live outside the inbox");
  }
  if (!(scan_interval.count() > 0)) throw SpoolError(Err::kInvalidConfig, "scan_interval must be > 0");
  if (stability_interval.count() < 0) throw SpoolError(Err::kInvalidConfig, "stability_interval must be >= 0");
}

namespace {

const SpoolerConfig& checked(const SpoolerConfig& c) {
  c.validate();
  return c;
}

}  // namespace

Spooler::Spooler(SpoolerConfig config, std::unique_ptr<Sink> sink)
    : config_(checked(config)),
      sink_(std::move(sink)),
      journal_(config_.journal),
      scanner_(config_.inbox, config_.stability_interval),
      entries_(Journal::replay(config_.journal)),
      rng_(config_.jitter_seed) {
  if (!entries_.empty()) next_id_ = entries_.rbegin()->first + 1;
  std::error_code ec;
  if (!fs::is_directory(config_.inbox, ec)) {
    throw SpoolError(Err::kDirUnreadable, "inbox " + config_.inbox.string() + " is not a directory");
  }
}

SpoolEntry Spooler::enqueue(const fs::path& path) {
  std::string checksum;
  std::uint64_t size = 0;
  try {
    size = fs::file_size(path);
    checksum = sha256_file(path);
  } catch (const std::exception& e) {
    throw SpoolError(Err::kReadFailed, fmt::format("cannot read {}: {}", path.string(), e.what()));
  }
  for (const auto& [id, e] : entries_) {
    if (e.source_path == path && e.checksum == checksum && !e.source_removed) return e;
  }
  SpoolEntry e;
  e.id = next_id_;
  e.source_path = path;
  e.size_bytes = size;
  e.checksum = std::move(checksum);
  e.first_seen = wall_now();
  e.next_eligible = e.first_seen;
  journal_.append(e, "enqueue");
  ++next_id_;
  ++enqueued_;
  entries_[e.id] = e;
  spdlog::debug("enqueued {} ({} bytes, sha256 {})", path.string(), size, e.checksum);
  return e;
}

std::chrono::duration<double> Spooler::jittered(std::chrono::duration<double> d) {
  const double j = config_.sink.retry.jitter;
  if (j <= 0) return d;
  std::uniform_real_distribution<double> dist(1.0 - j, 1.0 + j);
  return d * dist(rng_);
}

SpoolEntry Spooler::forward(std::uint64_t id) {
  SpoolEntry& e = entries_.at(id);
  if (e.state != EntryState::kPending) return e;
  e.state = EntryState::kInFlight;
  e.attempts += 1;
  e.last_attempt = wall_now();
  journal_.append(e, "attempt");
  ++attempts_;
  try {
    e.sink_location = sink_->deliver(e);
    e.state = EntryState::kAcked;
    e.acked_at = wall_now();
    e.last_error.clear();
    journal_.append(e, "ack");
    spdlog::info("delivered {} -> {} (attempt {})", e.source_path.string(), e.sink_location, e.attempts);
  } catch (const SpoolError& err) {
    if (err.kind() == Err::kJournalWriteFailed) throw;
    e.last_error = err.what();
    if (e.attempts >= config_.sink.retry.max_attempts) {
      e.state = EntryState::kFailed;
      journal_.append(e, "failed");
      spdlog::error("giving up on {} after {} attempts: {}", e.source_path.string(), e.attempts, err.what());
    } else {
      e.state = EntryState::kPending;
      e.next_eligible = after(wall_now(), jittered(backoff_delay(config_.sink.retry, e.attempts)));
      journal_.append(e, "retry");
      spdlog::warn("delivery of {} failed (attempt {}): {}", e.source_path.string(), e.attempts, err.what());
    }
  }
  return e;
}

void Spooler::purge_expired() {
  const auto now = wall_now();
  for (auto& [id, e] : entries_) {
    if (e.state != EntryState::kAcked || e.source_removed) continue;
    if (now < after(e.acked_at, config_.sink.retain_after_ack)) continue;
    std::error_code ec;
    bool same_file = false;
    try {
      same_file = fs::file_size(e.source_path) == e.size_bytes && sha256_file(e.source_path) == e.checksum;
    } catch (const std::exception&) {
    }
    // A different file now at the same path is a new drop; leave it alone.
    if (same_file) fs::remove(e.source_path, ec);
    if (ec) continue;
    e.source_removed = true;
    journal_.append(e, "purge");
  }
}

void Spooler::step() {
  for (const auto& path : scanner_.scan()) {
    try {
      enqueue(path);
    } catch (const SpoolError& e) {
      if (e.kind() == Err::kJournalWriteFailed) throw;
      spdlog::warn("{}", e.what());
    }
  }
  std::vector<std::uint64_t> due;
  const auto now = wall_now();
  for (const auto& [id, e] : entries_) {
    if (e.state == EntryState::kPending && e.next_eligible <= now) due.push_back(id);
  }
  for (auto id : due) forward(id);
  purge_expired();
}

bool Spooler::quiescent() const {
  for (const auto& [id, e] : entries_) {
    if (e.state == EntryState::kPending || e.state == EntryState::kInFlight) return false;
  }
  return true;
}

SpoolSummary Spooler::run(std::stop_token stop) {
  std::mutex mu;
  std::condition_variable_any cv;
  while (!stop.stop_requested()) {
    step();
    std::unique_lock lock(mu);
    cv.wait_for(lock, stop, config_.scan_interval, [] { return false; });
  }
  return summary();
}

bool Spooler::run_until_quiescent(std::chrono::duration<double> limit, std::stop_token stop) {
  const auto deadline = MonoClock::now() + std::chrono::duration_cast<MonoClock::duration>(limit);
  // Poll faster than the scan interval so short backoffs are honored.
  const auto tick = std::min<std::chrono::duration<double>>(config_.scan_interval, std::chrono::milliseconds(20));
  // The inbox must be scanned at least twice a stability interval apart
  // before it can be called empty.
  const auto settle = MonoClock::now() + std::chrono::duration_cast<MonoClock::duration>(config_.stability_interval);
  while (!stop.stop_requested()) {
    step();
    const bool inbox_settled = MonoClock::now() >= settle;
    if (inbox_settled && quiescent()) {
      bool untracked = false;
      std::error_code ec;
      for (const auto& f : fs::directory_iterator(config_.inbox, ec)) {
        if (InboxScanner::ignored_name(f.path().filename().string()) || !f.is_regular_file(ec)) continue;
        bool known = false;
        for (const auto& [id, e] : entries_) {
          if (e.source_path == f.path() && !e.source_removed) known = true;
        }
        if (!known) untracked = true;
      }
      if (!untracked) return true;
    }
    if (MonoClock::now() >= deadline) return false;
    std::this_thread::sleep_for(tick);
  }
  return quiescent();
}

std::vector<SpoolEntry> Spooler::entries() const {
  std::vector<SpoolEntry> out;
  for (const auto& [id, e] : entries_) out.push_back(e);
  return out;
}

SpoolSummary Spooler::summary() const {
  SpoolSummary s;
  s.enqueued = enqueued_;
  s.attempts = attempts_;
  for (const auto& [id, e] : entries_) {
    switch (e.state) {
      case EntryState::kAcked: ++s.acked; break;
      case EntryState::kFailed: ++s.failed; break;
      default: ++s.pending; break;
    }
    if (e.source_removed) ++s.purged;
  }
  return s;
}

}  // namespace edgebench::spool
