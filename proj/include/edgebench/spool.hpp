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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgebench/clock.hpp"

namespace edgebench::spool {

class SpoolError : public std::runtime_error {
 public:
  enum class Kind {
    kDirUnreadable,
    kReadFailed,
    kJournalWriteFailed,
    kBadJournal,
    kSinkUnreachable,
    kChecksumMismatchAtSink,
    kInvalidConfig,
  };

  SpoolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class EntryState { kPending, kInFlight, kAcked, kFailed };
const char* to_string(EntryState s);

struct SpoolEntry {
  std::uint64_t id = 0;
  std::filesystem::path source_path;
  std::uint64_t size_bytes = 0;
  std::string checksum;  // SHA-256 hex
  EntryState state = EntryState::kPending;
  std::uint32_t attempts = 0;
  WallTime first_seen{};
  WallTime last_attempt{};
  WallTime next_eligible{};
  WallTime acked_at{};
  bool source_removed = false;
  std::string sink_location;
  std::string last_error;

  bool operator==(const SpoolEntry&) const = default;
};

struct RetryPolicy {
  std::uint32_t max_attempts = 8;
  std::chrono::duration<double> base_backoff{2.0};
  double multiplier = 2.0;
  double jitter = 0.1;
};

struct SinkConfig {
  enum class Kind { kDirectoryCopy, kHttpPut };
  Kind kind = Kind::kDirectoryCopy;
  std::string target;  // directory path or http://host[:port]/prefix
  RetryPolicy retry;
  std::chrono::duration<double> retain_after_ack{3600.0};

  void validate() const;
};

// Object name used at the sink: <basename>.<first 8 hex of checksum>.
std::string sink_object_name(const SpoolEntry& entry);

// Delay before the next attempt after `attempts` failures, without jitter.
std::chrono::duration<double> backoff_delay(const RetryPolicy& policy, std::uint32_t attempts);

class Sink {
 public:
  virtual ~Sink() = default;
  // Delivers the source file and returns where it landed. Throws SpoolError
  // (kSinkUnreachable, kChecksumMismatchAtSink) on failure.
  virtual std::string deliver(const SpoolEntry& entry) = 0;
};

// Copies into a directory through a temporary name, then re-checksums the
// copy. An existing object with the right checksum counts as delivered.
class DirectorySink : public Sink {
 public:
  explicit DirectorySink(std::filesystem::path target) : target_(std::move(target)) {}
  std::string deliver(const SpoolEntry& entry) override;

 private:
  std::filesystem::path target_;
};

// HTTP PUT with the digest in X-Content-SHA256; the server must echo the same
// header on a 2xx response.
class HttpPutSink : public Sink {
 public:
  static constexpr const char* kDigestHeader = "X-Content-SHA256";

  explicit HttpPutSink(std::string url);
  std::string deliver(const SpoolEntry& entry) override;

 private:
  std::string origin_;
  std::string prefix_;
};

std::unique_ptr<Sink> make_sink(const SinkConfig& config);

// Inbox pickup. A file is a candidate once it was moved in by rename, or its
// size and mtime stayed unchanged for one stability interval. Hidden and
// temporary files are ignored. Each (path, size, mtime) is returned once.
class InboxScanner {
 public:
  InboxScanner(std::filesystem::path dir, std::chrono::duration<double> stability_interval);
  ~InboxScanner();

  InboxScanner(const InboxScanner&) = delete;
  InboxScanner& operator=(const InboxScanner&) = delete;

  std::vector<std::filesystem::path> scan();

  static bool ignored_name(const std::string& name);

 private:
  struct Observation {
    std::uintmax_t size = 0;
    std::filesystem::file_time_type mtime{};
    MonoTime since{};
  };

  void drain_renames();

  std::filesystem::path dir_;
  MonoClock::duration stability_;
  int inotify_fd_ = -1;
  std::set<std::string> renamed_;
  std::map<std::string, Observation> observed_;
  std::map<std::string, std::pair<std::uintmax_t, std::filesystem::file_time_type>> emitted_;
};

// Append-only, line-delimited JSON. The first line is a versioned header; each
// later line is a full snapshot of one entry after a transition.
class Journal {
 public:
  static constexpr int kVersion = 1;

  explicit Journal(std::filesystem::path path);
  ~Journal();

  Journal(const Journal&) = delete;
  Journal& operator=(const Journal&) = delete;

  void append(const SpoolEntry& entry, std::string_view event);
  const std::filesystem::path& path() const { return path_; }

  // Last snapshot per entry id. InFlight entries come back as Pending. A torn
  // final line (crash mid-append) is ignored.
  static std::map<std::uint64_t, SpoolEntry> replay(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  std::mutex mu_;
};

nlohmann::json entry_to_json(const SpoolEntry& e);
SpoolEntry entry_from_json(const nlohmann::json& j);

struct SpoolerConfig {
  std::filesystem::path inbox;
  std::filesystem::path journal;
  SinkConfig sink;
  std::chrono::duration<double> scan_interval{10.0};
  std::chrono::duration<double> stability_interval{2.0};
  std::uint64_t jitter_seed = std::random_device{}();

  void validate() const;
};

struct SpoolSummary {
  std::size_t enqueued = 0;
  std::size_t attempts = 0;
  std::size_t acked = 0;
  std::size_t failed = 0;
  std::size_t pending = 0;
  std::size_t purged = 0;
};

class Spooler {
 public:
  Spooler(SpoolerConfig config, std::unique_ptr<Sink> sink);

  // Checksums and journals a stable file. Returns the existing entry when the
  // same (path, checksum) is already tracked.
  SpoolEntry enqueue(const std::filesystem::path& path);

  // One delivery attempt for a Pending entry.
  SpoolEntry forward(std::uint64_t id);

  // One scan -> enqueue -> forward -> purge pass.
  void step();

  // Loops until stop is requested; fatal only on journal failure.
  SpoolSummary run(std::stop_token stop);

  // Steps until no entry is pending and the inbox holds no untracked file, or until `limit` elapses.
  // Returns true when quiescent.
  bool run_until_quiescent(std::chrono::duration<double> limit, std::stop_token stop = {});

  std::vector<SpoolEntry> entries() const;
  SpoolSummary summary() const;

 private:
  std::chrono::duration<double> jittered(std::chrono::duration<double> d);
  void purge_expired();
  bool quiescent() const;

  SpoolerConfig config_;
  std::unique_ptr<Sink> sink_;
  Journal journal_;
  InboxScanner scanner_;
  std::map<std::uint64_t, SpoolEntry> entries_;
  std::uint64_t next_id_ = 1;
  std::size_t attempts_ = 0;
  std::size_t enqueued_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace edgebench::spool
