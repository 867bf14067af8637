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
#include <cstddef>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgebench/clock.hpp"
#include "edgebench/tdms.hpp"

namespace edgebench::shm {

class ShmError : public std::runtime_error {
 public:
  enum class Kind { kEmptySeries, kInvalidConfig, kNoNumericChannels, kBadState, kBadRecord };

  ShmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct RmsPoint {
  std::string channel_id;  // "group/channel"
  WallTime window_start{};
  std::size_t window_len = 0;
  double rms = 0.0;
};

double rms(std::span<const double> samples);

// Non-overlapping windows of window_len samples starting at t0; a shorter
// trailing window is still emitted and is recognizable by its window_len.
std::vector<RmsPoint> windowed_rms(std::span<const double> series, std::size_t window_len,
                                   const std::string& channel_id, WallTime t0,
                                   std::chrono::nanoseconds dt);

struct DetectorConfig {
  std::size_t trailing_window = 96;
  double z_threshold = 3.0;
  std::size_t min_history = 20;
  std::optional<double> absolute_floor;

  void validate() const;
};

enum class Direction { kHigher, kLower };
const char* to_string(Direction d);

struct AnomalyEvent {
  std::string channel_id;
  WallTime at{};
  double observed = 0.0;
  double expected = 0.0;  // trailing mean
  double score = 0.0;     // z value
  Direction direction = Direction::kHigher;
  // Position of the point in the channel's history (0 = first point ever seen).
  std::size_t point_index = 0;
};

// Trailing-window z-score detector for one channel. Points that raise an
// event are kept out of the baseline.
class ChannelDetector {
 public:
  struct Entry {
    WallTime t{};
    double rms = 0.0;
  };

  std::optional<AnomalyEvent> observe(const RmsPoint& p, const DetectorConfig& cfg);

  // Mean of the current baseline, if it is non-empty.
  std::optional<double> expected() const;

  const std::deque<Entry>& ring() const { return ring_; }
  std::size_t seen() const { return seen_; }

  nlohmann::json to_json() const;
  static ChannelDetector from_json(const nlohmann::json& j);

 private:
  std::deque<Entry> ring_;
  std::size_t seen_ = 0;
};

// Detector state for every channel, persisted between files.
class DetectorState {
 public:
  static constexpr int kVersion = 1;

  ChannelDetector& channel(const std::string& id) { return channels_[id]; }
  const std::map<std::string, ChannelDetector>& channels() const { return channels_; }

  nlohmann::json to_json() const;
  static DetectorState from_json(const nlohmann::json& j);

  // A missing file is an empty state.
  static DetectorState load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, ChannelDetector> channels_;
};

// Stateless convenience: runs a fresh detector over one channel's points.
std::vector<AnomalyEvent> detect(std::span<const RmsPoint> points, const DetectorConfig& cfg);

// Runs `points` (any mix of channels, time-ordered per channel) through state.
std::vector<AnomalyEvent> detect(std::span<const RmsPoint> points, const DetectorConfig& cfg,
                                 DetectorState& state);

struct RmsOptions {
  std::size_t window_len = 0;
  // Used when a channel carries no wf_increment / wf_start_time properties.
  std::chrono::nanoseconds default_dt = std::chrono::seconds(1);
  WallTime default_t0{};
};

struct RmsReport {
  std::string source;
  std::string checksum;  // SHA-256 of the source file
  std::vector<RmsPoint> points;
  std::vector<AnomalyEvent> events;
};

// Per-channel RMS series of a TDMS file, in file order.
std::vector<RmsPoint> file_rms(const tdms::File& file, const RmsOptions& options);

RmsReport process_file(const std::filesystem::path& tdms_path, const RmsOptions& options,
                       const DetectorConfig& cfg, DetectorState& state);

WallTime from_tdms_timestamp(const tdms::Timestamp& ts);
std::string format_iso8601(WallTime t);
WallTime parse_iso8601(std::string_view s);

// channel_id,window_start,window_len,rms
void write_rms_csv(std::ostream& out, std::span<const RmsPoint> points);
std::vector<RmsPoint> read_rms_csv(std::istream& in);

// channel_id,at,observed,expected,score,direction
void write_events_csv(std::ostream& out, std::span<const AnomalyEvent> events);
std::vector<AnomalyEvent> read_events_csv(std::istream& in);

nlohmann::json to_json(const RmsReport& report);

}  // namespace edgebench::shm
