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

#include "edgebench/shm.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "edgebench/csv.hpp"
#include "edgebench/digest.hpp"

namespace edgebench::shm {

using nlohmann::json;
namespace chr = std::chrono;

double rms(std::span<const double> samples) {
  if (samples.empty()) throw ShmError(ShmError::Kind::kEmptySeries, "rms of an empty series");
  // Scale by the largest magnitude so squares neither overflow nor underflow.
  double scale = 0.0;
  for (double x : samples) scale = std::max(scale, std::fabs(x));
  if (scale == 0.0 || !std::isfinite(scale)) {
    if (scale == 0.0) return 0.0;
    double sum = 0.0;
    for (double x : samples) sum += x * x;
    return std::sqrt(sum / static_cast<double>(samples.size()));
  }
  double sum = 0.0;
  for (double x : samples) {
    const double r = x / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum / static_cast<double>(samples.size()));
}

std::vector<RmsPoint> windowed_rms(std::span<const double> series, std::size_t window_len,
                                   const std::string& channel_id, WallTime t0, chr::nanoseconds dt) {
  if (window_len < 1) throw ShmError(ShmError::Kind::kInvalidConfig, "window_len must be >= 1");
  if (series.empty()) throw ShmError(ShmError::Kind::kEmptySeries, channel_id + " has no samples");
  std::vector<RmsPoint> out;
  for (std::size_t start = 0; start < series.size(); start += window_len) {
    const std::size_t n = std::min(window_len, series.size() - start);
    out.push_back(RmsPoint{channel_id, t0 + dt * static_cast<std::int64_t>(start), n,
                           rms(series.subspan(start, n))});
  }
  return out;
}

void DetectorConfig::validate() const {
  auto fail = [](const std::string& m) { throw ShmError(ShmError::Kind::kInvalidConfig, m); };
  if (min_history < 2) fail("min_history must be >= 2");
  if (trailing_window < min_history) fail("trailing_window_W must be >= min_history");
  if (!(z_threshold > 0.0)) fail("z_threshold must be > 0");
  if (absolute_floor && *absolute_floor < 0.0) fail("absolute_floor must be >= 0");
}

const char* to_string(Direction d) { return d == Direction::kHigher ? "higher" : "lower"; }

std::optional<double> ChannelDetector::expected() const {
  if (ring_.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& e : ring_) sum += e.rms;
  return sum / static_cast<double>(ring_.size());
}

std::optional<AnomalyEvent> ChannelDetector::observe(const RmsPoint& p, const DetectorConfig& cfg) {
  const std::size_t index = seen_++;
  std::optional<AnomalyEvent> event;
  if (ring_.size() >= cfg.min_history) {
    const double mean = *expected();
    double ss = 0.0;
    for (const auto& e : ring_) ss += (e.rms - mean) * (e.rms - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(ring_.size() - 1));
    const double diff = p.rms - mean;
    // Rounding noise on a flat baseline is not spread.
    if (sigma > 1e-12 * std::fabs(mean) && sigma > 0.0) {
      const double z = diff / sigma;
      if (std::fabs(z) >= cfg.z_threshold && (!cfg.absolute_floor || std::fabs(diff) >= *cfg.absolute_floor)) {
        event = AnomalyEvent{p.channel_id, p.window_start, p.rms, mean, z,
                             diff > 0 ? Direction::kHigher : Direction::kLower, index};
      }
    }
  }
  if (!event) {
    ring_.push_back({p.window_start, p.rms});
    while (ring_.size() > cfg.trailing_window) ring_.pop_front();
  }
  return event;
}

json ChannelDetector::to_json() const {
  json ring = json::array();
  for (const auto& e : ring_) ring.push_back({e.t.time_since_epoch().count(), e.rms});
  return {{"seen", seen_}, {"ring", ring}};
}

ChannelDetector ChannelDetector::from_json(const json& j) {
  ChannelDetector d;
  d.seen_ = j.at("seen").get<std::size_t>();
  for (const auto& e : j.at("ring")) {
    d.ring_.push_back({WallTime(chr::nanoseconds(e.at(0).get<std::int64_t>())), e.at(1).get<double>()});
  }
  return d;
}

json DetectorState::to_json() const {
  json channels = json::object();
  for (const auto& [id, d] : channels_) channels[id] = d.to_json();
  return {{"format", "edgebench-detector-state"}, {"version", kVersion}, {"channels", channels}};
}

DetectorState DetectorState::from_json(const json& j) {
  if (j.value("format", "") != "edgebench-detector-state") {
    throw ShmError(ShmError::Kind::kBadState, "not a detector state document");
  }
  if (j.value("version", 0) != kVersion) {
    throw ShmError(ShmError::Kind::kBadState, fmt::format("unsupported detector state version {}", j.value("version", 0)));
  }
  DetectorState s;
  try {
    for (const auto& [id, d] : j.at("channels").items()) s.channels_[id] = ChannelDetector::from_json(d);
  } catch (const json::exception& e) {
    throw ShmError(ShmError::Kind::kBadState, std::string("malformed detector state: ") + e.what());
  }
  return s;
}

DetectorState DetectorState::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ShmError(ShmError::Kind::kBadState, fmt::format("{}: {}", path.string(), e.what()));
  }
}

void DetectorState::save(const std::filesystem::path& path) const {
  // Write-then-rename so a crash never leaves a half-written state file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << to_json().dump(1) << "\n";
    if (!out) throw ShmError(ShmError::Kind::kBadState, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<AnomalyEvent> detect(std::span<const RmsPoint> points, const DetectorConfig& cfg,
                                 DetectorState& state) {
  cfg.validate();
  std::vector<AnomalyEvent> events;
  for (const auto& p : points) {
    if (auto e = state.channel(p.channel_id).observe(p, cfg)) events.push_back(std::move(*e));
  }
  return events;
}

std::vector<AnomalyEvent> detect(std::span<const RmsPoint> points, const DetectorConfig& cfg) {
  DetectorState state;
  return detect(points, cfg, state);
}

WallTime from_tdms_timestamp(const tdms::Timestamp& ts) {
  // 1904-01-01 to 1970-01-01.
  constexpr std::int64_t kEpochOffset = 2082844800;
  // floor(fractions * 1e9 / 2^64) in two 32-bit halves.
  const std::uint64_t hi = ts.fractions >> 32, lo = ts.fractions & 0xFFFFFFFFu;
  const auto frac_ns = static_cast<std::int64_t>((hi * 1000000000u + ((lo * 1000000000u) >> 32)) >> 32);
  return WallTime(chr::seconds(ts.seconds - kEpochOffset) + chr::nanoseconds(frac_ns));
}

std::vector<RmsPoint> file_rms(const tdms::File& file, const RmsOptions& options) {
  if (options.window_len < 1) throw ShmError(ShmError::Kind::kInvalidConfig, "window_len must be >= 1");
  std::vector<RmsPoint> out;
  bool any = false;
  for (const auto& g : file.groups) {
    for (const auto& c : g.channels) {
      if (!tdms::is_numeric(c.dtype())) continue;
      any = true;
      if (c.size() == 0) continue;
      WallTime t0 = options.default_t0;
      chr::nanoseconds dt = options.default_dt;
      for (const auto& p : c.properties) {
        if (p.name == "wf_start_time") {
          if (auto* ts = std::get_if<tdms::Timestamp>(&p.value)) t0 = from_tdms_timestamp(*ts);
        } else if (p.name == "wf_increment") {
          if (auto* inc = std::get_if<double>(&p.value); inc && *inc > 0) {
            dt = chr::nanoseconds(static_cast<std::int64_t>(std::llround(*inc * 1e9)));
          }
        }
      }
      auto series = tdms::to_f64(c.samples);
      auto pts = windowed_rms(series, options.window_len, g.name + "/" + c.name, t0, dt);
      out.insert(out.end(), std::make_move_iterator(pts.begin()), std::make_move_iterator(pts.end()));
    }
  }
  if (!any) throw ShmError(ShmError::Kind::kNoNumericChannels, "file has no numeric channels");
  return out;
}

RmsReport process_file(const std::filesystem::path& tdms_path, const RmsOptions& options,
                       const DetectorConfig& cfg, DetectorState& state) {
  cfg.validate();
  RmsReport report;
  report.source = tdms_path.string();
  report.checksum = sha256_file(tdms_path);
  report.points = file_rms(tdms::read_file(tdms_path), options);
  report.events = detect(report.points, cfg, state);
  return report;
}

std::string format_iso8601(WallTime t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd(day);
  auto rest = t - day;
  const auto h = chr::duration_cast<chr::hours>(rest);
  rest -= h;
  const auto m = chr::duration_cast<chr::minutes>(rest);
  rest -= m;
  const auto s = chr::duration_cast<chr::seconds>(rest);
  rest -= s;
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:09}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h.count(), m.count(),
                     s.count(), rest.count());
}

WallTime parse_iso8601(std::string_view s) {
  auto bad = [&] { return ShmError(ShmError::Kind::kBadRecord, fmt::format("bad timestamp '{}'", s)); };
  auto num = [&](std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw bad();
    int v = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
    if (ec != std::errc() || p != s.data() + pos + len) throw bad();
    return v;
  };
  if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':') throw bad();
  const chr::year_month_day ymd{chr::year(num(0, 4)), chr::month(static_cast<unsigned>(num(5, 2))),
                                chr::day(static_cast<unsigned>(num(8, 2)))};
  if (!ymd.ok()) throw bad();
  WallTime t = chr::sys_days(ymd) + chr::hours(num(11, 2)) + chr::minutes(num(14, 2)) + chr::seconds(num(17, 2));
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::int64_t ns = 0;
    int digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 9) {
        ns = ns * 10 + (s[pos] - '0');
        ++digits;
      }
      ++pos;
    }
    while (digits++ < 9) ns *= 10;
    t += chr::nanoseconds(ns);
  }
  if (pos != s.size() - 1 || s[pos] != 'Z') throw bad();
  return t;
}

void write_rms_csv(std::ostream& out, std::span<const RmsPoint> points) {
  out << "channel_id,window_start,window_len,rms\n";
  for (const auto& p : points) {
    out << csv::field(p.channel_id) << ',' << format_iso8601(p.window_start) << ',' << p.window_len << ','
        << csv::number(p.rms) << '\n';
  }
}

std::vector<RmsPoint> read_rms_csv(std::istream& in) {
  std::vector<RmsPoint> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("channel_id,", 0) == 0)) continue;
    auto cols = csv::split(line);
    if (cols.size() != 4) {
      throw ShmError(ShmError::Kind::kBadRecord, fmt::format("line {}: expected 4 fields, got {}", lineno, cols.size()));
    }
    try {
      out.push_back(RmsPoint{cols[0], parse_iso8601(cols[1]), std::stoull(cols[2]), std::stod(cols[3])});
    } catch (const std::logic_error&) {
      throw ShmError(ShmError::Kind::kBadRecord, fmt::format("line {}: malformed number", lineno));
    }
  }
  return out;
}

void write_events_csv(std::ostream& out, std::span<const AnomalyEvent> events) {
  out << "channel_id,at,observed,expected,score,direction\n";
  for (const auto& e : events) {
    out << csv::field(e.channel_id) << ',' << format_iso8601(e.at) << ',' << csv::number(e.observed) << ','
        << csv::number(e.expected) << ',' << csv::number(e.score) << ',' << to_string(e.direction) << '\n';
  }
}

std::vector<AnomalyEvent> read_events_csv(std::istream& in) {
  std::vector<AnomalyEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (lineno == 1 && line.rfind("channel_id,", 0) == 0)) continue;
    auto cols = csv::split(line);
    if (cols.size() != 6) {
      throw ShmError(ShmError::Kind::kBadRecord, fmt::format("line {}: expected 6 fields, got {}", lineno, cols.size()));
    }
    if (cols[5] != "higher" && cols[5] != "lower") {
      throw ShmError(ShmError::Kind::kBadRecord, fmt::format("line {}: bad direction '{}'", lineno, cols[5]));
    }
    try {
      AnomalyEvent e;
      e.channel_id = cols[0];
      e.at = parse_iso8601(cols[1]);
      e.observed = std::stod(cols[2]);
      e.expected = std::stod(cols[3]);
      e.score = std::stod(cols[4]);
      e.direction = cols[5] == "higher" ? Direction::kHigher : Direction::kLower;
      out.push_back(std::move(e));
    } catch (const std::logic_error&) {
      throw ShmError(ShmError::Kind::kBadRecord, fmt::format("line {}: malformed number", lineno));
    }
  }
  return out;
}

json to_json(const RmsReport& report) {
  json points = json::array();
  for (const auto& p : report.points) {
    points.push_back({{"channel_id", p.channel_id},
                      {"window_start", format_iso8601(p.window_start)},
                      {"window_len", p.window_len},
                      {"rms", p.rms}});
  }
  json events = json::array();
  for (const auto& e : report.events) {
    events.push_back({{"channel_id", e.channel_id},
                      {"at", format_iso8601(e.at)},
                      {"observed", e.observed},
                      {"expected", e.expected},
                      {"score", e.score},
                      {"direction", to_string(e.direction)}});
  }
  return {{"source", report.source}, {"checksum", report.checksum}, {"points", points}, {"events", events}};
}

}  // namespace edgebench::shm
