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

#include "edgebench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "edgebench/csv.hpp"

namespace edgebench::report {

using metrics::MetricsSummary;
using metrics::Stats;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError(ReportError::Kind::kParse, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, const Stats*>> metric_rows(const MetricsSummary& s) {
  std::vector<std::pair<std::string, const Stats*>> rows;
  for (const char* name : {metrics::kCpuDeltaPct, metrics::kLatencySeconds, metrics::kMemPeakBytes,
                           "per_item_latency_seconds"}) {
    const auto* stats = s.find(name);
    if (stats && *stats) rows.emplace_back(name, &**stats);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return rows;
}

std::vector<const MetricsSummary*> sorted(std::span<const MetricsSummary> summaries) {
  std::vector<const MetricsSummary*> out;
  for (const auto& s : summaries) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [](const auto* a, const auto* b) { return a->device_label < b->device_label; });
  return out;
}

std::optional<Stats>* slot(MetricsSummary& s, std::string_view metric) {
  if (metric == metrics::kCpuDeltaPct) return &s.cpu_delta_pct;
  if (metric == metrics::kLatencySeconds) return &s.latency_seconds;
  if (metric == metrics::kMemPeakBytes) return &s.mem_peak_bytes;
  if (metric == "per_item_latency_seconds") return &s.per_item_latency_seconds;
  return nullptr;
}

double parse_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw ReportError(ReportError::Kind::kParse, fmt::format("line {}: '{}' is not a number", line, s));
  }
  return v;
}

}  // namespace

void DeviceProfile::validate() const {
  if (label.empty()) throw ReportError(ReportError::Kind::kInvalidProfile, "device label is empty");
  if (cores < 1) throw ReportError(ReportError::Kind::kInvalidProfile, label + ": cores must be >= 1");
  if (!(clock_ghz > 0)) throw ReportError(ReportError::Kind::kInvalidProfile, label + ": clock_ghz must be > 0");
  if (!(memory_gb > 0)) throw ReportError(ReportError::Kind::kInvalidProfile, label + ": memory_gb must be > 0");
}

std::vector<DeviceProfile> builtin_devices() {
  return {
      {"bbai64", "TDA4VM", "ARM Cortex-A72", 2, 2.0, 4.0, "BeagleBone AI-64; PowerVR Rogue 8XE GE8430 GPU"},
      {"rpi4", "BCM2711", "ARM Cortex-A72", 4, 1.5, 4.0, "Raspberry Pi 4; VideoCore VI GPU"},
  };
}

std::vector<DeviceProfile> load_devices(const std::filesystem::path& path) {
  std::vector<DeviceProfile> out;
  try {
    const json doc = json::parse(slurp(path), nullptr, true, true);
    for (const auto& d : doc.at("devices")) {
      DeviceProfile p;
      p.label = d.at("label").get<std::string>();
      p.soc = d.value("soc", "");
      p.processor = d.value("processor", "");
      p.cores = d.at("cores").get<unsigned>();
      p.clock_ghz = d.at("clock_ghz").get<double>();
      p.memory_gb = d.at("memory_gb").get<double>();
      p.notes = d.value("notes", "");
      p.validate();
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ReportError(ReportError::Kind::kInvalidProfile, fmt::format("{}: {}", path.string(), e.what()));
  }
  return out;
}

json devices_to_json(std::span<const DeviceProfile> devices) {
  json arr = json::array();
  for (const auto& d : devices) {
    arr.push_back({{"label", d.label},
                   {"soc", d.soc},
                   {"processor", d.processor},
                   {"cores", d.cores},
                   {"clock_ghz", d.clock_ghz},
                   {"memory_gb", d.memory_gb},
                   {"notes", d.notes}});
  }
  return {{"devices", arr}};
}

std::string render_devices(std::span<const DeviceProfile> devices) {
  std::string out = fmt::format("{:<10} {:<9} {:<16} {:>5} {:>9} {:>8}  {}\n", "label", "soc", "processor", "cores",
                                "clock", "memory", "notes");
  for (const auto& d : devices) {
    out += fmt::format("{:<10} {:<9} {:<16} {:>5} {:>6.1f}GHz {:>6.0f}GB  {}\n", d.label, d.soc, d.processor, d.cores,
                       d.clock_ghz, d.memory_gb, d.notes);
  }
  return out;
}

double radar_area(const std::array<double, 3>& v) {
  return std::sqrt(3.0) / 4.0 * (v[0] * v[1] + v[1] * v[2] + v[2] * v[0]);
}

RadarData normalize_radar(std::span<const MetricsSummary> summaries) {
  if (summaries.empty()) throw ReportError(ReportError::Kind::kEmptyInput, "radar needs at least one device");
  RadarData out;
  std::array<double, 3> max{0.0, 0.0, 0.0};
  for (const auto& s : summaries) {
    RadarDevice d;
    d.label = s.device_label;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto* stats = s.find(kRadarAxes[i]);
      if (!stats || !*stats) {
        throw ReportError(ReportError::Kind::kMissingMetric,
                          fmt::format("device '{}' has no {} summary", s.device_label, kRadarAxes[i]));
      }
      d.raw[i] = (*stats)->mean;
      double plotted = d.raw[i];
      if (plotted < 0) {
        plotted = 0;
        if (i == 0) d.cpu_clamped = true;
      }
      d.v[i] = plotted;
      max[i] = std::max(max[i], plotted);
    }
    out.devices.push_back(std::move(d));
  }
  for (auto& d : out.devices) {
    for (std::size_t i = 0; i < 3; ++i) d.v[i] = max[i] > 0 ? d.v[i] / max[i] : 0.0;
    d.area = radar_area(d.v);
  }
  return out;
}

std::string emit_csv(std::span<const MetricsSummary> summaries) {
  std::string out = "device,metric,mean,std,min,max,n_runs\n";
  for (const auto* s : sorted(summaries)) {
    for (const auto& [name, st] : metric_rows(*s)) {
      out += fmt::format("{},{},{},{},{},{},{}\n", csv::field(s->device_label), name, csv::number(st->mean),
                         csv::number(st->sample_std), csv::number(st->min), csv::number(st->max), st->n);
    }
  }
  return out;
}

std::string emit_json(std::span<const MetricsSummary> summaries) {
  json devices = json::array();
  for (const auto* s : sorted(summaries)) {
    json m = json::object();
    for (const auto& [name, st] : metric_rows(*s)) {
      m[name] = {{"mean", st->mean}, {"std", st->sample_std}, {"min", st->min}, {"max", st->max}, {"n_runs", st->n}};
    }
    json excluded = json::array();
    for (const auto& e : s->excluded_runs) excluded.push_back({{"run_index", e.run_index}, {"reason", e.reason}});
    devices.push_back({{"device", s->device_label}, {"n_runs", s->n_runs}, {"metrics", m}, {"excluded_runs", excluded}});
  }
  json doc = {{"format", "edgebench-summary"}, {"version", 1}, {"devices", devices}};
  return doc.dump(2) + "\n";
}

std::vector<MetricsSummary> parse_json(std::string_view text) {
  std::vector<MetricsSummary> out;
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "edgebench-summary") {
      throw ReportError(ReportError::Kind::kParse, "not an edgebench summary document");
    }
    for (const auto& d : doc.at("devices")) {
      MetricsSummary s;
      s.device_label = d.at("device").get<std::string>();
      s.n_runs = d.at("n_runs").get<std::size_t>();
      for (const auto& [name, m] : d.at("metrics").items()) {
        auto* dst = slot(s, name);
        if (!dst) throw ReportError(ReportError::Kind::kParse, "unknown metric '" + name + "'");
        *dst = Stats{m.at("mean").get<double>(), m.at("std").get<double>(), m.at("min").get<double>(),
                     m.at("max").get<double>(), m.at("n_runs").get<std::size_t>()};
      }
      for (const auto& e : d.value("excluded_runs", json::array())) {
        s.excluded_runs.push_back({e.at("run_index").get<std::size_t>(), e.at("reason").get<std::string>()});
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ReportError(ReportError::Kind::kParse, e.what());
  }
  return out;
}

std::vector<MetricsSummary> parse_csv(std::string_view text) {
  std::vector<MetricsSummary> out;
  std::map<std::string, std::size_t> index;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "device,metric,mean,std,min,max,n_runs") {
        throw ReportError(ReportError::Kind::kParse, "unexpected summary CSV header: " + line);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 7) throw ReportError(ReportError::Kind::kParse, fmt::format("line {}: expected 7 fields", lineno));
    auto [it, fresh] = index.emplace(f[0], out.size());
    if (fresh) {
      out.emplace_back();
      out.back().device_label = f[0];
    }
    MetricsSummary& s = out[it->second];
    auto* dst = slot(s, f[1]);
    if (!dst) throw ReportError(ReportError::Kind::kParse, fmt::format("line {}: unknown metric '{}'", lineno, f[1]));
    const double n = parse_double(f[6], lineno);
    if (n < 0 || n != std::floor(n)) throw ReportError(ReportError::Kind::kParse, fmt::format("line {}: bad n_runs", lineno));
    *dst = Stats{parse_double(f[2], lineno), parse_double(f[3], lineno), parse_double(f[4], lineno),
                 parse_double(f[5], lineno), static_cast<std::size_t>(n)};
    // The per-item row counts items, not runs.
    if (f[1] != "per_item_latency_seconds") s.n_runs = std::max(s.n_runs, dst->value().n);
  }
  return out;
}

std::vector<MetricsSummary> load_summaries(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  if (path.extension() == ".csv") return parse_csv(text);
  return parse_json(text);
}

std::string render_table(std::span<const MetricsSummary> summaries) {
  auto cell = [](const std::optional<Stats>& st, double scale) {
    if (!st) return std::string("n/a");
    return fmt::format("{:.2f} ± {:.2f}", st->mean * scale, st->sample_std * scale);
  };
  std::string out = fmt::format("{:<20} {:>18} {:>18} {:>20} {:>6}\n", "device", "cpu_delta (%)", "latency (s)",
                                "mem_peak (MB)", "runs");
  for (const auto* s : sorted(summaries)) {
    // "±" is two bytes in UTF-8, so widen the padding by one.
    out += fmt::format("{:<20} {:>19} {:>19} {:>21} {:>6}\n", s->device_label, cell(s->cpu_delta_pct, 1.0),
                       cell(s->latency_seconds, 1.0), cell(s->mem_peak_bytes, 1e-6), s->n_runs);
    for (const auto& e : s->excluded_runs) out += fmt::format("  excluded run {}: {}\n", e.run_index, e.reason);
  }
  return out;
}

std::string emit_radar_svg(const RadarData& radar) {
  constexpr double kW = 560, kH = 520, kCx = 230, kCy = 270, kR = 180;
  constexpr double kPi = 3.14159265358979323846;
  auto vertex = [&](std::size_t axis, double r) {
    const double a = -kPi / 2 + static_cast<double>(axis) * 2 * kPi / 3;
    return std::pair{kCx + r * kR * std::cos(a), kCy + r * kR * std::sin(a)};
  };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kW, kH, kW, kH);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g class=\"grid\" fill=\"none\" stroke=\"#cccccc\">\n";
  for (double level : {0.25, 0.5, 0.75, 1.0}) {
    std::string d;
    for (std::size_t i = 0; i < 3; ++i) {
      auto [x, y] = vertex(i, level);
      d += fmt::format("{}{:.2f},{:.2f} ", i == 0 ? "M" : "L", x, y);
    }
    out += fmt::format("<path d=\"{}Z\"/>\n", d);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    auto [x, y] = vertex(i, 1.0);
    out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#888888\"/>\n", kCx, kCy,
                       x, y);
  }
  out += "</g>\n<g class=\"axis-labels\" text-anchor=\"middle\">\n";
  for (std::size_t i = 0; i < 3; ++i) {
    auto [x, y] = vertex(i, 1.12);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", x, y, xml_escape(radar.axes[i]));
  }
  out += "</g>\n<g class=\"devices\">\n";
  for (std::size_t d = 0; d < radar.devices.size(); ++d) {
    const auto& dev = radar.devices[d];
    std::string pts;
    for (std::size_t i = 0; i < 3; ++i) {
      auto [x, y] = vertex(i, dev.v[i]);
      pts += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", x, y);
    }
    const char* color = kPalette[d % kPalette.size()];
    out += fmt::format(
        "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.25\" stroke=\"{}\" stroke-width=\"2\" "
        "data-device=\"{}\" data-area=\"{}\"/>\n",
        pts, color, color, xml_escape(dev.label), csv::number(dev.area));
  }
  out += "</g>\n<g class=\"legend\">\n";
  for (std::size_t d = 0; d < radar.devices.size(); ++d) {
    const auto& dev = radar.devices[d];
    const double y = 24 + 20 * static_cast<double>(d);
    out += fmt::format("<rect x=\"16\" y=\"{:.0f}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n", y - 10,
                       kPalette[d % kPalette.size()]);
    out += fmt::format("<text x=\"34\" y=\"{:.0f}\">{} (area {:.3f}){}</text>\n", y, xml_escape(dev.label), dev.area,
                       dev.cpu_clamped ? " [negative cpu delta drawn at 0]" : "");
  }
  out += "</g>\n</svg>\n";
  return out;
}

namespace {

struct Frame {
  double x0 = 70, y0 = 30, w = 620, h = 240;
  double t_min = 0, t_max = 1, v_min = 0, v_max = 100;

  double x(double t) const { return x0 + (t - t_min) / (t_max - t_min) * w; }
  double y(double v) const { return y0 + h - (v - v_min) / (v_max - v_min) * h; }
};

std::string open_svg(const Frame& f) {
  const double width = f.x0 + f.w + 30, height = f.y0 + f.h + 50;
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height, width, height);
}

std::string axes(const Frame& f, std::string_view x_label, std::string_view y_label) {
  std::string out = "<g class=\"axes\" stroke=\"black\">\n";
  out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\"/>\n", f.x0, f.y0 + f.h,
                     f.x0 + f.w);
  out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\"/>\n", f.x0, f.y0, f.y0 + f.h);
  out += "</g>\n<g class=\"ticks\" font-size=\"10\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = f.v_min + (f.v_max - f.v_min) * i / 4.0;
    const double t = f.t_min + (f.t_max - f.t_min) * i / 4.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n", f.x0 - 4, f.y(v) + 3, v);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{:.4g}</text>\n", f.x(t),
                       f.y0 + f.h + 14, t);
  }
  out += "</g>\n";
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.x0 + f.w / 2,
                     f.y0 + f.h + 34, xml_escape(x_label));
  out += fmt::format("<text x=\"14\" y=\"{:.2f}\" transform=\"rotate(-90 14 {:.2f})\" text-anchor=\"middle\">{}</text>\n",
                     f.y0 + f.h / 2, f.y0 + f.h / 2, xml_escape(y_label));
  return out;
}

std::string no_data(const Frame& f) {
  return fmt::format("<text class=\"no-data\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">no data</text>\n",
                     f.x0 + f.w / 2, f.y0 + f.h / 2);
}

}  // namespace

std::string emit_cpu_timeseries_svg(const sampler::SampleLog& log, std::span<const harness::PhaseWindow> windows) {
  Frame f;
  std::optional<MonoTime> origin, last;
  auto extend = [&](MonoTime t) {
    if (!origin || t < *origin) origin = t;
    if (!last || t > *last) last = t;
  };
  for (const auto& w : windows) {
    extend(w.start);
    extend(w.end);
  }
  for (const auto& r : log.records) extend(r.t);
  if (origin && *last > *origin) f.t_max = seconds_between(*origin, *last);
  auto rel = [&](MonoTime t) { return seconds_between(*origin, t); };

  std::string out = open_svg(f);
  out += "<g class=\"phases\">\n";
  for (const auto& w : windows) {
    const char* fill = w.phase == harness::Phase::kActive ? "#f4a582" : "#92c5de";
    const double x0 = f.x(rel(w.start)), x1 = f.x(rel(w.end));
    out += fmt::format(
        "<rect class=\"phase-{}\" x=\"{:.3f}\" y=\"{:.2f}\" width=\"{:.3f}\" height=\"{:.2f}\" fill=\"{}\" "
        "fill-opacity=\"0.5\" data-start-s=\"{}\" data-end-s=\"{}\"/>\n",
        harness::to_string(w.phase), x0, f.y0, x1 - x0, f.h, fill, csv::number(rel(w.start)), csv::number(rel(w.end)));
  }
  out += "</g>\n";
  out += axes(f, "time (s)", "system CPU (%)");
  std::string pts;
  for (const auto& r : log.records) {
    if (r.flag == sampler::SampleFlag::kReadFailed) continue;
    pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", f.x(rel(r.t)),
                       f.y(std::clamp(r.cpu_pct, 0.0, 100.0)));
  }
  if (pts.empty()) {
    out += no_data(f);
  } else {
    out += fmt::format("<polyline class=\"cpu\" points=\"{}\" fill=\"none\" stroke=\"#b2182b\" stroke-width=\"1.5\"/>\n",
                       pts);
  }
  out += "</svg>\n";
  return out;
}

std::string emit_rms_svg(std::span<const shm::RmsPoint> points, std::span<const shm::AnomalyEvent> events) {
  Frame f;
  std::map<std::string, std::vector<const shm::RmsPoint*>> series;
  std::optional<WallTime> origin, last;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : points) {
    series[p.channel_id].push_back(&p);
    if (!origin || p.window_start < *origin) origin = p.window_start;
    if (!last || p.window_start > *last) last = p.window_start;
    lo = std::min(lo, p.rms);
    hi = std::max(hi, p.rms);
  }
  if (origin) {
    if (*last > *origin) f.t_max = std::chrono::duration<double>(*last - *origin).count();
    f.v_min = lo;
    f.v_max = hi > lo ? hi : lo + 1.0;
    const double pad = (f.v_max - f.v_min) * 0.05;
    f.v_min -= pad;
    f.v_max += pad;
  }
  auto rel = [&](WallTime t) { return std::chrono::duration<double>(t - *origin).count(); };

  std::string out = open_svg(f);
  out += axes(f, origin ? "time since " + shm::format_iso8601(*origin) + " (s)" : "time (s)", "RMS");
  if (series.empty()) {
    out += no_data(f);
    out += "</svg>\n";
    return out;
  }
  std::size_t k = 0;
  for (const auto& [id, pts] : series) {
    const char* color = kPalette[k % kPalette.size()];
    std::string s;
    for (const auto* p : pts) s += fmt::format("{}{:.2f},{:.2f}", s.empty() ? "" : " ", f.x(rel(p->window_start)), f.y(p->rms));
    out += fmt::format("<polyline class=\"rms\" data-channel=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" "
                       "stroke-width=\"1.5\"/>\n",
                       xml_escape(id), s, color);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"{}\">{}</text>\n", f.x0 + 8, f.y0 + 14 + 14.0 * k, color,
                       xml_escape(id));
    ++k;
  }
  for (const auto& e : events) {
    if (!series.contains(e.channel_id)) continue;
    out += fmt::format(
        "<circle class=\"anomaly\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\">"
        "<title>{} {} than expected {:.2f} (observed {:.2f})</title></circle>\n",
        f.x(rel(e.at)), f.y(e.observed), xml_escape(e.channel_id), shm::to_string(e.direction), e.expected, e.observed);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace edgebench::report
