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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "edgebench/tdms.hpp"

namespace edgebench::testing {

inline constexpr std::int64_t kTdmsEpochOffset = 2'082'844'800;  // 1904-01-01 to 1970-01-01

// One accelerometer file: `samples` points alternating +-amplitude, with the
// waveform start and increment carried as channel properties.
inline tdms::File accel_file(double amplitude, std::size_t samples, std::int64_t unix_start_s, double dt = 0.01) {
  tdms::Channel ch;
  ch.name = "accel_x";
  std::vector<double> v(samples);
  for (std::size_t i = 0; i < samples; ++i) v[i] = (i % 2 == 0) ? amplitude : -amplitude;
  ch.samples = std::move(v);
  ch.properties = {{"wf_start_time", tdms::Timestamp{unix_start_s + kTdmsEpochOffset, 0}},
                   {"wf_increment", dt},
                   {"unit_string", std::string("g")}};
  tdms::Channel temp;
  temp.name = "temperature";
  temp.samples = std::vector<float>(samples, 21.5f);
  temp.properties = {{"wf_start_time", tdms::Timestamp{unix_start_s + kTdmsEpochOffset, 0}}, {"wf_increment", dt}};
  tdms::Group g;
  g.name = "bridge";
  g.channels = {std::move(ch), std::move(temp)};
  tdms::File f;
  f.properties = {{"name", std::string("deck sensor")}};
  f.groups = {std::move(g)};
  return f;
}

// `count` consecutive files; the file at `spike_at` (if any) has ten times
// the amplitude.
inline std::vector<std::filesystem::path> write_accel_series(const std::filesystem::path& dir, std::size_t count,
                                                             std::size_t samples, std::size_t spike_at = SIZE_MAX) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  const std::int64_t t0 = 1'767'225'600;  // 2026-01-01T00:00:00Z
  const double span = 0.01 * static_cast<double>(samples);
  for (std::size_t i = 0; i < count; ++i) {
    const auto path = dir / fmt::format("deck_{:04}.tdms", i);
    const double amp = i == spike_at ? 10.0 : 1.0 + 0.02 * static_cast<double>(i % 3);
    tdms::write_file(accel_file(amp, samples, t0 + static_cast<std::int64_t>(std::llround(span * static_cast<double>(i)))),
                     path);
    out.push_back(path);
  }
  return out;
}

}  // namespace edgebench::testing
