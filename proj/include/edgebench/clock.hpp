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

namespace edgebench {

// All measurement timestamps come from one monotonic clock. Wall-clock time is
// only ever used as a label anchor.
using MonoClock = std::chrono::steady_clock;
using MonoTime = MonoClock::time_point;
using WallClock = std::chrono::system_clock;
using WallTime = std::chrono::sys_time<std::chrono::nanoseconds>;

inline std::int64_t to_ns(MonoTime t) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

inline MonoTime mono_from_ns(std::int64_t ns) {
  return MonoTime(std::chrono::duration_cast<MonoClock::duration>(std::chrono::nanoseconds(ns)));
}

inline double seconds_between(MonoTime a, MonoTime b) {
  return std::chrono::duration<double>(b - a).count();
}

inline WallTime wall_now() {
  return std::chrono::time_point_cast<std::chrono::nanoseconds>(WallClock::now());
}

// A wall-clock reading paired with the monotonic reading taken next to it.
struct ClockAnchor {
  WallTime wall{};
  MonoTime mono{};

  static ClockAnchor now() { return {wall_now(), MonoClock::now()}; }

  WallTime to_wall(MonoTime t) const {
    return wall + std::chrono::duration_cast<std::chrono::nanoseconds>(t - mono);
  }
};

}  // namespace edgebench
