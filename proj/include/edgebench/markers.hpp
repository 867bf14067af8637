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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgebench/clock.hpp"

namespace edgebench::harness {

// Per-item timing reported by the workload over stdout:
//
//   EDGEOPS:ITEM:<j>:START
//   EDGEOPS:ITEM:<j>:END
//
// Timestamps are assigned by the harness when each line is received.
struct ItemMark {
  std::size_t item_index = 0;
  MonoTime start{};
  MonoTime end{};
  std::optional<std::uint64_t> peak_rss_bytes;
};

struct MarkerResult {
  std::vector<ItemMark> marks;
  std::vector<std::string> warnings;
};

enum class MarkerKind { kStart, kEnd };

struct MarkerLine {
  std::size_t item_index;
  MarkerKind kind;
};

// Recognizes a whole line (without its newline) as a marker. Anything else,
// including markers with surrounding text, is ordinary workload output.
std::optional<MarkerLine> match_marker(std::string_view line);

// Incremental pairing of START/END lines. Only one item may be open at a time;
// anything that breaks that rule is warned about and left unpaired.
class MarkerParser {
 public:
  explicit MarkerParser(std::optional<std::size_t> batch_size = std::nullopt)
      : batch_size_(batch_size) {}

  void feed(std::string_view line, MonoTime received_at);
  MarkerResult finish();

 private:
  std::optional<std::size_t> batch_size_;
  std::optional<std::pair<std::size_t, MonoTime>> open_;
  std::vector<bool> seen_;
  MarkerResult result_;
};

MarkerResult parse_markers(std::istream& stream, const std::function<MonoTime()>& clock,
                           std::optional<std::size_t> batch_size = std::nullopt);

}  // namespace edgebench::harness
