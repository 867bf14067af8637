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

#include "edgebench/markers.hpp"

#include <charconv>

#include <fmt/format.h>

namespace edgebench::harness {

std::optional<MarkerLine> match_marker(std::string_view line) {
  constexpr std::string_view kPrefix = "EDGEOPS:ITEM:";
  if (!line.starts_with(kPrefix)) return std::nullopt;
  line.remove_prefix(kPrefix.size());
  MarkerKind kind;
  if (line.ends_with(":START")) {
    kind = MarkerKind::kStart;
    line.remove_suffix(6);
  } else if (line.ends_with(":END")) {
    kind = MarkerKind::kEnd;
    line.remove_suffix(4);
  } else {
    return std::nullopt;
  }
  if (line.empty()) return std::nullopt;
  for (char c : line) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  std::size_t j = 0;
  auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), j);
  if (ec != std::errc() || p != line.data() + line.size()) return std::nullopt;
  return MarkerLine{j, kind};
}

void MarkerParser::feed(std::string_view line, MonoTime received_at) {
  auto m = match_marker(line);
  if (!m) return;
  const std::size_t j = m->item_index;
  if (batch_size_ && j >= *batch_size_) {
    result_.warnings.push_back(fmt::format("item {} is outside the batch of {}", j, *batch_size_));
    return;
  }
  if (m->kind == MarkerKind::kStart) {
    if (open_) {
      result_.warnings.push_back(
          fmt::format("item {} started before item {} ended; item {} dropped", j, open_->first,
                      open_->first));
    }
    if (j < seen_.size() && seen_[j]) {
      result_.warnings.push_back(fmt::format("item {} started twice; repeat dropped", j));
      open_.reset();
      return;
    }
    open_.emplace(j, received_at);
    return;
  }
  if (!open_ || open_->first != j) {
    result_.warnings.push_back(fmt::format("END for item {} without a matching START", j));
    return;
  }
  if (seen_.size() <= j) seen_.resize(j + 1, false);
  seen_[j] = true;
  result_.marks.push_back(ItemMark{j, open_->second, received_at, std::nullopt});
  open_.reset();
}

MarkerResult MarkerParser::finish() {
  if (open_) {
    result_.warnings.push_back(fmt::format("item {} never ended", open_->first));
    open_.reset();
  }
  MarkerResult out = std::move(result_);
  result_ = {};
  seen_.clear();
  return out;
}

MarkerResult parse_markers(std::istream& stream, const std::function<MonoTime()>& clock,
                           std::optional<std::size_t> batch_size) {
  MarkerParser parser(batch_size);
  std::string line;
  while (std::getline(stream, line)) parser.feed(line, clock());
  return parser.finish();
}

}  // namespace edgebench::harness
