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

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "edgebench/tdms.hpp"

namespace edgebench::testing {

// Little-endian byte assembly for hand-built TDMS segments.
class Bytes {
 public:
  template <typename T>
  Bytes& put(T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    data_.insert(data_.end(), buf, buf + sizeof(T));
    return *this;
  }
  Bytes& str(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    data_.insert(data_.end(), s.begin(), s.end());
    return *this;
  }
  Bytes& raw(std::string_view s) {
    data_.insert(data_.end(), s.begin(), s.end());
    return *this;
  }
  Bytes& append(const Bytes& o) {
    data_.insert(data_.end(), o.data_.begin(), o.data_.end());
    return *this;
  }
  // Raw index for a scalar channel.
  Bytes& index(tdms::DataType t, std::uint64_t count, std::uint32_t dimension = 1) {
    put<std::uint32_t>(20).put<std::uint32_t>(static_cast<std::uint32_t>(t)).put<std::uint32_t>(dimension);
    return put<std::uint64_t>(count);
  }
  std::size_t size() const { return data_.size(); }
  const std::vector<std::uint8_t>& data() const { return data_; }

 private:
  std::vector<std::uint8_t> data_;
};

// Lead-in + metadata + raw data as one segment.
inline Bytes segment(std::uint32_t toc, const Bytes& meta, const Bytes& raw, std::string_view tag = "TDSm") {
  Bytes b;
  b.raw(tag).put<std::uint32_t>(toc).put<std::uint32_t>(tdms::kVersion);
  b.put<std::uint64_t>(meta.size() + raw.size()).put<std::uint64_t>(meta.size());
  return b.append(meta).append(raw);
}

}  // namespace edgebench::testing
