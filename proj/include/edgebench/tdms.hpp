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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Reader and writer for the little-endian, non-interleaved subset of NI TDMS:
// file -> groups -> channels, properties at every level, scalar raw data.
namespace edgebench::tdms {

class TdmsError : public std::runtime_error {
 public:
  enum class Kind {
    kBadLeadIn,
    kUnsupportedLayout,
    kTruncated,
    kMalformedPath,
    kMalformedIndex,
    kDimensionNotOne,
    kUnsupportedDtype,
    kInvalidString,
    kInvalidModel,
    kNotFound,
    kNonNumericChannel,
    kLossyWidening,
  };

  TdmsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(TdmsError::Kind kind);

// Lead-in table-of-contents bits.
inline constexpr std::uint32_t kTocMetaData = 1u << 1;
inline constexpr std::uint32_t kTocNewObjList = 1u << 2;
inline constexpr std::uint32_t kTocRawData = 1u << 3;
inline constexpr std::uint32_t kTocInterleavedData = 1u << 5;
inline constexpr std::uint32_t kTocBigEndian = 1u << 6;
inline constexpr std::uint32_t kTocDAQmxRawData = 1u << 7;

inline constexpr std::uint32_t kVersion = 4713;
inline constexpr std::uint32_t kNoRawData = 0xFFFFFFFFu;
inline constexpr std::uint32_t kSameRawIndex = 0x00000000u;
inline constexpr std::size_t kLeadInSize = 28;

enum class DataType : std::uint32_t {
  kVoid = 0x00,
  kI8 = 0x01,
  kI16 = 0x02,
  kI32 = 0x03,
  kI64 = 0x04,
  kU8 = 0x05,
  kU16 = 0x06,
  kU32 = 0x07,
  kU64 = 0x08,
  kF32 = 0x09,
  kF64 = 0x0A,
  kString = 0x20,
  kBool = 0x21,
  kTimestamp = 0x44,
};

const char* to_string(DataType t);

// Seconds since 1904-01-01 UTC plus 2^-64 fractions of a second.
struct Timestamp {
  std::int64_t seconds = 0;
  std::uint64_t fractions = 0;

  auto operator<=>(const Timestamp&) const = default;
};

// Variant order matches the Samples alternatives below (shifted by the
// monostate there).
using Value = std::variant<std::int8_t, std::int16_t, std::int32_t, std::int64_t, std::uint8_t,
                           std::uint16_t, std::uint32_t, std::uint64_t, float, double,
                           std::string, bool, Timestamp>;

DataType dtype_of(const Value& v);

using Samples = std::variant<std::monostate, std::vector<std::int8_t>, std::vector<std::int16_t>,
                             std::vector<std::int32_t>, std::vector<std::int64_t>,
                             std::vector<std::uint8_t>, std::vector<std::uint16_t>,
                             std::vector<std::uint32_t>, std::vector<std::uint64_t>,
                             std::vector<float>, std::vector<double>,
                             std::vector<std::string>, std::vector<bool>,
                             std::vector<Timestamp>>;

DataType dtype_of(const Samples& s);
std::size_t sample_count(const Samples& s);

// Float values compare by bit pattern so NaN payloads round-trip as equal.
bool same_value(const Value& a, const Value& b);
bool same_samples(const Samples& a, const Samples& b);

struct Property {
  std::string name;
  Value value;

  bool operator==(const Property& o) const { return name == o.name && same_value(value, o.value); }
};

struct Channel {
  std::string name;
  Samples samples;
  std::vector<Property> properties;

  DataType dtype() const { return dtype_of(samples); }
  std::size_t size() const { return sample_count(samples); }
  bool operator==(const Channel& o) const {
    return name == o.name && properties == o.properties && same_samples(samples, o.samples);
  }
};

struct Group {
  std::string name;
  std::vector<Channel> channels;
  std::vector<Property> properties;

  bool operator==(const Group&) const = default;
};

struct File {
  std::vector<Property> properties;
  std::vector<Group> groups;

  bool operator==(const File&) const = default;

  const Group* find_group(std::string_view name) const;
  const Channel* find_channel(std::string_view group, std::string_view channel) const;
};

// Checks name uniqueness rules; throws kInvalidModel.
void validate(const File& file);

File parse(std::span<const std::uint8_t> bytes);
File read_file(const std::filesystem::path& path);

std::vector<std::uint8_t> write(const File& file);
void write_file(const File& file, const std::filesystem::path& path);

// Object path helpers: "/", "/'group'", "/'group'/'channel'" with '' escapes.
std::string object_path(std::string_view group);
std::string object_path(std::string_view group, std::string_view channel);

// Widens a numeric channel to double. Throws kNotFound, kNonNumericChannel or
// kLossyWidening (64-bit integers beyond 2^53).
std::vector<double> channel_data(const File& file, std::string_view group, std::string_view channel);
std::vector<double> to_f64(const Samples& samples);
bool is_numeric(DataType t);

struct ChannelListing {
  std::string name;
  DataType dtype = DataType::kVoid;
  std::size_t samples = 0;
  std::vector<std::string> property_names;
};

struct GroupListing {
  std::string name;
  std::vector<std::string> property_names;
  std::vector<ChannelListing> channels;
};

struct Hierarchy {
  std::vector<std::string> file_property_names;
  std::vector<GroupListing> groups;
};

Hierarchy hierarchy(const File& file);

// One header line, then one line per group and one per channel, in file order.
std::string render(const Hierarchy& h);

}  // namespace edgebench::tdms
