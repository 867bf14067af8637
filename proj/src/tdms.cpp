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

#include "edgebench/tdms.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <type_traits>
#include <unordered_map>

#include <fmt/format.h>

static_assert(std::endian::native == std::endian::little, "TDMS codec assumes a little-endian host");

namespace edgebench::tdms {

namespace {

using Kind = TdmsError::Kind;

[[noreturn]] void fail(Kind kind, const std::string& msg) { throw TdmsError(kind, msg); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

template <class T>
constexpr DataType dtype_for() {
  if constexpr (std::is_same_v<T, std::int8_t>) return DataType::kI8;
  else if constexpr (std::is_same_v<T, std::int16_t>) return DataType::kI16;
  else if constexpr (std::is_same_v<T, std::int32_t>) return DataType::kI32;
  else if constexpr (std::is_same_v<T, std::int64_t>) return DataType::kI64;
  else if constexpr (std::is_same_v<T, std::uint8_t>) return DataType::kU8;
  else if constexpr (std::is_same_v<T, std::uint16_t>) return DataType::kU16;
  else if constexpr (std::is_same_v<T, std::uint32_t>) return DataType::kU32;
  else if constexpr (std::is_same_v<T, std::uint64_t>) return DataType::kU64;
  else if constexpr (std::is_same_v<T, float>) return DataType::kF32;
  else if constexpr (std::is_same_v<T, double>) return DataType::kF64;
  else if constexpr (std::is_same_v<T, std::string>) return DataType::kString;
  else if constexpr (std::is_same_v<T, bool>) return DataType::kBool;
  else if constexpr (std::is_same_v<T, Timestamp>) return DataType::kTimestamp;
  else static_assert(sizeof(T) == 0, "unsupported element type");
}

// Fixed element width in raw data; 0 for strings.
std::size_t element_size(DataType t) {
  switch (t) {
    case DataType::kI8:
    case DataType::kU8:
    case DataType::kBool: return 1;
    case DataType::kI16:
    case DataType::kU16: return 2;
    case DataType::kI32:
    case DataType::kU32:
    case DataType::kF32: return 4;
    case DataType::kI64:
    case DataType::kU64:
    case DataType::kF64: return 8;
    case DataType::kTimestamp: return 16;
    case DataType::kString:
    case DataType::kVoid: return 0;
  }
  return 0;
}

std::optional<DataType> dtype_from_id(std::uint32_t id) {
  switch (id) {
    case 0x01: return DataType::kI8;
    case 0x02: return DataType::kI16;
    case 0x03: return DataType::kI32;
    case 0x04: return DataType::kI64;
    case 0x05: return DataType::kU8;
    case 0x06: return DataType::kU16;
    case 0x07: return DataType::kU32;
    case 0x08: return DataType::kU64;
    case 0x09:
    case 0x19: return DataType::kF32;  // 0x19: single with unit
    case 0x0A:
    case 0x1A: return DataType::kF64;  // 0x1A: double with unit
    case 0x20: return DataType::kString;
    case 0x21: return DataType::kBool;
    case 0x44: return DataType::kTimestamp;
    default: return std::nullopt;
  }
}

Samples empty_samples(DataType t) {
  switch (t) {
    case DataType::kI8: return std::vector<std::int8_t>{};
    case DataType::kI16: return std::vector<std::int16_t>{};
    case DataType::kI32: return std::vector<std::int32_t>{};
    case DataType::kI64: return std::vector<std::int64_t>{};
    case DataType::kU8: return std::vector<std::uint8_t>{};
    case DataType::kU16: return std::vector<std::uint16_t>{};
    case DataType::kU32: return std::vector<std::uint32_t>{};
    case DataType::kU64: return std::vector<std::uint64_t>{};
    case DataType::kF32: return std::vector<float>{};
    case DataType::kF64: return std::vector<double>{};
    case DataType::kString: return std::vector<std::string>{};
    case DataType::kBool: return std::vector<bool>{};
    case DataType::kTimestamp: return std::vector<Timestamp>{};
    case DataType::kVoid: return std::monostate{};
  }
  return std::monostate{};
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) return false;
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

// Bounds-checked little-endian cursor over [pos, limit).
class Cursor {
 public:
  Cursor(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t limit)
      : bytes_(bytes), pos_(pos), limit_(limit) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return limit_ - pos_; }

  void need(std::size_t n, const char* what) const {
    if (n > remaining()) {
      fail(Kind::kTruncated, fmt::format("{} needs {} bytes at offset {}, {} left", what, n, pos_,
                                         remaining()));
    }
  }

  template <class T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data()) + pos_, n);
    pos_ += n;
    return s;
  }

  std::string string(const char* what) {
    auto len = read<std::uint32_t>(what);
    std::string s(bytes(len, what));
    if (!valid_utf8(s)) fail(Kind::kInvalidString, fmt::format("{} is not valid UTF-8", what));
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t limit_;
};

Value read_value(Cursor& c, std::uint32_t type_id) {
  auto t = dtype_from_id(type_id);
  if (!t) fail(Kind::kUnsupportedDtype, fmt::format("property type 0x{:x} is not supported", type_id));
  switch (*t) {
    case DataType::kI8: return c.read<std::int8_t>("property value");
    case DataType::kI16: return c.read<std::int16_t>("property value");
    case DataType::kI32: return c.read<std::int32_t>("property value");
    case DataType::kI64: return c.read<std::int64_t>("property value");
    case DataType::kU8: return c.read<std::uint8_t>("property value");
    case DataType::kU16: return c.read<std::uint16_t>("property value");
    case DataType::kU32: return c.read<std::uint32_t>("property value");
    case DataType::kU64: return c.read<std::uint64_t>("property value");
    case DataType::kF32: return c.read<float>("property value");
    case DataType::kF64: return c.read<double>("property value");
    case DataType::kString: return c.string("property value");
    case DataType::kBool: return c.read<std::uint8_t>("property value") != 0;
    case DataType::kTimestamp: {
      Timestamp ts;
      ts.fractions = c.read<std::uint64_t>("timestamp fractions");
      ts.seconds = c.read<std::int64_t>("timestamp seconds");
      return ts;
    }
    case DataType::kVoid: break;
  }
  fail(Kind::kUnsupportedDtype, "void property");
}

struct ParsedPath {
  std::optional<std::string> group;
  std::optional<std::string> channel;
};

ParsedPath parse_path(std::string_view path) {
  if (path.empty() || path[0] != '/') fail(Kind::kMalformedPath, fmt::format("bad object path '{}'", path));
  std::vector<std::string> parts;
  std::size_t i = 1;
  while (i < path.size()) {
    if (path[i] != '\'') fail(Kind::kMalformedPath, fmt::format("bad object path '{}'", path));
    ++i;
    std::string name;
    bool closed = false;
    while (i < path.size()) {
      if (path[i] == '\'') {
        if (i + 1 < path.size() && path[i + 1] == '\'') {
          name.push_back('\'');
          i += 2;
          continue;
        }
        ++i;
        closed = true;
        break;
      }
      name.push_back(path[i++]);
    }
    if (!closed) fail(Kind::kMalformedPath, fmt::format("unterminated name in '{}'", path));
    parts.push_back(std::move(name));
    if (i < path.size()) {
      if (path[i] != '/') fail(Kind::kMalformedPath, fmt::format("bad object path '{}'", path));
      ++i;
      if (i == path.size()) fail(Kind::kMalformedPath, fmt::format("trailing '/' in '{}'", path));
    }
  }
  if (parts.size() > 2) fail(Kind::kMalformedPath, fmt::format("path '{}' is deeper than channel level", path));
  ParsedPath out;
  if (!parts.empty()) out.group = parts[0];
  if (parts.size() == 2) out.channel = parts[1];
  return out;
}

void set_property(std::vector<Property>& props, std::string name, Value value) {
  for (auto& p : props) {
    if (p.name == name) {
      p.value = std::move(value);
      return;
    }
  }
  props.push_back({std::move(name), std::move(value)});
}

struct RawIndex {
  DataType dtype = DataType::kVoid;
  std::uint64_t count = 0;
  std::uint64_t string_bytes = 0;  // offsets + character data, strings only
};

struct ActiveObject {
  std::string path;
  bool has_data = false;
  RawIndex index;
};

class Parser {
 public:
  explicit Parser(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  File run() {
    std::size_t pos = 0;
    while (pos < bytes_.size()) pos = segment(pos);
    return std::move(file_);
  }

 private:
  Group& group(const std::string& name) {
    if (auto it = group_index_.find(name); it != group_index_.end()) return file_.groups[it->second];
    group_index_.emplace(name, file_.groups.size());
    file_.groups.push_back(Group{name, {}, {}});
    return file_.groups.back();
  }

  Channel& channel(const std::string& g, const std::string& c) {
    Group& grp = group(g);
    auto key = object_path(g, c);
    if (auto it = channel_index_.find(key); it != channel_index_.end()) return grp.channels[it->second];
    channel_index_.emplace(key, grp.channels.size());
    grp.channels.push_back(Channel{c, std::monostate{}, {}});
    return grp.channels.back();
  }

  std::vector<Property>& properties_of(const ParsedPath& p) {
    if (!p.group) return file_.properties;
    if (!p.channel) return group(*p.group).properties;
    return channel(*p.group, *p.channel).properties;
  }

  std::size_t segment(std::size_t pos) {
    if (bytes_.size() - pos < kLeadInSize) {
      fail(Kind::kTruncated, fmt::format("lead-in at offset {} is cut short", pos));
    }
    Cursor lead(bytes_, pos, bytes_.size());
    auto tag = lead.bytes(4, "tag");
    if (tag != "TDSm") fail(Kind::kBadLeadIn, fmt::format("segment at offset {} does not start with TDSm", pos));
    const auto toc = lead.read<std::uint32_t>("toc");
    const auto version = lead.read<std::uint32_t>("version");
    const auto next_offset = lead.read<std::uint64_t>("next segment offset");
    const auto raw_offset = lead.read<std::uint64_t>("raw data offset");

    if (toc & kTocBigEndian) fail(Kind::kUnsupportedLayout, "big-endian segments are not supported");
    if (toc & kTocInterleavedData) fail(Kind::kUnsupportedLayout, "interleaved raw data is not supported");
    if (toc & kTocDAQmxRawData) fail(Kind::kUnsupportedLayout, "DAQmx raw data is not supported");
    if (version != 4712 && version != 4713) {
      fail(Kind::kUnsupportedLayout, fmt::format("unknown TDMS version {}", version));
    }

    const std::size_t body = pos + kLeadInSize;
    const std::size_t avail = bytes_.size() - body;
    // All ones marks a segment that was never finalized; it runs to end of file.
    const std::size_t seg_len =
        next_offset == std::numeric_limits<std::uint64_t>::max() ? avail : static_cast<std::size_t>(next_offset);
    if (next_offset != std::numeric_limits<std::uint64_t>::max() && next_offset > avail) {
      fail(Kind::kTruncated, fmt::format("segment at {} declares {} bytes, {} available", pos, next_offset, avail));
    }
    if (raw_offset > seg_len) {
      fail(Kind::kTruncated, fmt::format("raw data offset {} exceeds segment length {}", raw_offset, seg_len));
    }
    const std::size_t meta_end = body + static_cast<std::size_t>(raw_offset);
    const std::size_t seg_end = body + seg_len;

    if (toc & kTocMetaData) {
      Cursor meta(bytes_, body, meta_end);
      metadata(meta, (toc & kTocNewObjList) != 0);
    } else if (!seen_segment_) {
      fail(Kind::kMalformedIndex, "first segment has no metadata");
    }
    seen_segment_ = true;

    if (toc & kTocRawData) raw_data(meta_end, seg_end);
    return seg_end;
  }

  RawIndex read_index(Cursor& c, std::uint32_t header, const std::string& path) {
    if (header == 0x69120000u || header == 0x69130000u) {
      fail(Kind::kUnsupportedLayout, fmt::format("{} uses a DAQmx raw data index", path));
    }
    RawIndex idx;
    const auto type_id = c.read<std::uint32_t>("raw index dtype");
    const auto dim = c.read<std::uint32_t>("raw index dimension");
    idx.count = c.read<std::uint64_t>("raw index count");
    auto t = dtype_from_id(type_id);
    if (!t) fail(Kind::kUnsupportedDtype, fmt::format("{} has unsupported dtype 0x{:x}", path, type_id));
    if (dim != 1) fail(Kind::kDimensionNotOne, fmt::format("{} declares array dimension {}", path, dim));
    idx.dtype = *t;
    if (idx.dtype == DataType::kString) idx.string_bytes = c.read<std::uint64_t>("raw index string size");
    return idx;
  }

  void metadata(Cursor& c, bool new_list) {
    if (new_list) {
      active_.clear();
      active_pos_.clear();
    }
    const auto n = c.read<std::uint32_t>("object count");
    // Each object needs at least a path length, index header and property count.
    if (n > c.remaining() / 12) fail(Kind::kTruncated, fmt::format("object count {} exceeds metadata size", n));
    for (std::uint32_t k = 0; k < n; ++k) {
      std::string path = c.string("object path");
      ParsedPath parsed = parse_path(path);
      const auto header = c.read<std::uint32_t>("raw index header");

      auto [slot, inserted] = active_pos_.try_emplace(path, active_.size());
      if (inserted) active_.push_back(ActiveObject{path, false, {}});
      ActiveObject* obj = &active_[slot->second];
      if (header == kNoRawData) {
        obj->has_data = false;
      } else if (header == kSameRawIndex) {
        auto it = last_index_.find(path);
        if (it == last_index_.end()) {
          fail(Kind::kMalformedIndex, fmt::format("{} reuses a raw index it never declared", path));
        }
        obj->index = it->second;
        obj->has_data = true;
      } else {
        obj->index = read_index(c, header, path);
        obj->has_data = true;
        last_index_[path] = obj->index;
      }
      if (obj->has_data) {
        if (!parsed.channel) fail(Kind::kMalformedIndex, fmt::format("{} is not a channel but has raw data", path));
        Channel& ch = channel(*parsed.group, *parsed.channel);
        if (std::holds_alternative<std::monostate>(ch.samples)) {
          ch.samples = empty_samples(obj->index.dtype);
        } else if (ch.dtype() != obj->index.dtype) {
          fail(Kind::kUnsupportedLayout, fmt::format("{} changes dtype from {} to {}", path,
                                                     to_string(ch.dtype()), to_string(obj->index.dtype)));
        }
      } else {
        // Make sure the object exists in the hierarchy even without data.
        properties_of(parsed);
      }

      const auto nprops = c.read<std::uint32_t>("property count");
      if (nprops > c.remaining() / 8) fail(Kind::kTruncated, fmt::format("property count {} exceeds metadata size", nprops));
      auto& props = properties_of(parsed);
      for (std::uint32_t p = 0; p < nprops; ++p) {
        std::string name = c.string("property name");
        const auto type_id = c.read<std::uint32_t>("property dtype");
        set_property(props, std::move(name), read_value(c, type_id));
      }
    }
  }

  void raw_data(std::size_t begin, std::size_t end) {
    std::vector<std::pair<const ActiveObject*, Channel*>> data;
    std::uint64_t chunk = 0;
    const std::uint64_t region = end - begin;
    for (const auto& a : active_) {
      if (!a.has_data) continue;
      std::uint64_t bytes;
      if (a.index.dtype == DataType::kString) {
        if (a.index.string_bytes > region || a.index.count > a.index.string_bytes / 4) {
          fail(Kind::kTruncated, fmt::format("{} declares more string data than the segment holds", a.path));
        }
        bytes = a.index.string_bytes;
      } else {
        const std::uint64_t size = element_size(a.index.dtype);
        if (a.index.count > region / size) {
          fail(Kind::kTruncated, fmt::format("{} declares {} values, segment holds {} bytes", a.path,
                                             a.index.count, region));
        }
        bytes = a.index.count * size;
      }
      chunk += bytes;
      if (chunk > region) {
        fail(Kind::kTruncated, "raw data chunk is larger than the segment");
      }
      auto parsed = parse_path(a.path);
      data.emplace_back(&a, &channel(*parsed.group, *parsed.channel));
    }
    if (chunk == 0) return;
    if (region % chunk != 0) {
      fail(Kind::kTruncated, fmt::format("raw data of {} bytes is not a whole number of {}-byte chunks", region, chunk));
    }
    Cursor c(bytes_, begin, end);
    for (std::uint64_t n = region / chunk; n > 0; --n) {
      for (auto [a, ch] : data) append(c, *ch, a->index, a->path);
    }
  }

  void append(Cursor& c, Channel& ch, const RawIndex& idx, const std::string& path) {
    const auto count = static_cast<std::size_t>(idx.count);
    std::visit(Overloaded{
                   [](std::monostate&) {},
                   [&](std::vector<std::string>& v) {
                     const std::size_t start = c.pos();
                     std::vector<std::uint32_t> ends(count);
                     for (auto& e : ends) e = c.read<std::uint32_t>("string offset");
                     std::uint32_t prev = 0;
                     for (auto e : ends) {
                       if (e < prev) fail(Kind::kMalformedIndex, fmt::format("{} has decreasing string offsets", path));
                       v.emplace_back(c.bytes(e - prev, "string data"));
                       if (!valid_utf8(v.back())) fail(Kind::kInvalidString, fmt::format("{} holds invalid UTF-8", path));
                       prev = e;
                     }
                     if (c.pos() - start != idx.string_bytes) {
                       fail(Kind::kMalformedIndex, fmt::format("{} string data size disagrees with its index", path));
                     }
                   },
                   [&](std::vector<bool>& v) {
                     for (std::size_t i = 0; i < count; ++i) v.push_back(c.read<std::uint8_t>("bool") != 0);
                   },
                   [&](std::vector<Timestamp>& v) {
                     for (std::size_t i = 0; i < count; ++i) {
                       Timestamp ts;
                       ts.fractions = c.read<std::uint64_t>("timestamp");
                       ts.seconds = c.read<std::int64_t>("timestamp");
                       v.push_back(ts);
                     }
                   },
                   [&](auto& v) {
                     using T = typename std::decay_t<decltype(v)>::value_type;
                     auto raw = c.bytes(count * sizeof(T), "raw values");
                     const std::size_t old = v.size();
                     v.resize(old + count);
                     if (!raw.empty()) std::memcpy(v.data() + old, raw.data(), raw.size());
                   },
               },
               ch.samples);
  }

  std::span<const std::uint8_t> bytes_;
  File file_;
  std::unordered_map<std::string, std::size_t> group_index_;
  std::unordered_map<std::string, std::size_t> channel_index_;
  std::vector<ActiveObject> active_;
  std::unordered_map<std::string, std::size_t> active_pos_;
  std::map<std::string, RawIndex> last_index_;
  bool seen_segment_ = false;
};

class Writer {
 public:
  template <class T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }

  void string(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }

  void value(const Value& v) {
    std::visit(Overloaded{
                   [&](const std::string& s) { string(s); },
                   [&](bool b) { put(static_cast<std::uint8_t>(b ? 1 : 0)); },
                   [&](const Timestamp& ts) {
                     put(ts.fractions);
                     put(ts.seconds);
                   },
                   [&](auto x) { put(x); },
               },
               v);
  }

  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

void write_properties(Writer& w, const std::vector<Property>& props) {
  w.put(static_cast<std::uint32_t>(props.size()));
  for (const auto& p : props) {
    w.string(p.name);
    w.put(static_cast<std::uint32_t>(dtype_of(p.value)));
    w.value(p.value);
  }
}

std::uint64_t string_bytes(const std::vector<std::string>& v) {
  std::uint64_t n = 0;
  for (const auto& s : v) n += 4 + s.size();
  return n;
}

void write_raw(Writer& w, const Samples& s) {
  std::visit(Overloaded{
                 [](const std::monostate&) {},
                 [&](const std::vector<std::string>& v) {
                   std::uint32_t end = 0;
                   for (const auto& x : v) {
                     end += static_cast<std::uint32_t>(x.size());
                     w.put(end);
                   }
                   for (const auto& x : v) w.bytes().insert(w.bytes().end(), x.begin(), x.end());
                 },
                 [&](const std::vector<bool>& v) {
                   for (bool b : v) w.put(static_cast<std::uint8_t>(b ? 1 : 0));
                 },
                 [&](const std::vector<Timestamp>& v) {
                   for (const auto& ts : v) {
                     w.put(ts.fractions);
                     w.put(ts.seconds);
                   }
                 },
                 [&](const auto& v) {
                   const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
                   w.bytes().insert(w.bytes().end(), p, p + v.size() * sizeof(v[0]));
                 },
             },
             s);
}

std::string quote(std::string_view name) {
  std::string out = "'";
  for (char c : name) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

bool float_bits_equal(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }
bool float_bits_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

const char* to_string(TdmsError::Kind kind) {
  switch (kind) {
    case Kind::kBadLeadIn: return "BadLeadIn";
    case Kind::kUnsupportedLayout: return "UnsupportedLayout";
    case Kind::kTruncated: return "Truncated";
    case Kind::kMalformedPath: return "MalformedPath";
    case Kind::kMalformedIndex: return "MalformedIndex";
    case Kind::kDimensionNotOne: return "DimensionNotOne";
    case Kind::kUnsupportedDtype: return "UnsupportedDtype";
    case Kind::kInvalidString: return "InvalidString";
    case Kind::kInvalidModel: return "InvalidModel";
    case Kind::kNotFound: return "NotFound";
    case Kind::kNonNumericChannel: return "NonNumericChannel";
    case Kind::kLossyWidening: return "LossyWidening";
  }
  return "?";
}

const char* to_string(DataType t) {
  switch (t) {
    case DataType::kVoid: return "void";
    case DataType::kI8: return "i8";
    case DataType::kI16: return "i16";
    case DataType::kI32: return "i32";
    case DataType::kI64: return "i64";
    case DataType::kU8: return "u8";
    case DataType::kU16: return "u16";
    case DataType::kU32: return "u32";
    case DataType::kU64: return "u64";
    case DataType::kF32: return "f32";
    case DataType::kF64: return "f64";
    case DataType::kString: return "string";
    case DataType::kBool: return "bool";
    case DataType::kTimestamp: return "timestamp";
  }
  return "?";
}

DataType dtype_of(const Value& v) {
  return std::visit([](const auto& x) { return dtype_for<std::decay_t<decltype(x)>>(); }, v);
}

DataType dtype_of(const Samples& s) {
  return std::visit(Overloaded{
                        [](const std::monostate&) { return DataType::kVoid; },
                        [](const auto& v) { return dtype_for<typename std::decay_t<decltype(v)>::value_type>(); },
                    },
                    s);
}

std::size_t sample_count(const Samples& s) {
  return std::visit(Overloaded{
                        [](const std::monostate&) -> std::size_t { return 0; },
                        [](const auto& v) -> std::size_t { return v.size(); },
                    },
                    s);
}

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (auto* f = std::get_if<float>(&a)) return float_bits_equal(*f, std::get<float>(b));
  if (auto* d = std::get_if<double>(&a)) return float_bits_equal(*d, std::get<double>(b));
  return a == b;
}

bool same_samples(const Samples& a, const Samples& b) {
  if (a.index() != b.index()) return false;
  auto bitwise = [](const auto& x, const auto& y) {
    return x.size() == y.size() &&
           (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(x[0])) == 0);
  };
  if (auto* f = std::get_if<std::vector<float>>(&a)) return bitwise(*f, std::get<std::vector<float>>(b));
  if (auto* d = std::get_if<std::vector<double>>(&a)) return bitwise(*d, std::get<std::vector<double>>(b));
  return a == b;
}

const Group* File::find_group(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

const Channel* File::find_channel(std::string_view group, std::string_view channel) const {
  const Group* g = find_group(group);
  if (!g) return nullptr;
  for (const auto& c : g->channels) {
    if (c.name == channel) return &c;
  }
  return nullptr;
}

std::string object_path(std::string_view group) { return "/" + quote(group); }

std::string object_path(std::string_view group, std::string_view channel) {
  return "/" + quote(group) + "/" + quote(channel);
}

void validate(const File& file) {
  auto unique_props = [](const std::vector<Property>& props, const std::string& where) {
    for (std::size_t i = 0; i < props.size(); ++i) {
      if (props[i].name.empty()) throw TdmsError(Kind::kInvalidModel, "empty property name on " + where);
      if (!valid_utf8(props[i].name)) throw TdmsError(Kind::kInvalidModel, "non-UTF-8 property name on " + where);
      if (auto* s = std::get_if<std::string>(&props[i].value); s && !valid_utf8(*s)) {
        throw TdmsError(Kind::kInvalidModel, "non-UTF-8 property value on " + where);
      }
      for (std::size_t j = i + 1; j < props.size(); ++j) {
        if (props[i].name == props[j].name) {
          throw TdmsError(Kind::kInvalidModel, fmt::format("duplicate property '{}' on {}", props[i].name, where));
        }
      }
    }
  };
  unique_props(file.properties, "/");
  for (std::size_t i = 0; i < file.groups.size(); ++i) {
    const auto& g = file.groups[i];
    for (std::size_t j = i + 1; j < file.groups.size(); ++j) {
      if (g.name == file.groups[j].name) throw TdmsError(Kind::kInvalidModel, "duplicate group '" + g.name + "'");
    }
    unique_props(g.properties, object_path(g.name));
    for (std::size_t a = 0; a < g.channels.size(); ++a) {
      const auto& c = g.channels[a];
      for (std::size_t b = a + 1; b < g.channels.size(); ++b) {
        if (c.name == g.channels[b].name) {
          throw TdmsError(Kind::kInvalidModel, "duplicate channel '" + c.name + "' in group '" + g.name + "'");
        }
      }
      unique_props(c.properties, object_path(g.name, c.name));
      if (auto* v = std::get_if<std::vector<std::string>>(&c.samples)) {
        for (const auto& s : *v) {
          if (!valid_utf8(s)) throw TdmsError(Kind::kInvalidModel, "non-UTF-8 sample in " + object_path(g.name, c.name));
        }
        if (string_bytes(*v) > std::numeric_limits<std::uint32_t>::max()) {
          throw TdmsError(Kind::kInvalidModel, "string channel too large for 32-bit offsets");
        }
      }
    }
    if (!valid_utf8(g.name)) throw TdmsError(Kind::kInvalidModel, "non-UTF-8 group name");
  }
}

File parse(std::span<const std::uint8_t> bytes) { return Parser(bytes).run(); }

File read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TdmsError(Kind::kNotFound, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(bytes);
}

std::vector<std::uint8_t> write(const File& file) {
  validate(file);
  Writer meta;
  std::uint32_t objects = 1;
  for (const auto& g : file.groups) objects += 1 + static_cast<std::uint32_t>(g.channels.size());
  meta.put(objects);
  meta.string("/");
  meta.put(kNoRawData);
  write_properties(meta, file.properties);
  bool any_data = false;
  for (const auto& g : file.groups) {
    meta.string(object_path(g.name));
    meta.put(kNoRawData);
    write_properties(meta, g.properties);
    for (const auto& c : g.channels) {
      meta.string(object_path(g.name, c.name));
      const DataType t = c.dtype();
      if (t == DataType::kVoid) {
        meta.put(kNoRawData);
      } else {
        any_data = true;
        meta.put(static_cast<std::uint32_t>(t == DataType::kString ? 28 : 20));
        meta.put(static_cast<std::uint32_t>(t));
        meta.put(std::uint32_t{1});
        meta.put(static_cast<std::uint64_t>(c.size()));
        if (t == DataType::kString) meta.put(string_bytes(std::get<std::vector<std::string>>(c.samples)));
      }
      write_properties(meta, c.properties);
    }
  }

  Writer raw;
  for (const auto& g : file.groups) {
    for (const auto& c : g.channels) write_raw(raw, c.samples);
  }

  Writer out;
  out.bytes().insert(out.bytes().end(), {'T', 'D', 'S', 'm'});
  std::uint32_t toc = kTocMetaData | kTocNewObjList;
  if (any_data) toc |= kTocRawData;
  out.put(toc);
  out.put(kVersion);
  out.put(static_cast<std::uint64_t>(meta.bytes().size() + raw.bytes().size()));
  out.put(static_cast<std::uint64_t>(meta.bytes().size()));
  auto& bytes = out.bytes();
  bytes.insert(bytes.end(), meta.bytes().begin(), meta.bytes().end());
  bytes.insert(bytes.end(), raw.bytes().begin(), raw.bytes().end());
  return std::move(bytes);
}

void write_file(const File& file, const std::filesystem::path& path) {
  auto bytes = write(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

bool is_numeric(DataType t) {
  switch (t) {
    case DataType::kI8:
    case DataType::kI16:
    case DataType::kI32:
    case DataType::kI64:
    case DataType::kU8:
    case DataType::kU16:
    case DataType::kU32:
    case DataType::kU64:
    case DataType::kF32:
    case DataType::kF64: return true;
    default: return false;
  }
}

std::vector<double> to_f64(const Samples& samples) {
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::vector<double> out;
  std::visit(Overloaded{
                 [&](const std::vector<std::int64_t>& v) {
                   for (auto x : v) {
                     if (x > static_cast<std::int64_t>(kExact) || x < -static_cast<std::int64_t>(kExact)) {
                       throw TdmsError(Kind::kLossyWidening, fmt::format("{} is not exactly representable as f64", x));
                     }
                     out.push_back(static_cast<double>(x));
                   }
                 },
                 [&](const std::vector<std::uint64_t>& v) {
                   for (auto x : v) {
                     if (x > kExact) {
                       throw TdmsError(Kind::kLossyWidening, fmt::format("{} is not exactly representable as f64", x));
                     }
                     out.push_back(static_cast<double>(x));
                   }
                 },
                 [&](const auto& v) {
                   using V = std::decay_t<decltype(v)>;
                   if constexpr (std::is_same_v<V, std::monostate> || std::is_same_v<V, std::vector<std::string>> ||
                                 std::is_same_v<V, std::vector<bool>> || std::is_same_v<V, std::vector<Timestamp>>) {
                     throw TdmsError(Kind::kNonNumericChannel,
                                     fmt::format("{} samples are not numeric", to_string(dtype_of(samples))));
                   } else {
                     out.assign(v.begin(), v.end());
                   }
                 },
             },
             samples);
  return out;
}

std::vector<double> channel_data(const File& file, std::string_view group, std::string_view channel) {
  const Channel* c = file.find_channel(group, channel);
  if (!c) throw TdmsError(Kind::kNotFound, fmt::format("no channel {}", object_path(group, channel)));
  return to_f64(c->samples);
}

Hierarchy hierarchy(const File& file) {
  auto names = [](const std::vector<Property>& props) {
    std::vector<std::string> out;
    for (const auto& p : props) out.push_back(p.name);
    return out;
  };
  Hierarchy h;
  h.file_property_names = names(file.properties);
  for (const auto& g : file.groups) {
    GroupListing gl{g.name, names(g.properties), {}};
    for (const auto& c : g.channels) gl.channels.push_back({c.name, c.dtype(), c.size(), names(c.properties)});
    h.groups.push_back(std::move(gl));
  }
  return h;
}

std::string render(const Hierarchy& h) {
  auto props = [](const std::vector<std::string>& names) {
    return names.empty() ? std::string() : fmt::format(" properties=[{}]", fmt::join(names, ","));
  };
  std::string out = fmt::format("file groups={}{}\n", h.groups.size(), props(h.file_property_names));
  for (const auto& g : h.groups) {
    out += fmt::format("group {} channels={}{}\n", object_path(g.name), g.channels.size(), props(g.property_names));
    for (const auto& c : g.channels) {
      out += fmt::format("channel {} dtype={} samples={}{}\n", object_path(g.name, c.name), to_string(c.dtype),
                         c.samples, props(c.property_names));
    }
  }
  return out;
}

}  // namespace edgebench::tdms
