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

// Writes random TDMS files plus a JSON description of each model, for an
// independent reader to compare against.
//
//   write_random_tdms <out-dir> <count> <seed>

#include <bit>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "../common/support.hpp"

using namespace edgebench;
using nlohmann::json;

namespace {

template <typename T>
json scalar(const T& v) {
  if constexpr (std::is_same_v<T, float>) {
    return std::bit_cast<std::uint32_t>(v);
  } else if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<std::uint64_t>(v);
  } else if constexpr (std::is_same_v<T, tdms::Timestamp>) {
    return json::array({v.seconds, v.fractions});
  } else {
    return v;
  }
}

json encode(const tdms::Value& v) {
  return {{"dtype", static_cast<std::uint32_t>(tdms::dtype_of(v))}, {"value", std::visit([](const auto& x) { return scalar(x); }, v)}};
}

json encode(const std::vector<tdms::Property>& props) {
  json out = json::array();
  for (const auto& p : props) out.push_back({{"name", p.name}, {"value", encode(p.value)}});
  return out;
}

json encode(const tdms::Samples& s) {
  json data = json::array();
  std::visit(
      [&](const auto& v) {
        if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
          for (const auto& x : v) data.push_back(scalar(static_cast<typename std::decay_t<decltype(v)>::value_type>(x)));
        }
      },
      s);
  return data;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: write_random_tdms <out-dir> <count> <seed>\n";
    return 2;
  }
  const std::filesystem::path out = argv[1];
  const int count = std::atoi(argv[2]);
  std::mt19937_64 rng(std::strtoull(argv[3], nullptr, 10));
  std::filesystem::create_directories(out);
  for (int i = 0; i < count; ++i) {
    const auto model = testing::random_model(rng);
    const auto stem = out / ("model_" + std::to_string(i));
    tdms::write_file(model, stem.string() + ".tdms");
    json groups = json::array();
    for (const auto& g : model.groups) {
      json channels = json::array();
      for (const auto& c : g.channels) {
        channels.push_back({{"name", c.name},
                            {"dtype", static_cast<std::uint32_t>(c.dtype())},
                            {"properties", encode(c.properties)},
                            {"data", encode(c.samples)}});
      }
      groups.push_back({{"name", g.name}, {"properties", encode(g.properties)}, {"channels", channels}});
    }
    std::ofstream(stem.string() + ".json") << json{{"properties", encode(model.properties)}, {"groups", groups}}.dump();
  }
  return 0;
}
