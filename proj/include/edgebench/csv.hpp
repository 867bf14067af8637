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

#include <string>
#include <string_view>
#include <vector>

namespace edgebench::csv {

// Quotes a field only when it contains a comma, quote or line break.
std::string field(std::string_view s);

// Splits one RFC 4180 line. Embedded line breaks are not supported.
std::vector<std::string> split(std::string_view line);

// Shortest decimal form that round-trips to the same double.
std::string number(double v);

}  // namespace edgebench::csv
