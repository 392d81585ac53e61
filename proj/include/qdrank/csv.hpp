// Copyright 2026 The QDRank Authors.
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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qdrank::csv {

// RFC 4180 quoting, only when the field needs it.
std::string escape(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// Splits one physical line; quoted fields may contain commas and doubled
// quotes but not newlines.
std::vector<std::string> split_row(std::string_view line);

// Shortest representation that round-trips through strtod.
std::string format_double(double v);

double parse_double(std::string_view text);

}  // namespace qdrank::csv
