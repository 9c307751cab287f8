// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Locale-independent CSV helpers. Reals are printed with 17 significant
// digits so every double survives a write/read round trip bit-exactly.

#ifndef SUBZERO_CSV_HPP_
#define SUBZERO_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace subzero::csv {

std::string real(double v);

// Joins fields with commas. Fields are written verbatim (no quoting); the
// harness never emits commas inside a field.
std::string row(const std::vector<std::string>& fields);

std::vector<std::string> split(std::string_view line);

double parse_real(std::string_view field);

}  // namespace subzero::csv

#endif  // SUBZERO_CSV_HPP_
