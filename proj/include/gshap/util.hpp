/*
 * Copyright 2026 The GroupShap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GSHAP_UTIL_HPP_
#define GSHAP_UTIL_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gshap {

// Shortest decimal text that parses back to the same double.
std::string FormatDouble(double value);

// Parses a decimal number; throws Error(kParse) with `context` on failure.
double ParseDouble(std::string_view text, std::string_view context);

// Splits one CSV record on commas. Quoting is not supported; the input
// formats are plain numeric tables. A trailing '\r' is dropped.
std::vector<std::string> SplitCsvLine(std::string_view line);

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);

// Deterministic child seed for a named pipeline stage.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view stage,
                         std::uint64_t index = 0);

// FNV-1a over the raw bytes of the values. Bit-level, so -0.0 != 0.0.
std::uint64_t Checksum(std::span<const double> values);

}  // namespace gshap

#endif  // GSHAP_UTIL_HPP_
