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

#include "gshap/date.hpp"

#include <charconv>
#include <cstdio>

#include "gshap/errors.hpp"

namespace gshap {

namespace {

bool ParseDigits(std::string_view text, int* out) {
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year(year),
                                        std::chrono::month(month),
                                        std::chrono::day(day)};
  if (!ymd.ok()) {
    Fail(ErrorKind::kParse, "invalid calendar day " + std::to_string(year) +
                                "-" + std::to_string(month) + "-" +
                                std::to_string(day));
  }
  days_ = std::chrono::sys_days(ymd);
}

Date Date::Parse(std::string_view text) {
  int y = 0, m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
      !ParseDigits(text.substr(0, 4), &y) ||
      !ParseDigits(text.substr(5, 2), &m) ||
      !ParseDigits(text.substr(8, 2), &d)) {
    Fail(ErrorKind::kParse, "malformed date '" + std::string(text) + "'");
  }
  return Date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::string Date::ToString() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

int Date::year() const {
  return static_cast<int>(std::chrono::year_month_day(days_).year());
}

unsigned Date::month() const {
  return static_cast<unsigned>(std::chrono::year_month_day(days_).month());
}

unsigned Date::day() const {
  return static_cast<unsigned>(std::chrono::year_month_day(days_).day());
}

unsigned Date::weekday() const {
  return std::chrono::weekday(days_).c_encoding();
}

}  // namespace gshap
