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

#ifndef GSHAP_DATE_HPP_
#define GSHAP_DATE_HPP_

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace gshap {

// A calendar day. Ordering and arithmetic follow std::chrono::sys_days.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  // Parses strict ISO-8601 "YYYY-MM-DD". Throws Error(kParse) otherwise.
  static Date Parse(std::string_view text);

  std::string ToString() const;
  int year() const;
  unsigned month() const;
  unsigned day() const;
  // 0 = Sunday ... 6 = Saturday.
  unsigned weekday() const;
  std::chrono::sys_days days() const { return days_; }
  Date AddDays(int n) const { return Date(days_ + std::chrono::days(n)); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace gshap

#endif  // GSHAP_DATE_HPP_
