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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "gshap/date.hpp"
#include "gshap/errors.hpp"
#include "gshap/util.hpp"
#include "support.hpp"

namespace gshap {
namespace {

using testing::ExpectError;

TEST(Date, ParsesAndFormatsIso) {
  const Date d = Date::Parse("2024-02-29");
  EXPECT_EQ(d.year(), 2024);
  EXPECT_EQ(d.month(), 2u);
  EXPECT_EQ(d.day(), 29u);
  EXPECT_EQ(d.ToString(), "2024-02-29");
  EXPECT_EQ(d.AddDays(1).ToString(), "2024-03-01");
}

TEST(Date, RejectsMalformedText) {
  for (const char* bad : {"2023-02-29", "2024-1-05", "2024/01/05", "20240105", "", "2024-13-01",
                          "2024-01-05x"}) {
    ExpectError(ErrorKind::kParse, [&] { Date::Parse(bad); });
  }
}

TEST(Date, WeekdayAndOrdering) {
  EXPECT_EQ(Date(2024, 1, 7).weekday(), 0u);  // Sunday
  EXPECT_EQ(Date(2024, 1, 8).weekday(), 1u);
  EXPECT_LT(Date(2023, 12, 31), Date(2024, 1, 1));
}

TEST(Util, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    EXPECT_EQ(ParseDouble(FormatDouble(x), "x"), x);
  }
  EXPECT_EQ(FormatDouble(0.5), "0.5");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Util, ParseDoubleNamesContext) {
  const auto msg = ExpectError(ErrorKind::kParse, [] { ParseDouble("1.5abc", "row 3"); });
  EXPECT_NE(msg.find("row 3"), std::string::npos);
}

TEST(Util, SplitCsvLine) {
  EXPECT_EQ(SplitCsvLine("a,b,,c\r"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(SplitCsvLine("x"), (std::vector<std::string>{"x"}));
}

TEST(Util, AtomicWriteCreatesParentsAndReplaces) {
  testing::TempDir dir;
  const auto path = dir / "nested/file.txt";
  WriteFileAtomic(path, "first");
  WriteFileAtomic(path, "second");
  EXPECT_EQ(ReadFile(path), "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST(Util, DeriveSeedIsStableAndStageSpecific) {
  EXPECT_EQ(DeriveSeed(42, "init"), DeriveSeed(42, "init"));
  EXPECT_NE(DeriveSeed(42, "init"), DeriveSeed(42, "shuffle"));
  EXPECT_NE(DeriveSeed(42, "init", 0), DeriveSeed(42, "init", 1));
  EXPECT_NE(DeriveSeed(42, "init"), DeriveSeed(43, "init"));
}

TEST(Util, ChecksumSeesEveryBit) {
  std::vector<double> a{1.0, 2.0, 3.0};
  auto b = a;
  EXPECT_EQ(Checksum(a), Checksum(b));
  b[1] = std::nextafter(b[1], 3.0);
  EXPECT_NE(Checksum(a), Checksum(b));
}

TEST(Errors, ExitCodes) {
  EXPECT_EQ(ExitCodeFor(ErrorKind::kUsage), 1);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kConfig), 1);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kParse), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kIo), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kSchema), 2);
  EXPECT_EQ(ExitCodeFor(ErrorKind::kNumerical), 3);
}

TEST(Errors, FailCarriesKindAndMessage) {
  const auto msg = ExpectError(ErrorKind::kDomain, [] { Fail(ErrorKind::kDomain, "bad s"); });
  EXPECT_NE(msg.find("bad s"), std::string::npos);
}

}  // namespace
}  // namespace gshap
