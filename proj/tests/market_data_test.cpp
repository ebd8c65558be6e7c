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
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gshap/market_data.hpp"
#include "gshap/util.hpp"
#include "support.hpp"

namespace gshap::market {
namespace {

using testing::ExpectError;
using testing::TempDir;

std::filesystem::path WriteText(const TempDir& dir, const std::string& name, const std::string& text) {
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

CsvSchema FullSchema() {
  CsvSchema s;
  s.open = "open";
  s.high = "high";
  s.low = "low";
  s.volume = "volume";
  return s;
}

// Weekdays from `first`, `count` of them.
std::vector<Date> Weekdays(Date first, std::size_t count) {
  std::vector<Date> out;
  for (Date d = first; out.size() < count; d = d.AddDays(1)) {
    if (d.weekday() != 0 && d.weekday() != 6) out.push_back(d);
  }
  return out;
}

PriceSeries SeriesOn(const std::vector<Date>& dates, const std::vector<double>& closes,
                     std::string symbol = "s") {
  PriceSeries s{std::move(symbol), {}};
  for (std::size_t i = 0; i < dates.size(); ++i) {
    s.rows.push_back({dates[i], closes[i], closes[i], closes[i], closes[i], 1000.0});
  }
  return s;
}

TEST(LoadPriceCsv, WellFormedAndSorted) {
  TempDir dir;
  const auto path = WriteText(dir, "p.csv",
                              "date,open,high,low,close,volume\n"
                              "2024-01-03,2,2,2,2.5,10\n"
                              "2024-01-02,1,1,1,1.5,10\n"
                              "2024-01-04,3,3,3,3.5,0\n");
  const auto s = LoadPriceCsv(path, FullSchema(), "SPX");
  ASSERT_EQ(s.rows.size(), 3u);
  EXPECT_EQ(s.symbol, "SPX");
  EXPECT_EQ(s.rows[0].date.ToString(), "2024-01-02");
  EXPECT_EQ(s.rows[2].date.ToString(), "2024-01-04");
  EXPECT_EQ(s.Closes(), (Series{1.5, 2.5, 3.5}));
}

TEST(LoadPriceCsv, DuplicateDateNamed) {
  TempDir dir;
  const auto path = WriteText(dir, "p.csv", "date,close\n2024-01-02,1\n2024-01-02,2\n");
  const auto msg = ExpectError(ErrorKind::kIntegrity, [&] { LoadPriceCsv(path, {}, "x"); });
  EXPECT_NE(msg.find("2024-01-02"), std::string::npos);
}

TEST(LoadPriceCsv, MalformedDateNamesRow) {
  TempDir dir;
  const auto path = WriteText(dir, "p.csv", "date,close\n2024-01-02,1\n2024-13-02,2\n");
  const auto msg = ExpectError(ErrorKind::kParse, [&] { LoadPriceCsv(path, {}, "x"); });
  EXPECT_NE(msg.find("line 3"), std::string::npos);
}

TEST(LoadPriceCsv, RejectsNonPositiveCloseAndNegativeVolume) {
  TempDir dir;
  const auto a = WriteText(dir, "a.csv", "date,close\n2024-01-02,0\n");
  const auto b = WriteText(dir, "b.csv",
                           "date,open,high,low,close,volume\n2024-01-02,1,1,1,1,-1\n");
  ExpectError(ErrorKind::kIntegrity, [&] { LoadPriceCsv(a, {}, "x"); });
  ExpectError(ErrorKind::kIntegrity, [&] { LoadPriceCsv(b, FullSchema(), "x"); });
}

TEST(LoadPriceCsv, MissingColumnIsSchemaError) {
  TempDir dir;
  const auto path = WriteText(dir, "p.csv", "day,close\n2024-01-02,1\n");
  ExpectError(ErrorKind::kSchema, [&] { LoadPriceCsv(path, {}, "x"); });
}

TEST(AlignCalendar, IdentityOnCalendar) {
  const auto days = Weekdays(Date(2024, 1, 1), 5);
  const std::vector<PriceSeries> s{SeriesOn(days, {1, 2, 3, 4, 5}, "a")};
  const auto m = AlignCalendar(s, days);
  EXPECT_EQ(m.dates(), days);
  EXPECT_EQ(m.Column("a"), (Series{1, 2, 3, 4, 5}));
}

TEST(AlignCalendar, WeekendValueForwardFillsToNextTradingDay) {
  // Friday 5th, Monday 8th; daily series also trades Saturday and Sunday.
  const std::vector<Date> cal{Date(2024, 1, 5), Date(2024, 1, 8)};
  PriceSeries daily = SeriesOn({Date(2024, 1, 5), Date(2024, 1, 6), Date(2024, 1, 7)}, {1, 2, 3}, "btc");
  const auto m = AlignCalendar(std::vector<PriceSeries>{daily}, cal);
  EXPECT_EQ(m.Column("btc"), (Series{1, 3}));
}

TEST(AlignCalendar, StartsAtLatestFirstObservation) {
  const auto days = Weekdays(Date(2024, 1, 1), 6);
  PriceSeries early = SeriesOn(days, {1, 2, 3, 4, 5, 6}, "early");
  PriceSeries late = SeriesOn({days.begin() + 2, days.end()}, {30, 40, 50, 60}, "late");
  const auto m = AlignCalendar(std::vector<PriceSeries>{early, late}, days);
  ASSERT_EQ(m.rows(), 4u);
  EXPECT_EQ(m.dates().front(), days[2]);
  EXPECT_EQ(m.Column("early"), (Series{3, 4, 5, 6}));
  EXPECT_EQ(m.Column("late"), (Series{30, 40, 50, 60}));
}

TEST(AlignCalendar, NoOverlapIsAlignmentError) {
  const auto days = Weekdays(Date(2024, 1, 1), 3);
  const auto other = SeriesOn(Weekdays(Date(2025, 1, 1), 3), {1, 2, 3}, "x");
  ExpectError(ErrorKind::kAlignment,
              [&] { AlignCalendar(std::vector<PriceSeries>{other}, days); });
}

FeatureMatrix Matrix(std::vector<std::vector<double>> cols, std::vector<std::string> names) {
  const auto n = cols.front().size();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < n; ++r) v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cols[c][r];
  }
  return FeatureMatrix(Weekdays(Date(2024, 1, 1), n), std::move(names), v);
}

TEST(MinMax, FitOnTrainRowsOnly) {
  std::vector<double> a, flat(14, 4.0);
  for (int i = 0; i <= 10; ++i) a.push_back(i);
  a.push_back(50);
  a.push_back(-50);
  a.push_back(7);
  const auto m = Matrix({a, flat}, {"a", "flat"});
  const auto p = FitMinMax(m, {0, 11}, "w");
  EXPECT_EQ(p.Range("a").min, 0.0);
  EXPECT_EQ(p.Range("a").max, 10.0);
  EXPECT_TRUE(p.Range("flat").constant());
  const auto scaled = ApplyMinMax(m, p);
  EXPECT_EQ(scaled.Column("flat"), Series(14, 0.0));
  EXPECT_EQ(scaled.Column("a")[5], 0.5);
  EXPECT_EQ(scaled.Column("a")[11], 5.0);  // no clipping
  EXPECT_EQ(scaled.Column("a")[12], -5.0);
}

TEST(MinMax, ScaleValueExamples) {
  EXPECT_EQ(ScaleValue(5, {0, 10}), 0.5);
  EXPECT_EQ(ScaleValue(12, {0, 10}), 1.2);
  EXPECT_EQ(ScaleValue(3, {2, 2}), 0.0);
}

TEST(MinMax, TrainParamsIgnoreTestRows) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  std::vector<double> a(100), b(100);
  for (auto& x : a) x = n01(rng);
  for (auto& x : b) x = n01(rng);
  const auto full = Matrix({a, b}, {"a", "b"});
  const auto with_test = FitMinMax(full, {0, 60}, "w");
  const auto train_only = FitMinMax(full.SliceRows(0, 60), {0, 60}, "w");
  EXPECT_EQ(with_test, train_only);
}

TEST(MinMax, RoundTripAndUnknownColumn) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1000, 1000);
  std::vector<double> a(200);
  for (auto& x : a) x = u(rng);
  const auto m = Matrix({a}, {"a"});
  const auto p = FitMinMax(m, {0, 200}, "w");
  const auto scaled = ApplyMinMax(m, p).Column("a");
  const auto back = InvertMinMax(scaled, p, "a");
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(back[i] - a[i]));
  EXPECT_LT(worst, 1e-12);
  ExpectError(ErrorKind::kSchema, [&] { InvertMinMax(scaled, p, "nope"); });
  const auto other = Matrix({a}, {"z"});
  ExpectError(ErrorKind::kSchema, [&] { ApplyMinMax(other, p); });
}

TEST(MakeWindows, TenYearSpan) {
  const auto plan = MakeWindows(2015, 2024);
  ASSERT_EQ(plan.windows.size(), 7u);
  EXPECT_EQ(plan.windows.front().Id(), "2015-2017->2018");
  EXPECT_EQ(plan.windows.back().Id(), "2021-2023->2024");
  for (std::size_t i = 0; i < plan.windows.size(); ++i) {
    const auto& w = plan.windows[i];
    EXPECT_EQ(w.train_end - w.train_start, 2);
    EXPECT_EQ(w.test_year, w.train_end + 1);
    if (i > 0) {
      EXPECT_EQ(w.train_start, plan.windows[i - 1].train_start + 1);
    }
  }
}

TEST(MakeWindows, MinimalAndTooShort) {
  EXPECT_EQ(MakeWindows(2015, 2018).windows.size(), 1u);
  ExpectError(ErrorKind::kInsufficientData, [] { MakeWindows(2015, 2017); });
}

// Trending price with noise over `days` weekdays starting 2015-01-01.
PriceSeries Synthetic(std::size_t days, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  const auto dates = Weekdays(Date(2015, 1, 1), days);
  std::vector<double> closes;
  double level = 100;
  for (std::size_t i = 0; i < days; ++i) {
    level *= std::exp(0.01 * n01(rng));
    closes.push_back(level);
  }
  return SeriesOn(dates, closes, "px");
}

TEST(BuildDataset, ColumnsWarmUpAndTarget) {
  const auto target = Synthetic(300, 1);
  const IndicatorConfig config;
  const auto ds = BuildDataset(target, {}, config);
  const std::vector<std::string> want{"close", "volume", "sma_20", "sma_50", "ema_20",
                                      "ema_50", "rsi_14", "macd", "macd_signal", "macd_hist",
                                      "bb_mid", "bb_upper", "bb_lower"};
  EXPECT_EQ(ds.features.names(), want);
  EXPECT_EQ(config.WarmUp(), 49u);
  EXPECT_EQ(ds.rows(), 300u - 49u);
  EXPECT_EQ(ds.features.dates().front(), target.rows[49].date);
  EXPECT_TRUE(ds.features.values().allFinite());
  for (std::size_t t = 0; t + 1 < ds.rows(); ++t) {
    EXPECT_EQ(ds.Target(t), target.rows[49 + t + 1].close);
  }
  EXPECT_FALSE(ds.HasTarget(ds.rows() - 1));
  const auto csv = DatasetToCsv(ds);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "date,close,volume,sma_20,sma_50,ema_20,ema_50,rsi_14,macd,"
                                           "macd_signal,macd_hist,bb_mid,bb_upper,bb_lower,target");
  EXPECT_EQ(csv.substr(csv.size() - 2), ",\n");
}

TEST(BuildDataset, ExtraSeriesForwardFilled) {
  const auto target = Synthetic(120, 2);
  std::vector<Date> every;
  for (Date d = target.rows.front().date; d <= target.rows.back().date; d = d.AddDays(1)) every.push_back(d);
  std::vector<double> v(every.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) + 1;
  const auto btc = SeriesOn(every, v, "btc");
  const auto ds = BuildDataset(target, std::vector<PriceSeries>{btc}, IndicatorConfig{});
  const auto col = ds.features.Column("btc");
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const auto offset = (ds.features.dates()[r].days() - every.front().days()).count();
    EXPECT_EQ(col[r], static_cast<double>(offset) + 1);
  }
}

// Scaled dataset with `rows` weekday rows from 2015-01-01.
AlignedDataset SmallScaled(std::size_t rows) {
  auto dates = Weekdays(Date(2015, 1, 1), rows);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), 1);
  std::vector<double> close;
  for (std::size_t i = 0; i < rows; ++i) {
    v(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
    close.push_back(100.0 + static_cast<double>(i));
  }
  AlignedDataset ds{FeatureMatrix(dates, {"x"}, v), close, std::nullopt};
  const auto p = FitDatasetScaler(ds, {0, rows}, "w");
  return ScaleDataset(ds, p);
}

TEST(MakeSequences, PairCounts) {
  const YearWindow w{2015, 2017, 2018};
  // Row t pairs with close[t+1]; with 12 rows the last two input ends are rows 9 and 10.
  const auto twelve = MakeSequences(SmallScaled(12), w, 10);
  ASSERT_EQ(twelve.train.size(), 2u);
  EXPECT_EQ(twelve.train[0].end_row, 9u);
  EXPECT_EQ(twelve.train[1].end_row, 10u);
  EXPECT_EQ(twelve.train[1].target_price, 111.0);
  EXPECT_EQ(MakeSequences(SmallScaled(11), w, 10).train.size(), 1u);
  ExpectError(ErrorKind::kInsufficientData, [&] { MakeSequences(SmallScaled(10), w, 10); });
}

TEST(MakeSequences, SingleStep) {
  const auto set = MakeSequences(SmallScaled(5), {2015, 2017, 2018}, 1);
  ASSERT_EQ(set.train.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(set.train[i].input.rows(), 1);
    EXPECT_EQ(set.train[i].end_row, i);
    EXPECT_EQ(set.train[i].target_price, 100.0 + static_cast<double>(i + 1));
  }
}

TEST(MakeSequences, BoundaryEnumeration) {
  // Four years of weekdays: 2015-2017 train, 2018 test.
  const auto ds = SmallScaled(4 * 261 + 5);
  const YearWindow w{2015, 2017, 2018};
  const auto set = MakeSequences(ds, w, 10);
  const auto& dates = ds.features.dates();
  const auto train = RowsInYears(dates, 2015, 2017);
  const auto test = RowsInYears(dates, 2018, 2018);
  EXPECT_EQ(set.train.size(), train.size() - 10);
  EXPECT_EQ(set.test.size(), test.size());
  for (const auto& p : set.train) {
    EXPECT_GE(p.end_row + 1, train.begin + 10);
    EXPECT_TRUE(train.contains(p.end_row + 1));
    EXPECT_FALSE(p.lookback_crosses_boundary);
  }
  std::size_t flagged = 0;
  for (const auto& p : set.test) {
    EXPECT_EQ(p.target_date.year(), 2018);
    EXPECT_EQ(p.target_date, dates[p.end_row + 1]);
    EXPECT_EQ(p.input_end, dates[p.end_row]);
    EXPECT_EQ(p.lookback_crosses_boundary, p.end_row + 1 < test.begin + 10);
    flagged += p.lookback_crosses_boundary;
  }
  EXPECT_EQ(flagged, 10u);
  // Every input row is the matching scaled matrix row.
  for (const auto& p : set.test) {
    for (int s = 0; s < 10; ++s) {
      EXPECT_EQ(p.input(s, 0), ds.features.values()(static_cast<Eigen::Index>(p.end_row) - 9 + s, 0));
    }
  }
}

TEST(MakeSequences, NeedsScaledDataset) {
  AlignedDataset raw{FeatureMatrix(Weekdays(Date(2015, 1, 1), 20), {"x"}, Eigen::MatrixXd::Zero(20, 1)),
                     std::vector<double>(20, 1.0), std::nullopt};
  ExpectError(ErrorKind::kConfig, [&] { MakeSequences(raw, {2015, 2017, 2018}, 3); });
}

}  // namespace
}  // namespace gshap::market
