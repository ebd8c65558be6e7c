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

#ifndef GSHAP_MARKET_DATA_HPP_
#define GSHAP_MARKET_DATA_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gshap/date.hpp"
#include "gshap/indicators.hpp"

namespace gshap::market {

struct PriceRow {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;
};

// Daily observations of one instrument, strictly increasing in date.
struct PriceSeries {
  std::string symbol;
  std::vector<PriceRow> rows;

  std::vector<Date> Dates() const;
  Series Closes() const;
};

// Column mapping for LoadPriceCsv. An empty name marks the column absent:
// open/high/low then default to close and volume to 0.
struct CsvSchema {
  std::string date = "date";
  std::string open;
  std::string high;
  std::string low;
  std::string close = "close";
  std::string volume;
};

// Rows come back sorted ascending. Malformed dates raise kParse naming the
// row; duplicate dates raise kIntegrity naming the date; close <= 0 or
// volume < 0 raise kIntegrity.
PriceSeries LoadPriceCsv(const std::filesystem::path& path, const CsvSchema& schema,
                         std::string symbol);

// One single-value series per non-date column. Empty cells are skipped, so
// sparse columns are fine.
std::vector<PriceSeries> LoadSeriesCsv(const std::filesystem::path& path,
                                       std::string_view date_column = "date");

// One-column CSV of trading days (header required).
std::vector<Date> LoadCalendarCsv(const std::filesystem::path& path);

// Date-indexed matrix of named feature columns. Row i belongs to dates()[i].
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<Date> dates, std::vector<std::string> names,
                Eigen::MatrixXd values);

  std::size_t rows() const { return dates_.size(); }
  std::size_t cols() const { return names_.size(); }
  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& mutable_values() { return values_; }

  // Throws kSchema for unknown names.
  std::size_t ColumnIndex(std::string_view name) const;
  std::optional<std::size_t> FindColumn(std::string_view name) const;
  Series Column(std::string_view name) const;

  void AddColumn(std::string name, std::span<const double> values);
  FeatureMatrix SliceRows(std::size_t begin, std::size_t end) const;
  FeatureMatrix SelectColumns(std::span<const std::string> names) const;

  // Column-wise join of two matrices over an identical date index.
  static FeatureMatrix Concat(const FeatureMatrix& left, const FeatureMatrix& right);

 private:
  std::vector<Date> dates_;
  std::vector<std::string> names_;
  Eigen::MatrixXd values_;
};

// Reindexes every series (its close) onto `calendar` with forward fill.
// Rows before the latest first observation are trimmed. Column names are the
// series symbols. A series with no observation inside the calendar span
// raises kAlignment.
FeatureMatrix AlignCalendar(std::span<const PriceSeries> series,
                            std::span<const Date> calendar);

// Half-open row interval [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t row) const { return row >= begin && row < end; }
};

// Rows whose calendar year lies in [first_year, last_year]; dates are sorted,
// so the rows are contiguous.
RowRange RowsInYears(std::span<const Date> dates, int first_year, int last_year);

struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
  bool constant() const { return max == min; }
};

inline constexpr std::string_view kTargetColumn = "target";

struct ScalerParams {
  std::vector<std::string> columns;
  std::vector<ColumnRange> ranges;
  std::string fitted_on;

  // Throws kSchema for unknown names.
  const ColumnRange& Range(std::string_view column) const;
  bool operator==(const ScalerParams&) const;
};

// (x - min) / (max - min); constant columns map to 0. No clipping.
double ScaleValue(double x, const ColumnRange& range);
double InvertValue(double scaled, const ColumnRange& range);

// Per-column min/max over the training rows only.
ScalerParams FitMinMax(const FeatureMatrix& matrix, RowRange train,
                       std::string fitted_on);
FeatureMatrix ApplyMinMax(const FeatureMatrix& matrix, const ScalerParams& params);
Series InvertMinMax(std::span<const double> values, const ScalerParams& params,
                    std::string_view column);

struct YearWindow {
  int train_start = 0;
  int train_end = 0;
  int test_year = 0;

  std::string Id() const;
  bool operator==(const YearWindow&) const = default;
};

struct RollingWindowPlan {
  std::vector<YearWindow> windows;
};

// Three training years followed by one test year, advancing one year at a
// time. Needs at least four years.
RollingWindowPlan MakeWindows(int first_year, int last_year);

// Technical feature registry. Every period is configurable.
struct IndicatorConfig {
  std::vector<int> sma_periods{20, 50};
  std::vector<int> ema_periods{20, 50};
  int rsi_period = 14;
  int macd_fast = 12;
  int macd_slow = 26;
  int macd_signal = 9;
  int bollinger_period = 20;
  double bollinger_width = 2.0;
  bool include_close = true;
  bool include_volume = true;

  // Leading rows with at least one undefined indicator.
  std::size_t WarmUp() const;
};

// Features plus raw closes; Target(t) is the close of the next row.
struct AlignedDataset {
  FeatureMatrix features;
  std::vector<double> close;
  std::optional<ScalerParams> scaler;  // present once features are scaled

  std::size_t rows() const { return close.size(); }
  bool HasTarget(std::size_t t) const { return t + 1 < close.size(); }
  double Target(std::size_t t) const;
};

// Computes indicators on the target series, aligns target and extra series
// onto the calendar (target dates when none is supplied), and trims the
// warm-up prefix and leading gaps.
AlignedDataset BuildDataset(const PriceSeries& target,
                            std::span<const PriceSeries> extra,
                            const IndicatorConfig& config,
                            std::optional<std::vector<Date>> calendar = std::nullopt);

// Fits feature ranges on the train rows plus a "target" range over the train
// rows' closes.
ScalerParams FitDatasetScaler(const AlignedDataset& dataset, RowRange train,
                              std::string fitted_on);
AlignedDataset ScaleDataset(const AlignedDataset& dataset, const ScalerParams& params);

// date, features..., target. The last row has an empty target cell.
std::string DatasetToCsv(const AlignedDataset& dataset);

struct SupervisedPair {
  Eigen::MatrixXd input;  // steps x columns, scaled
  std::size_t end_row = 0;
  Date input_end;
  Date target_date;
  double target_scaled = 0.0;
  double target_price = 0.0;
  // Test pairs may look back into training rows for context.
  bool lookback_crosses_boundary = false;
};

struct SequenceSet {
  std::vector<std::string> columns;
  int steps = 0;
  std::vector<SupervisedPair> train;
  std::vector<SupervisedPair> test;
};

// Pairs (rows t-steps+1..t, close at t+1). Training pairs keep inputs and
// target inside the training years; test pairs have target dates inside the
// test year. `dataset` must be scaled.
SequenceSet MakeSequences(const AlignedDataset& dataset, const YearWindow& window,
                          int steps);

}  // namespace gshap::market

#endif  // GSHAP_MARKET_DATA_HPP_
