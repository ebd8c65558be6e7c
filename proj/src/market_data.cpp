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

#include "gshap/market_data.hpp"

#include <algorithm>
#include <sstream>

#include "gshap/errors.hpp"
#include "gshap/util.hpp"

namespace gshap::market {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file lines, for messages
};

CsvTable ReadCsv(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = SplitCsvLine(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      Fail(ErrorKind::kParse, path.string() + " line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(table.header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) Fail(ErrorKind::kParse, path.string() + ": missing header row");
  return table;
}

std::optional<std::size_t> FindHeader(const CsvTable& table, const std::string& name,
                                      const std::filesystem::path& path) {
  if (name.empty()) return std::nullopt;
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    Fail(ErrorKind::kSchema, path.string() + ": header has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - table.header.begin());
}

Date ParseRowDate(const std::string& text, const std::filesystem::path& path,
                  std::size_t line_no) {
  try {
    return Date::Parse(text);
  } catch (const Error&) {
    Fail(ErrorKind::kParse, path.string() + " row at line " + std::to_string(line_no) +
                                ": malformed date '" + text + "'");
  }
}

void SortAndCheckUnique(std::vector<PriceRow>& rows, const std::string& where) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PriceRow& a, const PriceRow& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].date == rows[i - 1].date) {
      Fail(ErrorKind::kIntegrity, where + ": duplicate date " + rows[i].date.ToString());
    }
  }
}

// Forward-fills columns observed on `dates` onto `calendar`. Entries before
// the first observation stay undefined.
std::vector<Series> ReindexForwardFill(std::span<const Date> dates,
                                       const std::vector<Series>& columns,
                                       std::span<const Date> calendar) {
  std::vector<Series> out(columns.size(), Series(calendar.size(), kUndefined));
  std::size_t j = 0;
  bool seen = false;
  for (std::size_t i = 0; i < calendar.size(); ++i) {
    while (j < dates.size() && dates[j] <= calendar[i]) {
      ++j;
      seen = true;
    }
    if (!seen) continue;
    for (std::size_t c = 0; c < columns.size(); ++c) out[c][i] = columns[c][j - 1];
  }
  return out;
}

void CheckCalendar(std::span<const Date> calendar) {
  if (calendar.empty()) Fail(ErrorKind::kAlignment, "calendar is empty");
  for (std::size_t i = 1; i < calendar.size(); ++i) {
    if (!(calendar[i - 1] < calendar[i])) {
      Fail(ErrorKind::kIntegrity, "calendar not strictly increasing at " +
                                      calendar[i].ToString());
    }
  }
}

void CheckOverlap(const PriceSeries& s, std::span<const Date> calendar) {
  const bool overlaps = std::any_of(s.rows.begin(), s.rows.end(), [&](const PriceRow& r) {
    return r.date >= calendar.front() && r.date <= calendar.back();
  });
  if (!overlaps) {
    Fail(ErrorKind::kAlignment, "series '" + s.symbol + "' has no observation between " +
                                    calendar.front().ToString() + " and " +
                                    calendar.back().ToString());
  }
}

std::size_t FirstFullyDefinedRow(const std::vector<Series>& columns, std::size_t rows) {
  for (std::size_t i = 0; i < rows; ++i) {
    bool ok = true;
    for (const auto& c : columns) {
      if (!IsDefined(c[i])) {
        ok = false;
        break;
      }
    }
    if (ok) return i;
  }
  return rows;
}

}  // namespace

std::vector<Date> PriceSeries::Dates() const {
  std::vector<Date> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.date);
  return out;
}

Series PriceSeries::Closes() const {
  Series out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.close);
  return out;
}

PriceSeries LoadPriceCsv(const std::filesystem::path& path, const CsvSchema& schema,
                         std::string symbol) {
  const CsvTable table = ReadCsv(path);
  const auto date_col = FindHeader(table, schema.date, path);
  const auto close_col = FindHeader(table, schema.close, path);
  if (!date_col || !close_col) {
    Fail(ErrorKind::kSchema, path.string() + ": schema must name date and close columns");
  }
  const auto open_col = FindHeader(table, schema.open, path);
  const auto high_col = FindHeader(table, schema.high, path);
  const auto low_col = FindHeader(table, schema.low, path);
  const auto volume_col = FindHeader(table, schema.volume, path);

  PriceSeries series;
  series.symbol = std::move(symbol);
  series.rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    const std::size_t line_no = table.line_numbers[i];
    const std::string ctx = path.string() + " line " + std::to_string(line_no);
    PriceRow row;
    row.date = ParseRowDate(f[*date_col], path, line_no);
    row.close = ParseDouble(f[*close_col], ctx);
    row.open = open_col ? ParseDouble(f[*open_col], ctx) : row.close;
    row.high = high_col ? ParseDouble(f[*high_col], ctx) : row.close;
    row.low = low_col ? ParseDouble(f[*low_col], ctx) : row.close;
    row.volume = volume_col ? ParseDouble(f[*volume_col], ctx) : 0.0;
    if (!(row.close > 0.0)) {
      Fail(ErrorKind::kIntegrity, ctx + ": close must be positive");
    }
    if (row.volume < 0.0) Fail(ErrorKind::kIntegrity, ctx + ": negative volume");
    series.rows.push_back(row);
  }
  SortAndCheckUnique(series.rows, path.string());
  return series;
}

std::vector<PriceSeries> LoadSeriesCsv(const std::filesystem::path& path,
                                       std::string_view date_column) {
  const CsvTable table = ReadCsv(path);
  const auto date_col = FindHeader(table, std::string(date_column), path);
  std::vector<PriceSeries> out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == *date_col) continue;
    PriceSeries s;
    s.symbol = table.header[c];
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& cell = table.rows[i][c];
      if (cell.empty()) continue;
      const std::size_t line_no = table.line_numbers[i];
      PriceRow row;
      row.date = ParseRowDate(table.rows[i][*date_col], path, line_no);
      row.close = ParseDouble(cell, path.string() + " line " + std::to_string(line_no));
      row.open = row.high = row.low = row.close;
      s.rows.push_back(row);
    }
    SortAndCheckUnique(s.rows, path.string() + " column " + s.symbol);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Date> LoadCalendarCsv(const std::filesystem::path& path) {
  const CsvTable table = ReadCsv(path);
  std::vector<Date> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    out.push_back(ParseRowDate(table.rows[i][0], path, table.line_numbers[i]));
  }
  std::sort(out.begin(), out.end());
  CheckCalendar(out);
  return out;
}

FeatureMatrix::FeatureMatrix(std::vector<Date> dates, std::vector<std::string> names,
                             Eigen::MatrixXd values)
    : dates_(std::move(dates)), names_(std::move(names)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.rows()) != dates_.size() ||
      static_cast<std::size_t>(values_.cols()) != names_.size()) {
    Fail(ErrorKind::kDimension, "feature matrix shape does not match its index");
  }
}

std::optional<std::size_t> FeatureMatrix::FindColumn(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t FeatureMatrix::ColumnIndex(std::string_view name) const {
  auto idx = FindColumn(name);
  if (!idx) Fail(ErrorKind::kSchema, "unknown column '" + std::string(name) + "'");
  return *idx;
}

Series FeatureMatrix::Column(std::string_view name) const {
  const auto c = static_cast<Eigen::Index>(ColumnIndex(name));
  return Series(values_.col(c).data(), values_.col(c).data() + values_.rows());
}

void FeatureMatrix::AddColumn(std::string name, std::span<const double> values) {
  if (values.size() != rows()) {
    Fail(ErrorKind::kDimension, "column '" + name + "' has " +
                                    std::to_string(values.size()) + " rows, matrix has " +
                                    std::to_string(rows()));
  }
  if (FindColumn(name)) Fail(ErrorKind::kSchema, "duplicate column '" + name + "'");
  values_.conservativeResize(static_cast<Eigen::Index>(rows()),
                             static_cast<Eigen::Index>(cols() + 1));
  for (std::size_t i = 0; i < values.size(); ++i) {
    values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols())) = values[i];
  }
  names_.push_back(std::move(name));
}

FeatureMatrix FeatureMatrix::SliceRows(std::size_t begin, std::size_t end) const {
  end = std::min(end, rows());
  begin = std::min(begin, end);
  std::vector<Date> dates(dates_.begin() + static_cast<std::ptrdiff_t>(begin),
                          dates_.begin() + static_cast<std::ptrdiff_t>(end));
  Eigen::MatrixXd block = values_.middleRows(static_cast<Eigen::Index>(begin),
                                             static_cast<Eigen::Index>(end - begin));
  return FeatureMatrix(std::move(dates), names_, std::move(block));
}

FeatureMatrix FeatureMatrix::SelectColumns(std::span<const std::string> names) const {
  Eigen::MatrixXd block(values_.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    block.col(static_cast<Eigen::Index>(c)) =
        values_.col(static_cast<Eigen::Index>(ColumnIndex(names[c])));
  }
  return FeatureMatrix(dates_, std::vector<std::string>(names.begin(), names.end()),
                       std::move(block));
}

FeatureMatrix FeatureMatrix::Concat(const FeatureMatrix& left, const FeatureMatrix& right) {
  if (left.dates_ != right.dates_) {
    Fail(ErrorKind::kSchema, "cannot join feature matrices with different date indices");
  }
  std::vector<std::string> names = left.names_;
  for (const auto& n : right.names_) {
    if (left.FindColumn(n)) Fail(ErrorKind::kSchema, "duplicate column '" + n + "'");
    names.push_back(n);
  }
  Eigen::MatrixXd values(left.values_.rows(), left.values_.cols() + right.values_.cols());
  values << left.values_, right.values_;
  return FeatureMatrix(left.dates_, std::move(names), std::move(values));
}

FeatureMatrix AlignCalendar(std::span<const PriceSeries> series,
                            std::span<const Date> calendar) {
  CheckCalendar(calendar);
  std::vector<Series> columns;
  std::vector<std::string> names;
  for (const auto& s : series) {
    CheckOverlap(s, calendar);
    const auto dates = s.Dates();
    auto filled = ReindexForwardFill(dates, {s.Closes()}, calendar);
    columns.push_back(std::move(filled[0]));
    names.push_back(s.symbol);
  }
  const std::size_t first = FirstFullyDefinedRow(columns, calendar.size());
  Eigen::MatrixXd values(static_cast<Eigen::Index>(calendar.size() - first),
                         static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t i = first; i < calendar.size(); ++i) {
      values(static_cast<Eigen::Index>(i - first), static_cast<Eigen::Index>(c)) =
          columns[c][i];
    }
  }
  return FeatureMatrix(std::vector<Date>(calendar.begin() + static_cast<std::ptrdiff_t>(first),
                                         calendar.end()),
                       std::move(names), std::move(values));
}

RowRange RowsInYears(std::span<const Date> dates, int first_year, int last_year) {
  auto lo = std::partition_point(dates.begin(), dates.end(),
                                 [&](const Date& d) { return d.year() < first_year; });
  auto hi = std::partition_point(lo, dates.end(),
                                 [&](const Date& d) { return d.year() <= last_year; });
  return {static_cast<std::size_t>(lo - dates.begin()),
          static_cast<std::size_t>(hi - dates.begin())};
}

const ColumnRange& ScalerParams::Range(std::string_view column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) {
    Fail(ErrorKind::kSchema, "scaler has no column '" + std::string(column) + "'");
  }
  return ranges[static_cast<std::size_t>(it - columns.begin())];
}

bool ScalerParams::operator==(const ScalerParams& other) const {
  if (columns != other.columns || fitted_on != other.fitted_on ||
      ranges.size() != other.ranges.size()) {
    return false;
  }
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].min != other.ranges[i].min || ranges[i].max != other.ranges[i].max) {
      return false;
    }
  }
  return true;
}

double ScaleValue(double x, const ColumnRange& range) {
  if (range.constant()) return 0.0;
  return (x - range.min) / (range.max - range.min);
}

double InvertValue(double scaled, const ColumnRange& range) {
  return range.min + scaled * (range.max - range.min);
}

ScalerParams FitMinMax(const FeatureMatrix& matrix, RowRange train, std::string fitted_on) {
  if (train.empty() || train.end > matrix.rows()) {
    Fail(ErrorKind::kInsufficientData, "scaler training window is empty or out of range");
  }
  ScalerParams params;
  params.fitted_on = std::move(fitted_on);
  params.columns = matrix.names();
  const auto& v = matrix.values();
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto col = v.col(static_cast<Eigen::Index>(c))
                         .segment(static_cast<Eigen::Index>(train.begin),
                                  static_cast<Eigen::Index>(train.size()));
    params.ranges.push_back({col.minCoeff(), col.maxCoeff()});
  }
  return params;
}

FeatureMatrix ApplyMinMax(const FeatureMatrix& matrix, const ScalerParams& params) {
  Eigen::MatrixXd values = matrix.values();
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const ColumnRange& r = params.Range(matrix.names()[c]);
    auto col = values.col(static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < col.size(); ++i) col(i) = ScaleValue(col(i), r);
  }
  return FeatureMatrix(matrix.dates(), matrix.names(), std::move(values));
}

Series InvertMinMax(std::span<const double> values, const ScalerParams& params,
                    std::string_view column) {
  const ColumnRange& r = params.Range(column);
  Series out;
  out.reserve(values.size());
  for (double v : values) out.push_back(InvertValue(v, r));
  return out;
}

std::string YearWindow::Id() const {
  return std::to_string(train_start) + "-" + std::to_string(train_end) + "->" +
         std::to_string(test_year);
}

RollingWindowPlan MakeWindows(int first_year, int last_year) {
  if (last_year - first_year + 1 < 4) {
    Fail(ErrorKind::kInsufficientData,
         "rolling plan needs at least 4 years, got " + std::to_string(first_year) + "-" +
             std::to_string(last_year));
  }
  RollingWindowPlan plan;
  for (int y = first_year; y + 3 <= last_year; ++y) {
    plan.windows.push_back({y, y + 2, y + 3});
  }
  return plan;
}

std::size_t IndicatorConfig::WarmUp() const {
  std::size_t warm = 0;
  for (int p : sma_periods) warm = std::max(warm, static_cast<std::size_t>(p - 1));
  if (rsi_period > 0) warm = std::max(warm, static_cast<std::size_t>(rsi_period));
  if (bollinger_period > 0) {
    warm = std::max(warm, static_cast<std::size_t>(bollinger_period - 1));
  }
  return warm;
}

double AlignedDataset::Target(std::size_t t) const {
  if (!HasTarget(t)) {
    Fail(ErrorKind::kInsufficientData, "row " + std::to_string(t) + " has no next-day close");
  }
  return close[t + 1];
}

AlignedDataset BuildDataset(const PriceSeries& target, std::span<const PriceSeries> extra,
                            const IndicatorConfig& config,
                            std::optional<std::vector<Date>> calendar) {
  if (target.rows.empty()) Fail(ErrorKind::kInsufficientData, "target series is empty");
  const std::vector<Date> target_dates = target.Dates();
  const std::vector<Date> cal = calendar ? *calendar : target_dates;
  CheckCalendar(cal);
  CheckOverlap(target, cal);

  const Series close = target.Closes();
  std::vector<std::string> names;
  std::vector<Series> columns;
  auto add = [&](std::string name, Series s) {
    names.push_back(std::move(name));
    columns.push_back(std::move(s));
  };
  if (config.include_close) add("close", close);
  if (config.include_volume) {
    Series volume;
    for (const auto& r : target.rows) volume.push_back(r.volume);
    add("volume", std::move(volume));
  }
  for (int p : config.sma_periods) add("sma_" + std::to_string(p), ComputeSma(close, p));
  for (int p : config.ema_periods) add("ema_" + std::to_string(p), ComputeEma(close, p));
  if (config.rsi_period > 0) {
    add("rsi_" + std::to_string(config.rsi_period), ComputeRsi(close, config.rsi_period));
  }
  if (config.macd_fast > 0) {
    Macd m = ComputeMacd(close, config.macd_fast, config.macd_slow, config.macd_signal);
    add("macd", std::move(m.macd));
    add("macd_signal", std::move(m.signal));
    add("macd_hist", std::move(m.histogram));
  }
  if (config.bollinger_period > 0) {
    Bollinger b = ComputeBollinger(close, config.bollinger_period, config.bollinger_width);
    add("bb_mid", std::move(b.mid));
    add("bb_upper", std::move(b.upper));
    add("bb_lower", std::move(b.lower));
  }
  // The raw close rides along as the last column so it is reindexed with the rest.
  columns.push_back(close);
  std::vector<Series> aligned = ReindexForwardFill(target_dates, columns, cal);
  Series aligned_close = std::move(aligned.back());
  aligned.pop_back();

  for (const auto& s : extra) {
    CheckOverlap(s, cal);
    auto filled = ReindexForwardFill(s.Dates(), {s.Closes()}, cal);
    if (std::find(names.begin(), names.end(), s.symbol) != names.end()) {
      Fail(ErrorKind::kSchema, "duplicate series symbol '" + s.symbol + "'");
    }
    names.push_back(s.symbol);
    aligned.push_back(std::move(filled[0]));
  }

  std::vector<Series> all = aligned;
  all.push_back(aligned_close);
  const std::size_t first = FirstFullyDefinedRow(all, cal.size());
  if (first >= cal.size()) {
    Fail(ErrorKind::kInsufficientData, "no row has every feature defined");
  }
  const std::size_t n = cal.size() - first;
  Eigen::MatrixXd values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < aligned.size(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = aligned[c][first + i];
    }
  }
  AlignedDataset ds;
  ds.features = FeatureMatrix(std::vector<Date>(cal.begin() + static_cast<std::ptrdiff_t>(first),
                                                cal.end()),
                              std::move(names), std::move(values));
  ds.close.assign(aligned_close.begin() + static_cast<std::ptrdiff_t>(first), aligned_close.end());
  return ds;
}

ScalerParams FitDatasetScaler(const AlignedDataset& dataset, RowRange train,
                              std::string fitted_on) {
  ScalerParams params = FitMinMax(dataset.features, train, std::move(fitted_on));
  const auto first = dataset.close.begin() + static_cast<std::ptrdiff_t>(train.begin);
  const auto last = dataset.close.begin() + static_cast<std::ptrdiff_t>(train.end);
  const auto [lo, hi] = std::minmax_element(first, last);
  params.columns.emplace_back(kTargetColumn);
  params.ranges.push_back({*lo, *hi});
  return params;
}

AlignedDataset ScaleDataset(const AlignedDataset& dataset, const ScalerParams& params) {
  AlignedDataset out;
  out.features = ApplyMinMax(dataset.features, params);
  out.close = dataset.close;
  out.scaler = params;
  return out;
}

std::string DatasetToCsv(const AlignedDataset& dataset) {
  std::string out = "date";
  for (const auto& n : dataset.features.names()) out += "," + n;
  out += ",target\n";
  const auto& v = dataset.features.values();
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    out += dataset.features.dates()[i].ToString();
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      out += "," + FormatDouble(v(static_cast<Eigen::Index>(i), c));
    }
    out += ",";
    if (dataset.HasTarget(i)) out += FormatDouble(dataset.Target(i));
    out += "\n";
  }
  return out;
}

SequenceSet MakeSequences(const AlignedDataset& dataset, const YearWindow& window, int steps) {
  if (steps < 1) Fail(ErrorKind::kConfig, "sequence steps must be >= 1");
  if (!dataset.scaler) Fail(ErrorKind::kConfig, "MakeSequences needs a scaled dataset");
  const auto& dates = dataset.features.dates();
  const RowRange train = RowsInYears(dates, window.train_start, window.train_end);
  const RowRange test = RowsInYears(dates, window.test_year, window.test_year);
  const auto lookback = static_cast<std::size_t>(steps);
  if (train.size() < lookback + 1) {
    Fail(ErrorKind::kInsufficientData,
         "window " + window.Id() + " has " + std::to_string(train.size()) +
             " training rows; needs at least " + std::to_string(lookback + 1));
  }
  const ColumnRange& target_range = dataset.scaler->Range(kTargetColumn);
  const auto& values = dataset.features.values();

  auto make_pair = [&](std::size_t t, RowRange home) {
    SupervisedPair p;
    p.end_row = t;
    p.input = values.middleRows(static_cast<Eigen::Index>(t + 1 - lookback),
                                static_cast<Eigen::Index>(lookback));
    p.input_end = dates[t];
    p.target_date = dates[t + 1];
    p.target_price = dataset.close[t + 1];
    p.target_scaled = ScaleValue(p.target_price, target_range);
    p.lookback_crosses_boundary = t + 1 - lookback < home.begin;
    return p;
  };

  SequenceSet set;
  set.columns = dataset.features.names();
  set.steps = steps;
  for (std::size_t t = train.begin + lookback - 1; t + 1 < train.end; ++t) {
    set.train.push_back(make_pair(t, train));
  }
  if (!test.empty()) {
    const std::size_t first_end = std::max(test.begin, lookback) - 1;
    for (std::size_t t = first_end; t + 1 < test.end; ++t) {
      set.test.push_back(make_pair(t, test));
    }
  }
  return set;
}

}  // namespace gshap::market
