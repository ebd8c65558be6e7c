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

#ifndef GSHAP_EVALUATION_HPP_
#define GSHAP_EVALUATION_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gshap/date.hpp"
#include "gshap/gru_forecaster.hpp"
#include "gshap/market_data.hpp"
#include "gshap/semantic_grouping.hpp"
#include "gshap/shapley.hpp"

namespace gshap::eval {

// Errors in price units. All four require equal nonzero lengths.
double Mae(std::span<const double> actual, std::span<const double> predicted);
double Rmse(std::span<const double> actual, std::span<const double> predicted);
// Percent. Any zero actual raises kDomain.
double Mape(std::span<const double> actual, std::span<const double> predicted);
// 1 - SSE/SST about the actual mean. Constant actuals raise kDegenerate.
double R2(std::span<const double> actual, std::span<const double> predicted);

// Sample stdev of daily log returns * sqrt(252) * 100.
double HistoricalVolatility(std::span<const double> close);

struct MetricReport {
  std::string window_id;
  std::string variant;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

MetricReport ComputeMetrics(std::string window_id, std::string variant,
                            std::span<const double> actual, std::span<const double> predicted);

// --- per-window pipeline ----------------------------------------------------

struct WindowOptions {
  int groups = 5;
  int steps = 10;
  std::uint64_t seed = 0;
  grouping::KMeansOptions kmeans;
};

// Everything fitted on one window's training years.
struct PreparedWindow {
  market::YearWindow window;
  grouping::GroupingModel grouping;
  std::size_t dropped_documents = 0;
  market::ScalerParams scaler;
  market::AlignedDataset scaled;  // technical + group columns, scaled
  market::SequenceSet sequences;
  forecast::Manifest manifest;
  Eigen::VectorXd baseline;  // train-row means over sequences.columns
  market::RowRange train_rows;
  market::RowRange test_rows;
};

// Seed used for the grouping fit and for training in a given window.
std::uint64_t WindowSeed(std::uint64_t root, std::string_view stage, const market::YearWindow& w);

// Clusters the training years' documents, appends group and sentiment
// columns, fits the scaler on training rows, and builds sequences.
// `base` holds unscaled technical features.
PreparedWindow PrepareWindow(const market::AlignedDataset& base,
                             std::span<const grouping::DocumentEmbedding> docs,
                             const market::YearWindow& window, const WindowOptions& options);

struct VariantRun {
  forecast::TrainResult trained;
  std::vector<double> actual;     // price units, one per test pair
  std::vector<double> predicted;
  std::vector<Date> dates;        // target dates
  MetricReport metrics;
};

// Trains `config.variant` on the window (seed taken from the window) and
// scores every test pair.
VariantRun RunVariant(const PreparedWindow& prepared, forecast::TrainConfig config,
                      std::uint64_t root_seed);

using ProgressFn = std::function<void(const std::string&)>;

// --- rolling backtest -------------------------------------------------------

struct BacktestOptions {
  WindowOptions window;
  forecast::TrainConfig train;
};

struct BacktestRow {
  market::YearWindow window;
  double hv = 0.0;
  MetricReport tech;
  MetricReport full;
};

struct PlotRow {
  Date date;
  double actual = 0.0;
  double tech = 0.0;
  double full = 0.0;
};

struct BacktestReport {
  std::vector<BacktestRow> rows;
  std::vector<PlotRow> plot;
};

BacktestReport RollingBacktest(const market::AlignedDataset& base,
                               std::span<const grouping::DocumentEmbedding> docs,
                               const market::RollingWindowPlan& plan,
                               const BacktestOptions& options, const ProgressFn& progress = {});

// year,hv_pct,tech_mae,...,full_r2
std::string BacktestTableCsv(const BacktestReport& report);
// window,variant,mae,rmse,mape,r2,n
std::string MetricsCsv(const BacktestReport& report);
// date,actual,predicted_tech,predicted_full
std::string PlotCsv(const BacktestReport& report);

// --- n_G sensitivity ---------------------------------------------------------

struct SensitivityRow {
  int groups = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

struct SensitivityReport {
  std::vector<SensitivityRow> rows;
  int chosen = 0;  // groups value with the highest r2
};

// FULL model per group count; test predictions pooled across the plan's windows.
SensitivityReport SensitivitySweep(const market::AlignedDataset& base,
                                   std::span<const grouping::DocumentEmbedding> docs,
                                   const market::RollingWindowPlan& plan,
                                   std::span<const int> group_counts,
                                   const BacktestOptions& options,
                                   const ProgressFn& progress = {});

// n_groups,mae,rmse,r2,chosen
std::string SensitivityCsv(const SensitivityReport& report);

// --- attribution cost benchmark ---------------------------------------------

struct BenchRow {
  std::string method;
  std::size_t units = 0;
  std::size_t instances = 0;
  std::uint64_t evaluations_per_instance = 0;
  std::uint64_t evaluations = 0;
  double seconds = 0.0;
  double reduction_pct = 0.0;  // only meaningful on the group row
};

struct BenchReport {
  BenchRow token;
  BenchRow group;
};

struct BenchOptions {
  int budget = 10;
  std::uint64_t seed = 0;
};

// Exact attribution over `groups` vs permutation sampling over `units` on the
// same instances.
BenchReport BenchAttribution(const forecast::ForecastModel& model,
                             std::span<const shap::ValueFunctionSpec> instances,
                             const shap::FeatureGroups& groups, const shap::FeatureGroups& units,
                             const BenchOptions& options);

double ReductionPercent(double group_seconds, double token_seconds);

// method,features,instances,evaluations_per_instance,evaluations,seconds,minutes,reduction_pct
std::string BenchCsv(const BenchReport& report);

}  // namespace gshap::eval

#endif  // GSHAP_EVALUATION_HPP_
