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

#include "gshap/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "gshap/errors.hpp"
#include "gshap/util.hpp"

namespace gshap::eval {

namespace {

void CheckPair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) {
    Fail(ErrorKind::kDimension, "actual has " + std::to_string(actual.size()) +
                                    " values but predicted has " +
                                    std::to_string(predicted.size()));
  }
  if (actual.empty()) Fail(ErrorKind::kInsufficientData, "metrics need at least one value");
}

std::string F(double v) { return FormatDouble(v); }

}  // namespace

double Mae(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
  return sum / static_cast<double>(actual.size());
}

double Rmse(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = predicted[i] - actual[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double Mape(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      Fail(ErrorKind::kDomain, "MAPE undefined: actual value " + std::to_string(i) + " is zero");
    }
    sum += std::abs((predicted[i] - actual[i]) / actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

double R2(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sse += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    sst += (actual[i] - mean) * (actual[i] - mean);
  }
  if (sst == 0.0) Fail(ErrorKind::kDegenerate, "R2 undefined: actual values have zero variance");
  return 1.0 - sse / sst;
}

double HistoricalVolatility(std::span<const double> close) {
  if (close.size() < 3) Fail(ErrorKind::kInsufficientData, "volatility needs at least 3 prices");
  std::vector<double> r;
  r.reserve(close.size() - 1);
  for (std::size_t i = 0; i < close.size(); ++i) {
    if (!(close[i] > 0.0)) {
      Fail(ErrorKind::kDomain, "volatility needs positive prices; index " + std::to_string(i) +
                                   " is " + FormatDouble(close[i]));
    }
    if (i > 0) r.push_back(std::log(close[i] / close[i - 1]));
  }
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= static_cast<double>(r.size());
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(r.size() - 1));
  return sd * std::sqrt(252.0) * 100.0;
}

MetricReport ComputeMetrics(std::string window_id, std::string variant,
                            std::span<const double> actual, std::span<const double> predicted) {
  MetricReport m;
  m.window_id = std::move(window_id);
  m.variant = std::move(variant);
  m.mae = Mae(actual, predicted);
  m.rmse = Rmse(actual, predicted);
  m.mape = Mape(actual, predicted);
  m.r2 = R2(actual, predicted);
  m.n = actual.size();
  return m;
}

std::uint64_t WindowSeed(std::uint64_t root, std::string_view stage, const market::YearWindow& w) {
  return DeriveSeed(root, stage, static_cast<std::uint64_t>(w.test_year));
}

PreparedWindow PrepareWindow(const market::AlignedDataset& base,
                             std::span<const grouping::DocumentEmbedding> docs,
                             const market::YearWindow& window, const WindowOptions& options) {
  PreparedWindow p;
  p.window = window;
  const auto& dates = base.features.dates();
  auto train_docs = grouping::NormalizeEmbeddings(
      grouping::DocumentsInYears(docs, window.train_start, window.train_end));
  p.grouping = grouping::ClusterCosineKMeans(train_docs, options.groups,
                                             WindowSeed(options.seed, "grouping", window),
                                             options.kmeans);
  auto text = grouping::BuildGroupFeatureSeries(docs, p.grouping, dates);
  p.dropped_documents = text.dropped;

  market::AlignedDataset joined{market::FeatureMatrix::Concat(base.features, text.columns),
                                base.close, std::nullopt};
  p.train_rows = market::RowsInYears(dates, window.train_start, window.train_end);
  p.test_rows = market::RowsInYears(dates, window.test_year, window.test_year);
  if (p.train_rows.empty() || p.test_rows.empty()) {
    Fail(ErrorKind::kEmptyWindow, "window " + window.Id() + " has no rows in the dataset");
  }
  p.scaler = market::FitDatasetScaler(joined, p.train_rows, window.Id());
  p.scaled = market::ScaleDataset(joined, p.scaler);
  p.sequences = market::MakeSequences(p.scaled, window, options.steps);
  p.manifest.tech_columns = base.features.names();
  p.manifest.text_columns = text.columns.names();
  p.baseline = shap::ColumnMeans(p.scaled.features.values(), p.train_rows.begin, p.train_rows.end);
  return p;
}

VariantRun RunVariant(const PreparedWindow& prepared, forecast::TrainConfig config,
                      std::uint64_t root_seed) {
  config.seed = WindowSeed(root_seed, "train", prepared.window);
  config.steps = prepared.sequences.steps;
  VariantRun run{forecast::Train(prepared.sequences, prepared.manifest, prepared.scaler, config,
                                 prepared.window.Id()),
                 {}, {}, {}, {}};
  if (prepared.sequences.test.empty()) {
    Fail(ErrorKind::kEmptyWindow, "window " + prepared.window.Id() + " has no test pairs");
  }
  run.predicted = forecast::PredictPairs(run.trained.model, prepared.sequences,
                                         prepared.sequences.test);
  for (const auto& pair : prepared.sequences.test) {
    run.actual.push_back(pair.target_price);
    run.dates.push_back(pair.target_date);
  }
  run.metrics = ComputeMetrics(prepared.window.Id(), std::string(forecast::VariantName(config.variant)),
                               run.actual, run.predicted);
  return run;
}

BacktestReport RollingBacktest(const market::AlignedDataset& base,
                               std::span<const grouping::DocumentEmbedding> docs,
                               const market::RollingWindowPlan& plan,
                               const BacktestOptions& options, const ProgressFn& progress) {
  BacktestReport report;
  for (const auto& window : plan.windows) {
    if (progress) progress("window " + window.Id());
    const PreparedWindow prepared = PrepareWindow(base, docs, window, options.window);
    auto config = options.train;
    config.variant = forecast::Variant::kTechOnly;
    const VariantRun tech = RunVariant(prepared, config, options.window.seed);
    config.variant = forecast::Variant::kFull;
    const VariantRun full = RunVariant(prepared, config, options.window.seed);

    const auto& rows = prepared.test_rows;
    std::span<const double> closes(base.close.data() + rows.begin, rows.size());
    report.rows.push_back({window, HistoricalVolatility(closes), tech.metrics, full.metrics});
    for (std::size_t i = 0; i < tech.dates.size(); ++i) {
      report.plot.push_back({tech.dates[i], tech.actual[i], tech.predicted[i], full.predicted[i]});
    }
  }
  return report;
}

std::string BacktestTableCsv(const BacktestReport& report) {
  std::ostringstream out;
  out << "year,hv_pct,tech_mae,tech_rmse,tech_mape,tech_r2,full_mae,full_rmse,full_mape,full_r2\n";
  for (const auto& r : report.rows) {
    out << r.window.test_year << ',' << F(r.hv) << ',' << F(r.tech.mae) << ',' << F(r.tech.rmse)
        << ',' << F(r.tech.mape) << ',' << F(r.tech.r2) << ',' << F(r.full.mae) << ','
        << F(r.full.rmse) << ',' << F(r.full.mape) << ',' << F(r.full.r2) << '\n';
  }
  return out.str();
}

std::string MetricsCsv(const BacktestReport& report) {
  std::ostringstream out;
  out << "window,variant,mae,rmse,mape,r2,n\n";
  for (const auto& r : report.rows) {
    for (const MetricReport* m : {&r.tech, &r.full}) {
      out << m->window_id << ',' << m->variant << ',' << F(m->mae) << ',' << F(m->rmse) << ','
          << F(m->mape) << ',' << F(m->r2) << ',' << m->n << '\n';
    }
  }
  return out.str();
}

std::string PlotCsv(const BacktestReport& report) {
  std::ostringstream out;
  out << "date,actual,predicted_tech,predicted_full\n";
  for (const auto& p : report.plot) {
    out << p.date.ToString() << ',' << F(p.actual) << ',' << F(p.tech) << ',' << F(p.full) << '\n';
  }
  return out.str();
}

SensitivityReport SensitivitySweep(const market::AlignedDataset& base,
                                   std::span<const grouping::DocumentEmbedding> docs,
                                   const market::RollingWindowPlan& plan,
                                   std::span<const int> group_counts,
                                   const BacktestOptions& options, const ProgressFn& progress) {
  if (group_counts.empty()) Fail(ErrorKind::kConfig, "sensitivity needs at least one group count");
  for (std::size_t i = 1; i < group_counts.size(); ++i) {
    if (group_counts[i] <= group_counts[i - 1]) {
      Fail(ErrorKind::kConfig, "group counts must be distinct and ascending");
    }
  }
  SensitivityReport report;
  double best = -std::numeric_limits<double>::infinity();
  for (int groups : group_counts) {
    std::vector<double> actual;
    std::vector<double> predicted;
    for (const auto& window : plan.windows) {
      if (progress) progress("n_G=" + std::to_string(groups) + " window " + window.Id());
      WindowOptions wopts = options.window;
      wopts.groups = groups;
      const PreparedWindow prepared = PrepareWindow(base, docs, window, wopts);
      auto config = options.train;
      config.variant = forecast::Variant::kFull;
      const VariantRun run = RunVariant(prepared, config, wopts.seed);
      actual.insert(actual.end(), run.actual.begin(), run.actual.end());
      predicted.insert(predicted.end(), run.predicted.begin(), run.predicted.end());
    }
    SensitivityRow row{groups, Mae(actual, predicted), Rmse(actual, predicted),
                       R2(actual, predicted), actual.size()};
    if (row.r2 > best) {
      best = row.r2;
      report.chosen = groups;
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string SensitivityCsv(const SensitivityReport& report) {
  std::ostringstream out;
  out << "n_groups,mae,rmse,r2,chosen\n";
  for (const auto& r : report.rows) {
    out << r.groups << ',' << F(r.mae) << ',' << F(r.rmse) << ',' << F(r.r2) << ','
        << (r.groups == report.chosen ? 1 : 0) << '\n';
  }
  return out.str();
}

double ReductionPercent(double group_seconds, double token_seconds) {
  if (!(token_seconds > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (1.0 - group_seconds / token_seconds) * 100.0;
}

BenchReport BenchAttribution(const forecast::ForecastModel& model,
                             std::span<const shap::ValueFunctionSpec> instances,
                             const shap::FeatureGroups& groups, const shap::FeatureGroups& units,
                             const BenchOptions& options) {
  using Clock = std::chrono::steady_clock;
  if (instances.empty()) Fail(ErrorKind::kInsufficientData, "benchmark needs at least one instance");
  BenchReport report;
  report.token = {"token_permutation", units.size(), instances.size(), 0, 0, 0.0, 0.0};
  report.group = {"group_exact", groups.size(), instances.size(), 0, 0, 0.0, 0.0};

  auto start = Clock::now();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto a = shap::SampledShap(instances[i], units, model,
                                     {options.budget, DeriveSeed(options.seed, "bench", i), false});
    report.token.evaluations_per_instance = a.evaluations;
    report.token.evaluations += a.evaluations;
  }
  report.token.seconds = std::chrono::duration<double>(Clock::now() - start).count();

  start = Clock::now();
  for (const auto& spec : instances) {
    const auto a = shap::ExactGroupShap(spec, groups, model);
    report.group.evaluations_per_instance = a.evaluations;
    report.group.evaluations += a.evaluations;
  }
  report.group.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  report.group.reduction_pct = ReductionPercent(report.group.seconds, report.token.seconds);
  return report;
}

std::string BenchCsv(const BenchReport& report) {
  std::ostringstream out;
  out << "method,features,instances,evaluations_per_instance,evaluations,seconds,minutes,"
         "reduction_pct\n";
  for (const BenchRow* r : {&report.token, &report.group}) {
    out << r->method << ',' << r->units << ',' << r->instances << ',' << r->evaluations_per_instance
        << ',' << r->evaluations << ',' << F(r->seconds) << ',' << F(r->seconds / 60.0) << ','
        << (r == &report.group ? F(r->reduction_pct) : std::string()) << '\n';
  }
  return out.str();
}

}  // namespace gshap::eval
