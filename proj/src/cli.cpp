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

#include "gshap/cli.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "gshap/errors.hpp"
#include "gshap/evaluation.hpp"
#include "gshap/semantic_grouping.hpp"
#include "gshap/util.hpp"

namespace gshap::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

template <typename T>
T Get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, "config key '" + key + "': " + e.what());
  }
}

template <typename Fn>
void ForEachKey(const json& j, const std::string& section, Fn&& fn) {
  if (!j.is_object()) Fail(ErrorKind::kConfig, "config section '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!fn(key, value)) {
      Fail(ErrorKind::kConfig, "unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

market::IndicatorConfig IndicatorsFromJson(const json& j) {
  market::IndicatorConfig c;
  ForEachKey(j, "indicators", [&](const std::string& k, const json& v) {
    if (k == "sma") c.sma_periods = Get<std::vector<int>>(v, k);
    else if (k == "ema") c.ema_periods = Get<std::vector<int>>(v, k);
    else if (k == "rsi") c.rsi_period = Get<int>(v, k);
    else if (k == "macd_fast") c.macd_fast = Get<int>(v, k);
    else if (k == "macd_slow") c.macd_slow = Get<int>(v, k);
    else if (k == "macd_signal") c.macd_signal = Get<int>(v, k);
    else if (k == "bollinger_period") c.bollinger_period = Get<int>(v, k);
    else if (k == "bollinger_width") c.bollinger_width = Get<double>(v, k);
    else if (k == "include_close") c.include_close = Get<bool>(v, k);
    else if (k == "include_volume") c.include_volume = Get<bool>(v, k);
    else return false;
    return true;
  });
  return c;
}

json IndicatorsToJson(const market::IndicatorConfig& c) {
  return json{{"sma", c.sma_periods},           {"ema", c.ema_periods},
              {"rsi", c.rsi_period},            {"macd_fast", c.macd_fast},
              {"macd_slow", c.macd_slow},       {"macd_signal", c.macd_signal},
              {"bollinger_period", c.bollinger_period},
              {"bollinger_width", c.bollinger_width},
              {"include_close", c.include_close}, {"include_volume", c.include_volume}};
}

ShapConfig ShapFromJson(const json& j) {
  ShapConfig c;
  ForEachKey(j, "shap", [&](const std::string& k, const json& v) {
    if (k == "mode") c.mode = shap::ParseValueMode(Get<std::string>(v, k));
    else if (k == "method") c.method = Get<std::string>(v, k);
    else if (k == "partition") c.partition = Get<std::string>(v, k);
    else if (k == "token_units") c.token_units = Get<std::string>(v, k);
    else if (k == "budget") c.budget = Get<int>(v, k);
    else if (k == "instances") c.instances = Get<int>(v, k);
    else if (k == "bench_instances") c.bench_instances = Get<int>(v, k);
    else return false;
    return true;
  });
  if (c.method != "exact" && c.method != "sampled") {
    Fail(ErrorKind::kConfig, "shap.method must be 'exact' or 'sampled'");
  }
  if (c.partition != "semantic" && c.partition != "semantic+context" && c.partition != "columns") {
    Fail(ErrorKind::kConfig, "shap.partition must be 'semantic', 'semantic+context' or 'columns'");
  }
  if (c.token_units != "cells" && c.token_units != "columns") {
    Fail(ErrorKind::kConfig, "shap.token_units must be 'cells' or 'columns'");
  }
  if (c.budget < 1) Fail(ErrorKind::kConfig, "shap.budget must be >= 1");
  if (c.instances < 0 || c.bench_instances < 1) {
    Fail(ErrorKind::kConfig, "shap.instances must be >= 0 and shap.bench_instances >= 1");
  }
  return c;
}

DataPaths DataFromJson(const json& j) {
  DataPaths d;
  ForEachKey(j, "data", [&](const std::string& k, const json& v) {
    if (k == "prices") d.prices = Get<std::string>(v, k);
    else if (k == "series") d.series = Get<std::vector<std::string>>(v, k);
    else if (k == "embeddings") d.embeddings = Get<std::string>(v, k);
    else if (k == "calendar") d.calendar = Get<std::string>(v, k);
    else return false;
    return true;
  });
  return d;
}

}  // namespace

RunConfig RunConfigFromJson(const json& j) {
  RunConfig c;
  ForEachKey(j, "", [&](const std::string& k, const json& v) {
    if (k == "data") c.data = DataFromJson(v);
    else if (k == "out") c.out = Get<std::string>(v, k);
    else if (k == "seed") c.seed = Get<std::uint64_t>(v, k);
    else if (k == "groups") c.groups = Get<int>(v, k);
    else if (k == "test_year") c.test_year = Get<int>(v, k);
    else if (k == "model") c.model = Get<std::string>(v, k);
    else if (k == "max_windows") c.max_windows = Get<int>(v, k);
    else if (k == "sensitivity_groups") c.sensitivity_groups = Get<std::vector<int>>(v, k);
    else if (k == "indicators") c.indicators = IndicatorsFromJson(v);
    else if (k == "train") c.train = forecast::TrainConfigFromJson(v);
    else if (k == "shap") c.shap = ShapFromJson(v);
    else if (k == "synth") c.synth = synth::SynthSpecFromJson(v);
    else return false;
    return true;
  });
  if (c.groups < 1) Fail(ErrorKind::kConfig, "groups must be >= 1");
  if (c.max_windows < 0) Fail(ErrorKind::kConfig, "max_windows must be >= 0");
  return c;
}

json RunConfigToJson(const RunConfig& c) {
  json data{{"prices", c.data.prices},
            {"series", c.data.series},
            {"embeddings", c.data.embeddings},
            {"calendar", c.data.calendar}};
  json shap{{"mode", shap::ValueModeName(c.shap.mode)},
            {"method", c.shap.method},
            {"partition", c.shap.partition},
            {"token_units", c.shap.token_units},
            {"budget", c.shap.budget},
            {"instances", c.shap.instances},
            {"bench_instances", c.shap.bench_instances}};
  json out{{"data", data},
           {"seed", c.seed},
           {"groups", c.groups},
           {"model", c.model},
           {"max_windows", c.max_windows},
           {"sensitivity_groups", c.sensitivity_groups},
           {"indicators", IndicatorsToJson(c.indicators)},
           {"train", forecast::TrainConfigToJson(c.train)},
           {"shap", shap},
           {"synth", synth::SynthSpecToJson(c.synth)}};
  if (c.test_year) out["test_year"] = *c.test_year;
  return out;
}

namespace {

class Runner {
 public:
  Runner(std::string command, RunConfig config, std::ostream& out, std::ostream& err)
      : command_(std::move(command)), cfg_(std::move(config)), out_(out), err_(err) {
    cfg_.train.seed = cfg_.seed;
    cfg_.synth.seed = cfg_.seed;
  }

  void Run() {
    static const std::map<std::string, void (Runner::*)()> kCommands{
        {"ingest", &Runner::Ingest},     {"group", &Runner::Group},
        {"train", &Runner::TrainCmd},    {"predict", &Runner::PredictCmd},
        {"explain", &Runner::Explain},   {"evaluate", &Runner::Evaluate},
        {"sensitivity", &Runner::Sensitivity}, {"bench-shap", &Runner::Bench},
        {"synth", &Runner::Synth}};
    (this->*kCommands.at(command_))();
  }

 private:
  // --- inputs ---------------------------------------------------------------

  static void RequireFile(const std::string& path, const std::string& what) {
    if (path.empty()) Fail(ErrorKind::kConfig, what + " path is not set");
    if (!fs::exists(path)) Fail(ErrorKind::kIo, what + " file '" + path + "' does not exist");
  }

  void CheckInputs(bool need_embeddings) const {
    RequireFile(cfg_.data.prices, "data.prices");
    for (const auto& s : cfg_.data.series) RequireFile(s, "data.series");
    if (!cfg_.data.calendar.empty()) RequireFile(cfg_.data.calendar, "data.calendar");
    if (need_embeddings) RequireFile(cfg_.data.embeddings, "data.embeddings");
  }

  const market::AlignedDataset& Base() {
    if (!base_) {
      CheckInputs(command_ != "ingest");
      market::CsvSchema schema;
      schema.open = "open";
      schema.high = "high";
      schema.low = "low";
      schema.volume = cfg_.indicators.include_volume ? "volume" : "";
      const auto target = market::LoadPriceCsv(cfg_.data.prices, schema, "close");
      std::vector<market::PriceSeries> extra;
      for (const auto& path : cfg_.data.series) {
        auto loaded = market::LoadSeriesCsv(path);
        extra.insert(extra.end(), loaded.begin(), loaded.end());
      }
      std::optional<std::vector<Date>> calendar;
      if (!cfg_.data.calendar.empty()) calendar = market::LoadCalendarCsv(cfg_.data.calendar);
      base_ = market::BuildDataset(target, extra, cfg_.indicators, calendar);
      Log("dataset: " + std::to_string(base_->rows()) + " rows x " +
          std::to_string(base_->features.cols()) + " features");
    }
    return *base_;
  }

  const std::vector<grouping::DocumentEmbedding>& Docs() {
    if (!docs_) {
      RequireFile(cfg_.data.embeddings, "data.embeddings");
      docs_ = grouping::LoadEmbeddingsJsonl(cfg_.data.embeddings);
      Log("documents: " + std::to_string(docs_->size()));
    }
    return *docs_;
  }

  market::RollingWindowPlan Plan() {
    const auto& dates = Base().features.dates();
    auto plan = market::MakeWindows(dates.front().year(), dates.back().year());
    if (cfg_.max_windows > 0 && plan.windows.size() > static_cast<std::size_t>(cfg_.max_windows)) {
      plan.windows.resize(static_cast<std::size_t>(cfg_.max_windows));
    }
    return plan;
  }

  market::YearWindow Window(const std::string& id = {}) {
    const auto plan = market::MakeWindows(Base().features.dates().front().year(),
                                          Base().features.dates().back().year());
    for (const auto& w : plan.windows) {
      if (!id.empty() ? w.Id() == id : (!cfg_.test_year || w.test_year == *cfg_.test_year)) {
        return w;
      }
    }
    if (!id.empty()) Fail(ErrorKind::kSchema, "window " + id + " is not covered by the data");
    Fail(ErrorKind::kConfig, "test_year " + std::to_string(*cfg_.test_year) +
                                 " is not a test year of the data's rolling plan");
  }

  eval::WindowOptions WindowOpts(int groups) const {
    eval::WindowOptions o;
    o.groups = groups;
    o.steps = cfg_.train.steps;
    o.seed = cfg_.seed;
    return o;
  }

  eval::PreparedWindow Prepare(const market::YearWindow& w, int groups) {
    Log("window " + w.Id() + ": grouping and scaling");
    return eval::PrepareWindow(Base(), Docs(), w, WindowOpts(groups));
  }

  std::string ModelPath(forecast::Variant variant) const {
    if (!cfg_.model.empty()) return cfg_.model;
    return (fs::path(cfg_.out) / ("model_" + std::string(forecast::VariantName(variant)) + ".json"))
        .string();
  }

  forecast::ForecastModel LoadModel(forecast::Variant variant) {
    const auto path = ModelPath(variant);
    if (!fs::exists(path)) {
      Fail(ErrorKind::kIo, "model file '" + path + "' does not exist; run 'train' first");
    }
    json j;
    try {
      j = json::parse(ReadFile(path));
    } catch (const json::exception& e) {
      Fail(ErrorKind::kParse, "model file '" + path + "': " + e.what());
    }
    return forecast::ModelFromJson(j);
  }

  static int GroupCount(const forecast::Manifest& m) {
    int n = 0;
    while (std::find(m.text_columns.begin(), m.text_columns.end(), grouping::GroupColumnName(n)) !=
           m.text_columns.end()) {
      ++n;
    }
    return n;
  }

  // Window data rebuilt the way the model saw it; the scaler must match.
  eval::PreparedWindow PrepareFor(const forecast::ForecastModel& model) {
    const auto window = Window(model.window_id);
    const int groups = std::max(1, GroupCount(model.manifest));
    if (model.config.variant == forecast::Variant::kFull && groups != cfg_.groups) {
      Log("using " + std::to_string(groups) + " groups from the model");
    }
    auto prepared = Prepare(window, model.config.variant == forecast::Variant::kFull ? groups
                                                                                      : cfg_.groups);
    if (!(prepared.scaler.Range(market::kTargetColumn).min ==
              model.scaler.Range(market::kTargetColumn).min &&
          prepared.scaler.Range(market::kTargetColumn).max ==
              model.scaler.Range(market::kTargetColumn).max)) {
      Fail(ErrorKind::kSchema, "model scaler does not match the data for window " + window.Id());
    }
    if (model.config.steps != prepared.sequences.steps) {
      prepared.sequences = market::MakeSequences(prepared.scaled, window, model.config.steps);
    }
    return prepared;
  }

  shap::FeatureGroups Partition(const forecast::Manifest& m) const {
    shap::FeatureGroups groups;
    if (cfg_.shap.partition == "columns") return shap::SingletonUnits(m.AllColumns());
    const int n = GroupCount(m);
    if (n == 0) {
      Fail(ErrorKind::kSchema, "model has no group columns; use shap.partition 'columns'");
    }
    for (int g = 0; g < n; ++g) {
      groups.groups.push_back({"group_" + std::to_string(g), {grouping::GroupColumnName(g)}, -1});
    }
    if (cfg_.shap.partition == "semantic+context") {
      shap::FeatureGroup sentiment{"sentiment", {}, -1};
      for (const auto& c : grouping::kSentimentColumns) {
        if (std::find(m.text_columns.begin(), m.text_columns.end(), c) != m.text_columns.end()) {
          sentiment.columns.emplace_back(c);
        }
      }
      if (!sentiment.columns.empty()) groups.groups.push_back(sentiment);
      groups.groups.push_back({"technical", m.tech_columns, -1});
    }
    return groups;
  }

  // --- outputs --------------------------------------------------------------

  std::string Echo() const {
    return "# gshap " + command_ + " " + kVersion + "\n# seed: " + std::to_string(cfg_.seed) +
           "\n# config: " + RunConfigToJson(cfg_).dump() + "\n";
  }

  json EchoJson() const { return json{{"command", command_}, {"seed", cfg_.seed}, {"config", RunConfigToJson(cfg_)}}; }

  void Write(const std::string& name, const std::string& content) {
    const auto path = fs::path(cfg_.out) / name;
    WriteFileAtomic(path, content);
    out_ << "wrote " << path.string() << '\n';
  }

  void WriteReport(const std::string& name, const std::string& csv) { Write(name, Echo() + csv); }

  void WriteJson(const std::string& name, json body) {
    body["provenance"] = EchoJson();
    Write(name, body.dump(2) + "\n");
  }

  void Log(const std::string& msg) const { err_ << "[" << command_ << "] " << msg << '\n'; }

  static std::string F(double v) { return FormatDouble(v); }

  // --- commands -------------------------------------------------------------

  void Ingest() {
    const auto& base = Base();
    Write("dataset.csv", market::DatasetToCsv(base));
    WriteJson("ingest.json", json{{"rows", base.rows()},
                                  {"columns", base.features.names()},
                                  {"first_date", base.features.dates().front().ToString()},
                                  {"last_date", base.features.dates().back().ToString()}});
  }

  void Group() {
    const auto window = Window();
    const auto prepared = Prepare(window, cfg_.groups);
    auto model_json = grouping::GroupingModelToJson(prepared.grouping);
    model_json["window"] = window.Id();
    WriteJson("grouping_model.json", model_json);

    // Unscaled values for audit.
    const auto text = grouping::BuildGroupFeatureSeries(Docs(), prepared.grouping,
                                                        Base().features.dates());
    std::ostringstream features;
    features << "date";
    for (const auto& n : text.columns.names()) features << ',' << n;
    features << '\n';
    for (std::size_t r = 0; r < text.columns.rows(); ++r) {
      features << text.columns.dates()[r].ToString();
      for (std::size_t c = 0; c < text.columns.cols(); ++c) {
        features << ',' << F(text.columns.values()(static_cast<Eigen::Index>(r),
                                                   static_cast<Eigen::Index>(c)));
      }
      features << '\n';
    }
    WriteReport("group_features.csv", features.str());

    std::ostringstream assign;
    assign << "doc_id,date,group,polarity\n";
    for (const auto& d : Docs()) {
      assign << d.doc_id << ',' << d.date.ToString() << ','
             << grouping::AssignGroup(d.vector, prepared.grouping) << ','
             << F(grouping::SentimentPolarity(d)) << '\n';
    }
    WriteReport("group_assignments.csv", assign.str());
  }

  void TrainCmd() {
    const auto window = Window();
    const auto prepared = Prepare(window, cfg_.groups);
    Log("training " + std::string(forecast::VariantName(cfg_.train.variant)) + " on " +
        std::to_string(prepared.sequences.train.size()) + " sequences");
    const auto run = eval::RunVariant(prepared, cfg_.train, cfg_.seed);
    const std::string v(forecast::VariantName(cfg_.train.variant));
    Write("model_" + v + ".json", forecast::ModelToJson(run.trained.model).dump() + "\n");
    WriteReport("training_log_" + v + ".csv", forecast::TrainingLogCsv(run.trained.log));
    WriteReport("metrics_" + v + ".csv", MetricsRows({run.metrics}));
  }

  static std::string MetricsRows(std::initializer_list<eval::MetricReport> rows) {
    std::ostringstream out;
    out << "window,variant,mae,rmse,mape,r2,n\n";
    for (const auto& m : rows) {
      out << m.window_id << ',' << m.variant << ',' << F(m.mae) << ',' << F(m.rmse) << ','
          << F(m.mape) << ',' << F(m.r2) << ',' << m.n << '\n';
    }
    return out.str();
  }

  void PredictCmd() {
    const auto model = LoadModel(cfg_.train.variant);
    const auto prepared = PrepareFor(model);
    const auto predicted =
        forecast::PredictPairs(model, prepared.sequences, prepared.sequences.test);
    std::ostringstream csv;
    csv << "date,input_end,actual,predicted\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      const auto& p = prepared.sequences.test[i];
      csv << p.target_date.ToString() << ',' << p.input_end.ToString() << ','
          << F(p.target_price) << ',' << F(predicted[i]) << '\n';
    }
    WriteReport("predictions_" + std::string(forecast::VariantName(model.config.variant)) + ".csv",
                csv.str());
  }

  void Explain() {
    const auto model = LoadModel(forecast::Variant::kFull);
    const auto prepared = PrepareFor(model);
    const auto groups = Partition(model.manifest);
    const auto& test = prepared.sequences.test;
    std::size_t count = test.size();
    if (cfg_.shap.instances > 0) count = std::min(count, static_cast<std::size_t>(cfg_.shap.instances));
    if (count == 0) Fail(ErrorKind::kEmptyWindow, "no test instances to explain");

    const auto baseline_hash = Checksum(std::span<const double>(prepared.baseline.data(),
                                                                static_cast<std::size_t>(prepared.baseline.size())));
    std::ostringstream hash;
    hash << std::hex << baseline_hash;

    std::ostringstream jsonl;
    std::ostringstream csv;
    csv << "date";
    for (const auto& g : groups.groups) csv << ",phi_" << g.name;
    csv << ",v_empty,v_full,efficiency_residual,evaluations\n";
    std::vector<double> mean_abs(groups.size(), 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const auto& pair = test[i];
      shap::ValueFunctionSpec spec{prepared.baseline, pair.input, prepared.sequences.columns,
                                   cfg_.shap.mode, pair.target_price};
      const auto a = cfg_.shap.method == "exact"
                         ? shap::ExactGroupShap(spec, groups, model)
                         : shap::SampledShap(spec, groups, model,
                                             {cfg_.shap.budget, DeriveSeed(cfg_.seed, "explain", i), false});
      worst = std::max(worst, a.efficiency_residual);
      auto j = shap::AttributionToJson(a, groups);
      j["date"] = pair.target_date.ToString();
      j["input_end"] = pair.input_end.ToString();
      j["actual"] = pair.target_price;
      j["spec"] = json{{"baseline_checksum", hash.str()},
                       {"mode", shap::ValueModeName(cfg_.shap.mode)},
                       {"method", cfg_.shap.method},
                       {"seed", cfg_.seed},
                       {"window", model.window_id}};
      jsonl << j.dump() << '\n';
      csv << pair.target_date.ToString();
      for (std::size_t g = 0; g < groups.size(); ++g) {
        csv << ',' << F(a.phi[g]);
        mean_abs[g] += std::abs(a.phi[g]) / static_cast<double>(count);
      }
      csv << ',' << F(a.v_empty) << ',' << F(a.v_full) << ',' << F(a.efficiency_residual) << ','
          << a.evaluations << '\n';
    }
    Write("attributions.jsonl", jsonl.str());
    WriteReport("attribution.csv", csv.str());
    std::ostringstream agg;
    agg << "group,mean_abs_phi,instances\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      agg << groups.groups[g].name << ',' << F(mean_abs[g]) << ',' << count << '\n';
    }
    WriteReport("attribution_aggregate.csv", agg.str());
    Log("max efficiency residual " + F(worst));
  }

  void Evaluate() {
    const auto plan = Plan();
    eval::BacktestOptions opts{WindowOpts(cfg_.groups), cfg_.train};
    const auto report = eval::RollingBacktest(Base(), Docs(), plan, opts,
                                              [this](const std::string& m) { Log(m); });
    WriteReport("table3.csv", eval::BacktestTableCsv(report));
    WriteReport("metrics.csv", eval::MetricsCsv(report));
    WriteReport("plot.csv", eval::PlotCsv(report));
  }

  void Sensitivity() {
    const auto plan = Plan();
    eval::BacktestOptions opts{WindowOpts(cfg_.groups), cfg_.train};
    const auto report = eval::SensitivitySweep(Base(), Docs(), plan, cfg_.sensitivity_groups, opts,
                                               [this](const std::string& m) { Log(m); });
    WriteReport("table1.csv", eval::SensitivityCsv(report));
  }

  void Bench() {
    forecast::ForecastModel model;
    eval::PreparedWindow prepared;
    if (!cfg_.model.empty()) {
      model = LoadModel(forecast::Variant::kFull);
      prepared = PrepareFor(model);
    } else {
      prepared = Prepare(Window(), cfg_.groups);
      auto config = cfg_.train;
      config.variant = forecast::Variant::kFull;
      Log("training full model for the benchmark");
      model = eval::RunVariant(prepared, config, cfg_.seed).trained.model;
    }
    const auto groups = Partition(model.manifest);
    const auto units = cfg_.shap.token_units == "cells"
                           ? shap::CellUnits(prepared.sequences.columns, prepared.sequences.steps)
                           : shap::SingletonUnits(model.manifest.AllColumns());
    std::vector<shap::ValueFunctionSpec> instances;
    for (const auto& pair : prepared.sequences.test) {
      if (instances.size() >= static_cast<std::size_t>(cfg_.shap.bench_instances)) break;
      instances.push_back({prepared.baseline, pair.input, prepared.sequences.columns,
                           cfg_.shap.mode, pair.target_price});
    }
    Log("timing " + std::to_string(units.size()) + " token units vs " +
        std::to_string(groups.size()) + " groups");
    const auto report = eval::BenchAttribution(model, instances, groups, units,
                                               {cfg_.shap.budget, DeriveSeed(cfg_.seed, "bench")});
    WriteReport("table2.csv", eval::BenchCsv(report));
    const auto coalitions = [](std::size_t n) {
      const auto c = shap::CountCoalitions(static_cast<int>(n));
      return c.exact;
    };
    WriteJson("bench.json",
              json{{"token_units", report.token.units},
                   {"token_coalitions", coalitions(report.token.units)},
                   {"group_units", report.group.units},
                   {"group_coalitions", coalitions(report.group.units)},
                   {"token_evaluations", report.token.evaluations},
                   {"group_evaluations", report.group.evaluations},
                   {"token_seconds", report.token.seconds},
                   {"group_seconds", report.group.seconds},
                   {"reduction_pct", report.group.reduction_pct}});
  }

  void Synth() {
    const auto data = synth::Generate(cfg_.synth);
    synth::WriteCorpus(data, cfg_.synth, cfg_.out);
    out_ << "wrote synthetic corpus to " << cfg_.out << '\n';
  }

  std::string command_;
  RunConfig cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::optional<market::AlignedDataset> base_;
  std::optional<std::vector<grouping::DocumentEmbedding>> docs_;
};

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GroupSHAP forecasting and attribution toolkit", "gshap"};
  app.set_version_flag("--version", std::string("gshap ") + kVersion);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> test_year;
  app.add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "root seed (overrides config)");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--test-year", test_year, "window test year (overrides config)");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"ingest", "build the aligned feature dataset CSV"},
      {"group", "fit the semantic grouping and export group features"},
      {"train", "train one variant on one window"},
      {"predict", "predict the test year with a trained model"},
      {"explain", "group Shapley attributions for test dates"},
      {"evaluate", "rolling backtest of both variants"},
      {"sensitivity", "sweep the number of semantic groups"},
      {"bench-shap", "time group-exact vs token-sampled attribution"},
      {"synth", "generate a synthetic corpus"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : ExitCodeFor(ErrorKind::kUsage);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig config;
    if (!config_path.empty()) {
      json j;
      try {
        j = json::parse(ReadFile(config_path));
      } catch (const json::parse_error& e) {
        Fail(ErrorKind::kConfig, "config '" + config_path + "' is not valid JSON: " + e.what());
      }
      config = RunConfigFromJson(j);
    }
    if (seed) config.seed = *seed;
    if (out_dir) config.out = *out_dir;
    if (test_year) config.test_year = *test_year;
    Runner(command, std::move(config), out, err).Run();
    return 0;
  } catch (const Error& e) {
    err << "gshap " << command << ": " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "gshap " << command << ": " << e.what() << '\n';
    return ExitCodeFor(ErrorKind::kIo);
  }
}

}  // namespace gshap::cli
