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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "gshap/errors.hpp"
#include "gshap/gru_forecaster.hpp"
#include "gshap/util.hpp"

namespace gshap::forecast {

using nlohmann::json;

std::string_view VariantName(Variant variant) {
  return variant == Variant::kTechOnly ? "tech_only" : "full";
}

Variant ParseVariant(std::string_view name) {
  if (name == "tech_only" || name == "TECH_ONLY" || name == "tech") return Variant::kTechOnly;
  if (name == "full" || name == "FULL") return Variant::kFull;
  Fail(ErrorKind::kConfig, "unknown variant '" + std::string(name) + "'");
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) Fail(ErrorKind::kConfig, what);
  };
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(steps > 0, "steps must be positive");
  require(epochs > 0, "epochs must be positive");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must be in [0,1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(hidden_size > 0, "hidden_size must be positive");
  require(layers > 0, "layers must be positive");
  for (int w : head_hidden) require(w > 0, "head widths must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0,1)");
}

json TrainConfigToJson(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
              {"steps", c.steps},                 {"epochs", c.epochs},
              {"weight_decay", c.weight_decay},   {"beta1", c.beta1},
              {"beta2", c.beta2},                 {"epsilon", c.epsilon},
              {"seed", c.seed},                   {"variant", VariantName(c.variant)},
              {"hidden_size", c.hidden_size},     {"layers", c.layers},
              {"head_hidden", c.head_hidden},     {"dropout", c.dropout}};
}

TrainConfig TrainConfigFromJson(const json& j) {
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "steps") c.steps = value.get<int>();
      else if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "weight_decay") c.weight_decay = value.get<double>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "variant") c.variant = ParseVariant(value.get<std::string>());
      else if (key == "hidden_size") c.hidden_size = value.get<int>();
      else if (key == "layers") c.layers = value.get<int>();
      else if (key == "head_hidden") c.head_hidden = value.get<std::vector<int>>();
      else if (key == "dropout") c.dropout = value.get<double>();
      else Fail(ErrorKind::kConfig, "unknown training key '" + key + "'");
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("training config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::vector<std::string> Manifest::AllColumns() const {
  std::vector<std::string> all = tech_columns;
  all.insert(all.end(), text_columns.begin(), text_columns.end());
  return all;
}

void Manifest::Validate() const {
  if (tech_columns.empty()) Fail(ErrorKind::kSchema, "manifest has no technical columns");
  std::set<std::string> seen;
  for (const auto& c : AllColumns()) {
    if (!seen.insert(c).second) {
      Fail(ErrorKind::kSchema, "column '" + c + "' appears twice in the manifest");
    }
  }
}

InputBinding ForecastModel::Bind(std::span<const std::string> columns) const {
  auto find = [&](const std::string& name) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
      Fail(ErrorKind::kSchema, "input is missing model column '" + name + "'");
    }
    return static_cast<Index>(it - columns.begin());
  };
  InputBinding b;
  for (const auto& c : manifest.tech_columns) b.tech.push_back(find(c));
  if (layout.text) {
    for (const auto& c : manifest.text_columns) b.text.push_back(find(c));
  }
  return b;
}

ForecastModel InitModel(const TrainConfig& config, const Manifest& manifest,
                        const market::ScalerParams& scaler) {
  config.Validate();
  manifest.Validate();
  ForecastModel model;
  model.config = config;
  model.manifest = manifest;
  if (config.variant == Variant::kTechOnly) model.manifest.text_columns.clear();
  else if (manifest.text_columns.empty()) {
    Fail(ErrorKind::kSchema, "FULL variant needs text-derived columns");
  }
  model.scaler = scaler;
  model.layout = NetworkLayout::Make(static_cast<Index>(model.manifest.tech_columns.size()),
                                     static_cast<Index>(model.manifest.text_columns.size()),
                                     config);
  model.params.assign(model.layout.total, 0.0);

  std::mt19937_64 rng(DeriveSeed(config.seed, "init"));
  auto fill = [&](std::size_t offset, std::size_t count, Index fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < count; ++i) model.params[offset + i] = dist(rng);
  };
  auto init_encoder = [&](const EncoderLayout& e) {
    std::size_t off = e.offset;
    for (const auto& s : e.layers) {
      const auto H = static_cast<std::size_t>(s.hidden);
      const auto in = static_cast<std::size_t>(s.input);
      fill(off, 3 * H * in, s.input);
      fill(off + 3 * H * in, 3 * H * H, s.hidden);
      fill(off + 3 * H * (in + H), 3 * H, s.hidden);
      off += s.size();
    }
  };
  init_encoder(model.layout.tech);
  if (model.layout.text) init_encoder(*model.layout.text);
  std::size_t off = model.layout.head.offset;
  for (const auto& s : model.layout.head.layers) {
    fill(off, s.size(), s.in);
    off += s.size();
  }
  return model;
}

BatchInputs MakeBatch(const ForecastModel& model, const InputBinding& binding,
                      std::span<const Mat* const> inputs) {
  BatchInputs batch;
  batch.size = static_cast<Index>(inputs.size());
  if (inputs.empty()) return batch;
  const Index steps = inputs.front()->rows();
  if (steps != model.config.steps) {
    Fail(ErrorKind::kDimension, "sequence has " + std::to_string(steps) + " rows, model expects " +
                                    std::to_string(model.config.steps));
  }
  auto gather = [&](const std::vector<Index>& cols, std::vector<Mat>& out) {
    out.assign(static_cast<std::size_t>(steps),
               Mat(static_cast<Index>(cols.size()), batch.size));
    for (Index b = 0; b < batch.size; ++b) {
      const Mat& seq = *inputs[static_cast<std::size_t>(b)];
      if (seq.rows() != steps) Fail(ErrorKind::kDimension, "ragged sequence batch");
      for (Index t = 0; t < steps; ++t) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
          out[static_cast<std::size_t>(t)](static_cast<Index>(c), b) = seq(t, cols[c]);
        }
      }
    }
  };
  gather(binding.tech, batch.tech);
  if (model.layout.text) gather(binding.text, batch.text);
  return batch;
}

LossAndGradients ComputeLossAndGradients(const ForecastModel& model, const InputBinding& binding,
                                         std::span<const market::SupervisedPair* const> batch,
                                         bool training, std::mt19937_64* rng,
                                         std::size_t batch_index) {
  if (batch.empty()) Fail(ErrorKind::kInsufficientData, "empty training batch");
  std::vector<const Mat*> inputs;
  Vec target(static_cast<Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    inputs.push_back(&batch[i]->input);
    target(static_cast<Index>(i)) = batch[i]->target_scaled;
  }
  const BatchInputs x = MakeBatch(model, binding, inputs);
  const Network net(model.layout);
  ForwardCache cache;
  const Vec pred = net.Forward(model.params, x, training, rng, &cache);
  for (Index i = 0; i < pred.size(); ++i) {
    if (!std::isfinite(pred(i))) {
      Fail(ErrorKind::kNumerical, "non-finite prediction in batch " + std::to_string(batch_index) +
                                      " at sample " + std::to_string(i));
    }
  }
  const Vec err = pred - target;
  const double n = static_cast<double>(batch.size());
  LossAndGradients out;
  out.loss = err.squaredNorm() / n;
  out.gradients.assign(model.params.size(), 0.0);
  net.Backward(model.params, cache, (2.0 / n) * err, out.gradients);
  return out;
}

void AdamWStep(std::span<double> params, std::span<const double> grads, AdamWState& state,
               const AdamWConfig& config) {
  if (params.size() != grads.size()) {
    Fail(ErrorKind::kDimension, "AdamW parameter/gradient size mismatch");
  }
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= config.learning_rate *
                 (m_hat / (std::sqrt(v_hat) + config.epsilon) + config.weight_decay * params[i]);
  }
}

TrainResult Train(const market::SequenceSet& sequences, const Manifest& manifest,
                  const market::ScalerParams& scaler, const TrainConfig& config,
                  std::string window_id) {
  if (sequences.train.empty()) {
    Fail(ErrorKind::kInsufficientData, "no training pairs for window " + window_id);
  }
  if (sequences.steps != config.steps) {
    Fail(ErrorKind::kConfig, "sequences use " + std::to_string(sequences.steps) +
                                 " steps but the config asks for " + std::to_string(config.steps));
  }
  TrainResult result{InitModel(config, manifest, scaler), {}};
  ForecastModel& model = result.model;
  model.window_id = std::move(window_id);
  const InputBinding binding = model.Bind(sequences.columns);

  std::mt19937_64 shuffle_rng(DeriveSeed(config.seed, "shuffle"));
  std::mt19937_64 dropout_rng(DeriveSeed(config.seed, "dropout"));
  const AdamWConfig adam{config.learning_rate, config.beta1, config.beta2, config.epsilon,
                         config.weight_decay};
  AdamWState state;

  std::vector<std::size_t> order(sequences.train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const market::SupervisedPair*> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < order.size();
         first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t last =
          std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = first; i < last; ++i) batch.push_back(&sequences.train[order[i]]);
      LossAndGradients lg;
      try {
        lg = ComputeLossAndGradients(model, binding, batch, true, &dropout_rng, batch_index++);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kNumerical) throw;
        Fail(ErrorKind::kNumerical,
             "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      if (!std::isfinite(lg.loss)) {
        Fail(ErrorKind::kNumerical, "training diverged at epoch " + std::to_string(epoch));
      }
      total += lg.loss * static_cast<double>(batch.size());
      AdamWStep(model.params, lg.gradients, state, adam);
    }
    const double mean = total / static_cast<double>(order.size());
    if (!std::isfinite(mean)) {
      Fail(ErrorKind::kNumerical, "training diverged at epoch " + std::to_string(epoch));
    }
    const std::chrono::duration<double, std::milli> elapsed =
        std::chrono::steady_clock::now() - start;
    result.log.push_back({epoch, mean, elapsed.count()});
  }
  return result;
}

Vec PredictScaled(const ForecastModel& model, std::span<const std::string> columns,
                  std::span<const Mat* const> inputs) {
  const InputBinding binding = model.Bind(columns);
  const Network net(model.layout);
  Vec out(static_cast<Index>(inputs.size()));
  constexpr std::size_t kChunk = 256;
  for (std::size_t first = 0; first < inputs.size(); first += kChunk) {
    const std::size_t n = std::min(kChunk, inputs.size() - first);
    const BatchInputs x = MakeBatch(model, binding, inputs.subspan(first, n));
    out.segment(static_cast<Index>(first), static_cast<Index>(n)) =
        net.Forward(model.params, x, false, nullptr, nullptr);
  }
  return out;
}

double Predict(const ForecastModel& model, std::span<const std::string> columns,
               const Mat& sequence) {
  const Mat* input = &sequence;
  const Vec scaled = PredictScaled(model, columns, std::span<const Mat* const>(&input, 1));
  return market::InvertValue(scaled(0), model.scaler.Range(market::kTargetColumn));
}

std::vector<double> PredictPairs(const ForecastModel& model, const market::SequenceSet& set,
                                 std::span<const market::SupervisedPair> pairs) {
  std::vector<const Mat*> inputs;
  for (const auto& p : pairs) inputs.push_back(&p.input);
  const Vec scaled = PredictScaled(model, set.columns, inputs);
  const std::vector<double> values(scaled.data(), scaled.data() + scaled.size());
  return market::InvertMinMax(values, model.scaler, market::kTargetColumn);
}

std::string TrainingLogCsv(std::span<const EpochLog> log) {
  std::string out = "epoch,mean_loss,wall_ms\n";
  for (const auto& e : log) {
    out += std::to_string(e.epoch) + "," + FormatDouble(e.mean_loss) + "," +
           FormatDouble(e.wall_ms) + "\n";
  }
  return out;
}

json ScalerToJson(const market::ScalerParams& scaler) {
  json cols = json::array();
  for (std::size_t i = 0; i < scaler.columns.size(); ++i) {
    cols.push_back({{"name", scaler.columns[i]},
                    {"min", scaler.ranges[i].min},
                    {"max", scaler.ranges[i].max}});
  }
  return {{"fitted_on", scaler.fitted_on}, {"columns", std::move(cols)}};
}

market::ScalerParams ScalerFromJson(const json& j) {
  market::ScalerParams s;
  s.fitted_on = j.at("fitted_on").get<std::string>();
  for (const auto& c : j.at("columns")) {
    s.columns.push_back(c.at("name").get<std::string>());
    s.ranges.push_back({c.at("min").get<double>(), c.at("max").get<double>()});
  }
  return s;
}

namespace {
constexpr const char* kModelFormat = "gshap-forecast-model";
constexpr int kModelVersion = 1;
}  // namespace

json ModelToJson(const ForecastModel& model) {
  return {{"format", kModelFormat},
          {"version", kModelVersion},
          {"window", model.window_id},
          {"config", TrainConfigToJson(model.config)},
          {"manifest",
           {{"tech", model.manifest.tech_columns}, {"text", model.manifest.text_columns}}},
          {"scaler", ScalerToJson(model.scaler)},
          {"params", model.params}};
}

ForecastModel ModelFromJson(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormat ||
        j.at("version").get<int>() != kModelVersion) {
      Fail(ErrorKind::kSchema, "not a version-1 forecast model file");
    }
    Manifest manifest;
    manifest.tech_columns = j.at("manifest").at("tech").get<std::vector<std::string>>();
    manifest.text_columns = j.at("manifest").at("text").get<std::vector<std::string>>();
    ForecastModel model = InitModel(TrainConfigFromJson(j.at("config")), manifest,
                                    ScalerFromJson(j.at("scaler")));
    model.window_id = j.at("window").get<std::string>();
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != model.layout.total) {
      Fail(ErrorKind::kSchema, "model file has " + std::to_string(params.size()) +
                                   " parameters, layout needs " +
                                   std::to_string(model.layout.total));
    }
    model.params = std::move(params);
    return model;
  } catch (const json::exception& e) {
    Fail(ErrorKind::kSchema, std::string("model json: ") + e.what());
  }
}

}  // namespace gshap::forecast
