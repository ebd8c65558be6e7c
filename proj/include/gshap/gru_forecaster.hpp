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

#ifndef GSHAP_GRU_FORECASTER_HPP_
#define GSHAP_GRU_FORECASTER_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gshap/market_data.hpp"
#include "json.hpp"

namespace gshap::forecast {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// TECH_ONLY feeds technical columns to a single encoder; FULL adds a second
// encoder over the text-derived columns (group weights and sentiment scores).
enum class Variant { kTechOnly, kFull };

std::string_view VariantName(Variant variant);
Variant ParseVariant(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 32;
  int steps = 10;
  int epochs = 50;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  Variant variant = Variant::kFull;
  int hidden_size = 256;
  int layers = 2;
  std::vector<int> head_hidden{128};
  double dropout = 0.1;

  void Validate() const;
};

nlohmann::json TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& json);

// --- GRU layer -------------------------------------------------------------

// Parameters of one GRU layer, stacked by gate: rows [0,H) update gate z,
// [H,2H) reset gate r, [2H,3H) candidate. Storage order: W (3H x in),
// U (3H x H), b (3H), all column-major.
struct GruLayerShape {
  Index input = 0;
  Index hidden = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(3 * hidden * (input + hidden + 1));
  }
};

template <bool Mutable>
struct GruLayerView {
  using Scalar = std::conditional_t<Mutable, double, const double>;
  using MatMap = Eigen::Map<std::conditional_t<Mutable, Mat, const Mat>>;
  using VecMap = Eigen::Map<std::conditional_t<Mutable, Vec, const Vec>>;

  GruLayerView(Scalar* data, GruLayerShape s)
      : shape(s),
        w(data, 3 * s.hidden, s.input),
        u(data + 3 * s.hidden * s.input, 3 * s.hidden, s.hidden),
        b(data + 3 * s.hidden * (s.input + s.hidden), 3 * s.hidden) {}

  GruLayerShape shape;
  MatMap w;
  MatMap u;
  VecMap b;
};

using GruLayerRef = GruLayerView<false>;
using GruLayerMut = GruLayerView<true>;

// Owning storage for a single layer.
struct GruLayerParams {
  GruLayerShape shape;
  std::vector<double> data;

  explicit GruLayerParams(GruLayerShape s) : shape(s), data(s.size(), 0.0) {}
  GruLayerRef view() const { return GruLayerRef(data.data(), shape); }
  GruLayerMut view() { return GruLayerMut(data.data(), shape); }
};

// z = s(Wz x + Uz h + bz); r = s(Wr x + Ur h + br);
// c = tanh(Wh x + Uh (r*h) + bh); h' = (1-z)*h + z*c.
Vec GruCellForward(const Vec& x, const Vec& h, const GruLayerRef& layer);

// Runs the stacked layers over `sequence` (steps x input) from a zero state
// and returns the top layer's hidden state after the last step.
Vec EncodeSequence(const Mat& sequence, std::span<const GruLayerRef> layers);

// --- network layout ---------------------------------------------------------

struct EncoderLayout {
  std::vector<GruLayerShape> layers;
  std::size_t offset = 0;

  std::size_t size() const;
  Index hidden() const { return layers.back().hidden; }
  std::vector<GruLayerRef> View(std::span<const double> params) const;
};

// out x in weight, then bias.
struct LinearShape {
  Index in = 0;
  Index out = 0;
  std::size_t size() const { return static_cast<std::size_t>(out * (in + 1)); }
};

struct HeadLayout {
  std::vector<LinearShape> layers;
  std::size_t offset = 0;
  double dropout = 0.0;

  std::size_t size() const;
};

// Flat parameter layout: tech encoder, optional text encoder, fusion head.
struct NetworkLayout {
  EncoderLayout tech;
  std::optional<EncoderLayout> text;
  HeadLayout head;
  std::size_t total = 0;

  static NetworkLayout Make(Index tech_inputs, Index text_inputs, const TrainConfig& config);
};

// Per-step batched inputs: element t is (features x batch).
struct BatchInputs {
  std::vector<Mat> tech;
  std::vector<Mat> text;
  Index size = 0;
};

struct LayerStepCache {
  Mat x;
  Mat h_prev;
  Mat z;
  Mat r;
  Mat c;
};

// [layer][step] activations retained for backpropagation through time.
using EncoderCache = std::vector<std::vector<LayerStepCache>>;

struct ForwardCache {
  EncoderCache tech;
  EncoderCache text;
  std::vector<Mat> head_inputs;  // input to each linear layer
  std::vector<Mat> head_pre;     // pre-activation of each hidden linear layer
  std::vector<Mat> dropout;      // scaled keep-masks, empty when not training
};

// Batched forward/backward over a flat parameter vector.
class Network {
 public:
  explicit Network(NetworkLayout layout) : layout_(std::move(layout)) {}

  // Returns one scaled prediction per batch column. Dropout is active only
  // when `training` is set, with masks drawn from `rng`.
  Vec Forward(std::span<const double> params, const BatchInputs& inputs, bool training,
              std::mt19937_64* rng, ForwardCache* cache) const;

  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void Backward(std::span<const double> params, const ForwardCache& cache, const Vec& d_output,
                std::span<double> grads) const;

  // Head only, for fixed encoder outputs. `h_text` may be empty (TECH_ONLY).
  double FusionForward(std::span<const double> params, const Vec& h_tech, const Vec& h_text,
                       bool training, std::mt19937_64* rng) const;

 private:
  NetworkLayout layout_;
};

// --- model ------------------------------------------------------------------

// Column partition: technical columns feed the tech encoder, text-derived
// columns the text encoder (FULL only). Lists never overlap.
struct Manifest {
  std::vector<std::string> tech_columns;
  std::vector<std::string> text_columns;

  std::vector<std::string> AllColumns() const;
  void Validate() const;
};

// Positions of the manifest columns inside an input matrix.
struct InputBinding {
  std::vector<Index> tech;
  std::vector<Index> text;
};

struct ForecastModel {
  TrainConfig config;
  Manifest manifest;
  market::ScalerParams scaler;
  NetworkLayout layout;
  std::vector<double> params;
  std::string window_id;

  // Throws kSchema when a manifest column is missing from `columns`.
  InputBinding Bind(std::span<const std::string> columns) const;
};

// Fresh model with uniform(+-1/sqrt(fan_in)) weights drawn from the config seed.
ForecastModel InitModel(const TrainConfig& config, const Manifest& manifest,
                        const market::ScalerParams& scaler);

BatchInputs MakeBatch(const ForecastModel& model, const InputBinding& binding,
                      std::span<const Mat* const> inputs);

struct LossAndGradients {
  double loss = 0.0;
  std::vector<double> gradients;
};

// Mean squared error over the batch in scaled units plus its gradient with
// respect to every parameter. Non-finite predictions raise kNumerical naming
// `batch_index` and the offending sample.
LossAndGradients ComputeLossAndGradients(const ForecastModel& model, const InputBinding& binding,
                                         std::span<const market::SupervisedPair* const> batch,
                                         bool training, std::mt19937_64* rng,
                                         std::size_t batch_index = 0);

// --- optimizer --------------------------------------------------------------

struct AdamWConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p)
void AdamWStep(std::span<double> params, std::span<const double> grads, AdamWState& state,
               const AdamWConfig& config);

// --- training and inference -------------------------------------------------

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  ForecastModel model;
  std::vector<EpochLog> log;
};

// Fixed-epoch AdamW training on `sequences.train`. Batch order is reshuffled
// every epoch and dropout masks are drawn from seeded generators, so equal
// inputs give bit-identical parameters.
TrainResult Train(const market::SequenceSet& sequences, const Manifest& manifest,
                  const market::ScalerParams& scaler, const TrainConfig& config,
                  std::string window_id = {});

// Scaled head output for each input (steps x columns, scaled). No dropout.
Vec PredictScaled(const ForecastModel& model, std::span<const std::string> columns,
                  std::span<const Mat* const> inputs);

// Price-unit prediction: invert_minmax of the scaled head output.
double Predict(const ForecastModel& model, std::span<const std::string> columns,
               const Mat& sequence);
std::vector<double> PredictPairs(const ForecastModel& model, const market::SequenceSet& set,
                                 std::span<const market::SupervisedPair> pairs);

std::string TrainingLogCsv(std::span<const EpochLog> log);

nlohmann::json ScalerToJson(const market::ScalerParams& scaler);
market::ScalerParams ScalerFromJson(const nlohmann::json& json);
nlohmann::json ModelToJson(const ForecastModel& model);
ForecastModel ModelFromJson(const nlohmann::json& json);

}  // namespace gshap::forecast

#endif  // GSHAP_GRU_FORECASTER_HPP_
