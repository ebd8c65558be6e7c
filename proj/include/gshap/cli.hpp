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

#ifndef GSHAP_CLI_HPP_
#define GSHAP_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gshap/gru_forecaster.hpp"
#include "gshap/market_data.hpp"
#include "gshap/shapley.hpp"
#include "gshap/synth.hpp"

namespace gshap::cli {

inline constexpr const char* kVersion = "1.0.0";

struct DataPaths {
  std::string prices = "out/prices.csv";
  std::vector<std::string> series{"out/macro.csv", "out/bitcoin.csv"};
  std::string embeddings = "out/embeddings.jsonl";
  std::string calendar;  // empty: use the price dates
};

struct ShapConfig {
  shap::ValueMode mode = shap::ValueMode::kPrediction;
  std::string method = "exact";       // exact | sampled
  std::string partition = "semantic"; // semantic | semantic+context | columns
  std::string token_units = "cells";  // cells | columns
  int budget = 10;
  int instances = 0;        // explain: 0 means every test date
  int bench_instances = 1;
};

struct RunConfig {
  DataPaths data;
  std::string out = "out";
  std::uint64_t seed = 0;
  int groups = 5;
  std::optional<int> test_year;  // window for group/train/predict/explain/bench-shap
  std::string model;             // model JSON for predict/explain/bench-shap
  int max_windows = 0;           // evaluate/sensitivity: 0 means every window
  std::vector<int> sensitivity_groups{1, 2, 3, 4, 5, 6, 7, 8, 9};
  market::IndicatorConfig indicators;
  forecast::TrainConfig train;
  ShapConfig shap;
  synth::SynthSpec synth;
};

// Unknown keys raise kConfig.
RunConfig RunConfigFromJson(const nlohmann::json& json);
// Resolved config without `out`, so reports do not depend on where they land.
nlohmann::json RunConfigToJson(const RunConfig& config);

// Full command line entry point. Returns the process exit status.
int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gshap::cli

#endif  // GSHAP_CLI_HPP_
