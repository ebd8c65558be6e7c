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

#ifndef GSHAP_SYNTH_HPP_
#define GSHAP_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "gshap/market_data.hpp"
#include "gshap/semantic_grouping.hpp"

namespace gshap::synth {

// Synthetic corpus: a weekday price series whose next-day log return is
// partly driven by the daily mean polarity of planted document groups.
struct SynthSpec {
  int start_year = 2015;
  int years = 10;
  int features = 7;          // extra series; the last one is a daily "bitcoin" series
  int groups = 5;            // planted directions
  double separation_deg = 90.0;
  double noise_deg = 5.0;    // max angle between a document and its direction
  int dim = 16;
  int docs_per_group = 1;    // per trading day
  double snr = 1.0;          // signal variance / noise variance of the return
  double volatility = 0.015; // daily log-return scale
  double mean_reversion = 0.02;
  double start_price = 2000.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

nlohmann::json SynthSpecToJson(const SynthSpec& spec);
// Unknown keys raise kConfig.
SynthSpec SynthSpecFromJson(const nlohmann::json& json);

struct SynthData {
  market::PriceSeries target;
  std::vector<market::PriceSeries> extra;  // macro_1.., then bitcoin
  std::vector<grouping::DocumentEmbedding> docs;
  std::vector<int> doc_groups;             // planted group per document
  Eigen::MatrixXd directions;              // groups x dim, unit rows
  std::vector<double> betas;
};

SynthData Generate(const SynthSpec& spec);

// prices.csv, macro.csv (when features > 1), bitcoin.csv, embeddings.jsonl, truth.json
void WriteCorpus(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir);

// Fraction of documents whose cluster's majority planted group matches their own.
double Purity(std::span<const int> planted, std::span<const int> assigned);

}  // namespace gshap::synth

#endif  // GSHAP_SYNTH_HPP_
