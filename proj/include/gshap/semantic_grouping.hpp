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

#ifndef GSHAP_SEMANTIC_GROUPING_HPP_
#define GSHAP_SEMANTIC_GROUPING_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gshap/date.hpp"
#include "gshap/market_data.hpp"
#include "json.hpp"

namespace gshap::grouping {

// One text item with its embedding and sentiment probabilities.
struct DocumentEmbedding {
  std::string doc_id;
  Date date;
  Eigen::VectorXd vector;
  double p_pos = 0.0;
  double p_neg = 0.0;
  double p_neu = 1.0;
};

// Reads one JSON object per line:
//   {"doc_id": str, "date": "YYYY-MM-DD", "vector": [...], "p_pos": f,
//    "p_neg": f, "p_neu": f}
// All vectors must share a dimension; probabilities must lie in [0,1] and sum
// to 1 within 1e-6.
std::vector<DocumentEmbedding> LoadEmbeddingsJsonl(const std::filesystem::path& path);
std::string EmbeddingsToJsonl(std::span<const DocumentEmbedding> docs);

// Scales every vector to unit norm. Zero vectors raise kDegenerate naming the doc.
std::vector<DocumentEmbedding> NormalizeEmbeddings(std::vector<DocumentEmbedding> docs);

// Spherical k-means result: k unit-norm centroids (rows) plus fit diagnostics.
struct GroupingModel {
  int k = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd centroids;  // k x dim

  // Within-cluster cosine objective after each assignment pass (not exported).
  std::vector<double> objective_trace;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iterations = 100;
};

// Rows of `points` must be unit vectors. Seeding is greedy k-means++ on the
// cosine distance 1 - <x, c>, driven by `seed`; Lloyd iterations stop when
// assignments no longer change or after max_iterations. Fewer distinct
// points than k raises kUnderDetermined.
GroupingModel ClusterCosineKMeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                  const KMeansOptions& options = {});
GroupingModel ClusterCosineKMeans(std::span<const DocumentEmbedding> docs, int k,
                                  std::uint64_t seed, const KMeansOptions& options = {});

// argmax_g <vector, centroid_g>; ties go to the lowest index.
int AssignGroup(const Eigen::Ref<const Eigen::VectorXd>& vector, const GroupingModel& model);

// p_pos - p_neg.
double SentimentPolarity(const DocumentEmbedding& doc);

struct DailyGroupFeatures {
  Date date;
  std::vector<double> weights;  // group_0_weight ... group_{k-1}_weight
};

// Mean polarity of the day's documents per assigned group; groups without a
// document read 0.
DailyGroupFeatures DailyGroupWeights(std::span<const DocumentEmbedding> docs, Date date,
                                     const GroupingModel& model);

std::string GroupColumnName(int group);
inline constexpr const char* kSentimentColumns[] = {"sent_pos", "sent_neg", "sent_neu"};

struct GroupFeatureSeries {
  // group_g_weight for every g, then sent_pos, sent_neg, sent_neu.
  market::FeatureMatrix columns;
  // Documents dated before the first or after the last calendar day.
  std::size_t dropped = 0;
};

// One row per calendar day. Documents on non-trading days inside the calendar
// span count toward the next trading day. Days without documents read 0 in
// every column.
GroupFeatureSeries BuildGroupFeatureSeries(std::span<const DocumentEmbedding> docs,
                                           const GroupingModel& model,
                                           std::span<const Date> calendar);

// Documents whose date year lies in [first_year, last_year].
std::vector<DocumentEmbedding> DocumentsInYears(std::span<const DocumentEmbedding> docs,
                                                int first_year, int last_year);

nlohmann::json GroupingModelToJson(const GroupingModel& model);
GroupingModel GroupingModelFromJson(const nlohmann::json& json);

}  // namespace gshap::grouping

#endif  // GSHAP_SEMANTIC_GROUPING_HPP_
