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

#include "gshap/semantic_grouping.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gshap/errors.hpp"
#include "gshap/util.hpp"

namespace gshap::grouping {

using nlohmann::json;

namespace {

double ProbabilityField(const json& record, const char* key, const std::string& where) {
  if (!record.contains(key) || !record[key].is_number()) {
    Fail(ErrorKind::kSchema, where + ": missing numeric field '" + key + "'");
  }
  const double p = record[key].get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    Fail(ErrorKind::kIntegrity, where + ": " + key + " outside [0,1]");
  }
  return p;
}

std::size_t CountDistinctRows(const Eigen::MatrixXd& points) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

// Greedy k-means++ seeding on the distance 1 - cos.
Eigen::MatrixXd SeedCentroids(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  centroids.row(0) = points.row(pick(rng));
  Eigen::VectorXd closest =
      (1.0 - (points * centroids.row(0).transpose()).array()).cwiseMax(0.0).matrix();

  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index best = -1;
    double best_potential = 0.0;
    Eigen::VectorXd best_closest;
    for (int trial = 0; trial < trials; ++trial) {
      Eigen::Index candidate = -1;
      if (total > 0.0) {
        double target = unit(rng) * total;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (closest(i) <= 0.0) continue;
          candidate = i;
          target -= closest(i);
          if (target < 0.0) break;
        }
      } else {
        // Every remaining point coincides with a chosen centroid in cosine;
        // fall back to the first point that differs bitwise.
        for (Eigen::Index i = 0; i < n && candidate < 0; ++i) {
          bool fresh = true;
          for (int j = 0; j < c; ++j) {
            if (points.row(i) == centroids.row(j)) fresh = false;
          }
          if (fresh) candidate = i;
        }
      }
      if (candidate < 0) candidate = pick(rng);
      Eigen::VectorXd with_candidate =
          closest.cwiseMin((1.0 - (points * points.row(candidate).transpose()).array())
                               .cwiseMax(0.0)
                               .matrix());
      const double potential = with_candidate.sum();
      if (best < 0 || potential < best_potential) {
        best = candidate;
        best_potential = potential;
        best_closest = std::move(with_candidate);
      }
    }
    centroids.row(c) = points.row(best);
    closest = std::move(best_closest);
  }
  return centroids;
}

int ArgMaxRow(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (Eigen::Index g = 1; g < scores.size(); ++g) {
    if (scores(g) > scores(best)) best = static_cast<int>(g);
  }
  return best;
}

}  // namespace

std::vector<DocumentEmbedding> LoadEmbeddingsJsonl(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<DocumentEmbedding> docs;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + " line " + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      Fail(ErrorKind::kParse, where + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("doc_id") || !record.contains("date") ||
        !record.contains("vector") || !record["vector"].is_array()) {
      Fail(ErrorKind::kSchema, where + ": record needs doc_id, date and vector");
    }
    DocumentEmbedding doc;
    doc.doc_id = record["doc_id"].is_string() ? record["doc_id"].get<std::string>()
                                              : record["doc_id"].dump();
    doc.date = Date::Parse(record["date"].get<std::string>());
    const auto& vec = record["vector"];
    doc.vector.resize(static_cast<Eigen::Index>(vec.size()));
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (!vec[i].is_number()) Fail(ErrorKind::kParse, where + ": non-numeric vector entry");
      doc.vector(static_cast<Eigen::Index>(i)) = vec[i].get<double>();
    }
    if (dim < 0) dim = doc.vector.size();
    if (doc.vector.size() != dim || dim == 0) {
      Fail(ErrorKind::kDimension, where + ": vector dimension " +
                                      std::to_string(doc.vector.size()) + ", expected " +
                                      std::to_string(dim));
    }
    doc.p_pos = ProbabilityField(record, "p_pos", where);
    doc.p_neg = ProbabilityField(record, "p_neg", where);
    doc.p_neu = ProbabilityField(record, "p_neu", where);
    if (std::abs(doc.p_pos + doc.p_neg + doc.p_neu - 1.0) > 1e-6) {
      Fail(ErrorKind::kIntegrity, where + ": sentiment probabilities do not sum to 1");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string EmbeddingsToJsonl(std::span<const DocumentEmbedding> docs) {
  std::string out;
  for (const auto& d : docs) {
    json record;
    record["doc_id"] = d.doc_id;
    record["date"] = d.date.ToString();
    record["vector"] = std::vector<double>(d.vector.data(), d.vector.data() + d.vector.size());
    record["p_pos"] = d.p_pos;
    record["p_neg"] = d.p_neg;
    record["p_neu"] = d.p_neu;
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<DocumentEmbedding> NormalizeEmbeddings(std::vector<DocumentEmbedding> docs) {
  for (auto& d : docs) {
    const double norm = d.vector.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      Fail(ErrorKind::kDegenerate, "document '" + d.doc_id + "' has a zero embedding");
    }
    d.vector /= norm;
  }
  return docs;
}

GroupingModel ClusterCosineKMeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                  const KMeansOptions& options) {
  if (k < 1) Fail(ErrorKind::kConfig, "group count must be >= 1");
  const std::size_t distinct = CountDistinctRows(points);
  if (distinct < static_cast<std::size_t>(k)) {
    Fail(ErrorKind::kUnderDetermined, "need at least " + std::to_string(k) +
                                          " distinct vectors, got " + std::to_string(distinct));
  }
  const Eigen::Index n = points.rows();
  std::mt19937_64 rng(seed);

  GroupingModel model;
  model.k = k;
  model.dim = static_cast<int>(points.cols());
  model.seed = seed;
  model.centroids = SeedCentroids(points, k, rng);

  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd best_cos(n);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd scores = points * model.centroids.transpose();  // n x k
    bool changed = false;
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int g = ArgMaxRow(scores.row(i).transpose());
      if (g != assignment[static_cast<std::size_t>(i)]) changed = true;
      assignment[static_cast<std::size_t>(i)] = g;
      best_cos(i) = scores(i, g);
      objective += best_cos(i);
    }
    model.objective_trace.push_back(objective);
    model.iterations = iter + 1;
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int g = 0; g < k; ++g) {
      const double norm = sums.row(g).norm();
      if (norm > 0.0) {
        model.centroids.row(g) = sums.row(g) / norm;
        continue;
      }
      // Empty (or self-cancelling) group: move it onto the worst-served point.
      Eigen::Index worst = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (worst < 0 || best_cos(i) < best_cos(worst)) worst = i;
      }
      taken[static_cast<std::size_t>(worst)] = true;
      model.centroids.row(g) = points.row(worst);
    }
  }
  return model;
}

GroupingModel ClusterCosineKMeans(std::span<const DocumentEmbedding> docs, int k,
                                  std::uint64_t seed, const KMeansOptions& options) {
  if (docs.empty()) Fail(ErrorKind::kUnderDetermined, "no documents to cluster");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(docs.size()), docs.front().vector.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].vector.size() != points.cols()) {
      Fail(ErrorKind::kDimension, "document '" + docs[i].doc_id + "' has a different dimension");
    }
    points.row(static_cast<Eigen::Index>(i)) = docs[i].vector.transpose();
  }
  return ClusterCosineKMeans(points, k, seed, options);
}

int AssignGroup(const Eigen::Ref<const Eigen::VectorXd>& vector, const GroupingModel& model) {
  if (vector.size() != model.centroids.cols()) {
    Fail(ErrorKind::kDimension, "vector dimension " + std::to_string(vector.size()) +
                                    " does not match grouping model dimension " +
                                    std::to_string(model.centroids.cols()));
  }
  const Eigen::VectorXd scores = model.centroids * vector;
  return ArgMaxRow(scores);
}

double SentimentPolarity(const DocumentEmbedding& doc) { return doc.p_pos - doc.p_neg; }

DailyGroupFeatures DailyGroupWeights(std::span<const DocumentEmbedding> docs, Date date,
                                     const GroupingModel& model) {
  DailyGroupFeatures out;
  out.date = date;
  out.weights.assign(static_cast<std::size_t>(model.k), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(model.k), 0);
  for (const auto& d : docs) {
    const auto g = static_cast<std::size_t>(AssignGroup(d.vector, model));
    out.weights[g] += SentimentPolarity(d);
    ++counts[g];
  }
  for (std::size_t g = 0; g < out.weights.size(); ++g) {
    if (counts[g] > 0) out.weights[g] /= counts[g];
  }
  return out;
}

std::string GroupColumnName(int group) {
  return "group_" + std::to_string(group) + "_weight";
}

GroupFeatureSeries BuildGroupFeatureSeries(std::span<const DocumentEmbedding> docs,
                                           const GroupingModel& model,
                                           std::span<const Date> calendar) {
  GroupFeatureSeries out;
  const std::size_t days = calendar.size();
  std::vector<std::vector<const DocumentEmbedding*>> by_day(days);
  for (const auto& d : docs) {
    if (calendar.empty() || d.date < calendar.front() || d.date > calendar.back()) {
      ++out.dropped;
      continue;
    }
    const auto it = std::lower_bound(calendar.begin(), calendar.end(), d.date);
    by_day[static_cast<std::size_t>(it - calendar.begin())].push_back(&d);
  }

  const auto k = static_cast<Eigen::Index>(model.k);
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(days), k + 3);
  std::vector<DocumentEmbedding> day_docs;
  for (std::size_t t = 0; t < days; ++t) {
    if (by_day[t].empty()) continue;
    day_docs.clear();
    double pos = 0.0, neg = 0.0, neu = 0.0;
    for (const auto* d : by_day[t]) {
      day_docs.push_back(*d);
      pos += d->p_pos;
      neg += d->p_neg;
      neu += d->p_neu;
    }
    const DailyGroupFeatures f = DailyGroupWeights(day_docs, calendar[t], model);
    const auto row = static_cast<Eigen::Index>(t);
    for (Eigen::Index g = 0; g < k; ++g) values(row, g) = f.weights[static_cast<std::size_t>(g)];
    const double count = static_cast<double>(by_day[t].size());
    values(row, k) = pos / count;
    values(row, k + 1) = neg / count;
    values(row, k + 2) = neu / count;
  }
  std::vector<std::string> names;
  for (int g = 0; g < model.k; ++g) names.push_back(GroupColumnName(g));
  for (const char* s : kSentimentColumns) names.emplace_back(s);
  out.columns = market::FeatureMatrix(std::vector<Date>(calendar.begin(), calendar.end()),
                                      std::move(names), std::move(values));
  return out;
}

std::vector<DocumentEmbedding> DocumentsInYears(std::span<const DocumentEmbedding> docs,
                                                int first_year, int last_year) {
  std::vector<DocumentEmbedding> out;
  for (const auto& d : docs) {
    const int y = d.date.year();
    if (y >= first_year && y <= last_year) out.push_back(d);
  }
  return out;
}

json GroupingModelToJson(const GroupingModel& model) {
  json out;
  out["k"] = model.k;
  out["d"] = model.dim;
  out["seed"] = model.seed;
  json rows = json::array();
  for (Eigen::Index g = 0; g < model.centroids.rows(); ++g) {
    std::vector<double> row(static_cast<std::size_t>(model.centroids.cols()));
    for (Eigen::Index c = 0; c < model.centroids.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = model.centroids(g, c);
    }
    rows.push_back(row);
  }
  out["centroids"] = std::move(rows);
  return out;
}

GroupingModel GroupingModelFromJson(const json& in) {
  GroupingModel model;
  try {
    model.k = in.at("k").get<int>();
    model.dim = in.at("d").get<int>();
    model.seed = in.at("seed").get<std::uint64_t>();
    const auto& rows = in.at("centroids");
    if (static_cast<int>(rows.size()) != model.k) {
      Fail(ErrorKind::kSchema, "grouping model lists " + std::to_string(rows.size()) +
                                   " centroids for k=" + std::to_string(model.k));
    }
    model.centroids.resize(model.k, model.dim);
    for (int g = 0; g < model.k; ++g) {
      const auto& row = rows[static_cast<std::size_t>(g)];
      if (static_cast<int>(row.size()) != model.dim) {
        Fail(ErrorKind::kSchema, "centroid row has the wrong dimension");
      }
      for (int c = 0; c < model.dim; ++c) {
        model.centroids(g, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kSchema, std::string("grouping model json: ") + e.what());
  }
  return model;
}

}  // namespace gshap::grouping
