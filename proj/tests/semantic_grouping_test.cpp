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

#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "gshap/semantic_grouping.hpp"
#include "gshap/synth.hpp"
#include "support.hpp"

namespace gshap::grouping {
namespace {

using testing::ExpectError;

DocumentEmbedding Doc(std::string id, Date date, std::vector<double> v, double pos = 0.0,
                      double neg = 0.0) {
  DocumentEmbedding d;
  d.doc_id = std::move(id);
  d.date = date;
  d.vector = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  d.p_pos = pos;
  d.p_neg = neg;
  d.p_neu = 1.0 - pos - neg;
  return d;
}

GroupingModel Model(const std::vector<std::vector<double>>& rows) {
  GroupingModel m;
  m.k = static_cast<int>(rows.size());
  m.dim = static_cast<int>(rows.front().size());
  m.centroids.resize(m.k, m.dim);
  for (int g = 0; g < m.k; ++g) {
    for (int j = 0; j < m.dim; ++j) m.centroids(g, j) = rows[g][j];
  }
  return m;
}

Eigen::MatrixXd RandomUnitRows(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = n01(rng);
    m.row(i).normalize();
  }
  return m;
}

TEST(Normalize, Examples) {
  const Date day(2024, 1, 2);
  auto out = NormalizeEmbeddings({Doc("a", day, {3, 4}), Doc("b", day, {0, 1})});
  EXPECT_NEAR(out[0].vector(0), 0.6, 1e-15);
  EXPECT_NEAR(out[0].vector(1), 0.8, 1e-15);
  EXPECT_EQ(out[1].vector(1), 1.0);
  const auto msg = ExpectError(ErrorKind::kDegenerate,
                               [&] { NormalizeEmbeddings({Doc("zero-doc", day, {0, 0})}); });
  EXPECT_NE(msg.find("zero-doc"), std::string::npos);
}

TEST(KMeans, SingleClusterIsMeanDirection) {
  const auto pts = RandomUnitRows(30, 4, 1);
  const auto m = ClusterCosineKMeans(pts, 1, 9);
  const Eigen::VectorXd mean = pts.colwise().sum().transpose().normalized();
  EXPECT_LT((m.centroids.row(0).transpose() - mean).norm(), 1e-12);
}

// Best 2-partition by brute force: maximize the summed norm of cluster sums.
std::vector<int> BestTwoPartition(const Eigen::MatrixXd& pts) {
  const int n = static_cast<int>(pts.rows());
  double best = -1;
  std::vector<int> labels;
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(pts.cols()), b = a;
    for (int i = 0; i < n; ++i) ((mask >> i) & 1 ? a : b) += pts.row(i).transpose();
    const double score = a.norm() + b.norm();
    if (score > best + 1e-12) {
      best = score;
      labels.assign(n, 0);
      for (int i = 0; i < n; ++i) labels[i] = (mask >> i) & 1;
    }
  }
  return labels;
}

TEST(KMeans, SeparatesTwoBundlesLikeBruteForce) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd pts(12, 3);
  for (int i = 0; i < 12; ++i) {
    Eigen::Vector3d base = i < 6 ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0.05);
    Eigen::Vector3d v = base + 0.03 * Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
    pts.row(i) = v.normalized().transpose();
  }
  const auto oracle = BestTwoPartition(pts);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = ClusterCosineKMeans(pts, 2, seed);
    std::vector<int> got;
    for (int i = 0; i < 12; ++i) got.push_back(AssignGroup(pts.row(i).transpose(), m));
    const bool same = got == oracle;
    std::vector<int> flipped(oracle);
    for (auto& x : flipped) x = 1 - x;
    EXPECT_TRUE(same || got == flipped) << "seed " << seed;
  }
}

TEST(KMeans, DeterministicAndWellFormed) {
  const auto pts = RandomUnitRows(200, 6, 2);
  const auto a = ClusterCosineKMeans(pts, 5, 77);
  const auto b = ClusterCosineKMeans(pts, 5, 77);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.objective_trace, b.objective_trace);
  for (int g = 0; g < 5; ++g) EXPECT_NEAR(a.centroids.row(g).norm(), 1.0, 1e-10);
  for (int g = 0; g < 5; ++g) {
    for (int h = g + 1; h < 5; ++h) EXPECT_NE(a.centroids.row(g), a.centroids.row(h));
  }
}

TEST(KMeans, AssignmentOptimalityAndMonotoneObjective) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pts = RandomUnitRows(150, 5, 100 + seed);
    const auto m = ClusterCosineKMeans(pts, 4, seed);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const int g = AssignGroup(pts.row(i).transpose(), m);
      for (int h = 0; h < m.k; ++h) {
        EXPECT_GE(pts.row(i).dot(m.centroids.row(g)), pts.row(i).dot(m.centroids.row(h)));
      }
    }
    for (std::size_t t = 1; t < m.objective_trace.size(); ++t) {
      EXPECT_GE(m.objective_trace[t], m.objective_trace[t - 1] - 1e-12) << "iteration " << t;
    }
  }
}

TEST(KMeans, TooFewDistinctPoints) {
  Eigen::MatrixXd pts(4, 2);
  pts << 1, 0, 1, 0, 0, 1, 0, 1;
  ExpectError(ErrorKind::kUnderDetermined, [&] { ClusterCosineKMeans(pts, 3, 0); });
}

TEST(KMeans, PlantedDirectionsRecovered) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    synth::SynthSpec spec;
    spec.years = 1;
    spec.groups = 4;
    spec.separation_deg = 60.0;
    spec.noise_deg = 10.0;
    spec.dim = 8;
    spec.seed = seed;
    const auto data = synth::Generate(spec);
    const auto docs = NormalizeEmbeddings(data.docs);
    const auto m = ClusterCosineKMeans(docs, 4, seed);
    std::vector<int> assigned;
    for (const auto& d : docs) assigned.push_back(AssignGroup(d.vector, m));
    EXPECT_EQ(synth::Purity(data.doc_groups, assigned), 1.0) << "seed " << seed;
  }
}

TEST(AssignGroup, ExamplesAndTieBreak) {
  const auto m = Model({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  EXPECT_EQ(AssignGroup(Eigen::Vector3d(0, 0, 1), m), 2);
  const double s = std::sqrt(0.5);
  EXPECT_EQ(AssignGroup(Eigen::Vector3d(s, s, 0), m), 0);
  ExpectError(ErrorKind::kDimension, [&] { AssignGroup(Eigen::Vector2d(1, 0), m); });
}

TEST(AssignGroup, MatchesLinearScan) {
  const auto centroids = RandomUnitRows(5, 7, 8);
  GroupingModel m;
  m.k = 5;
  m.dim = 7;
  m.centroids = centroids;
  const auto probes = RandomUnitRows(100, 7, 9);
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    int best = 0;
    for (int g = 1; g < 5; ++g) {
      if (probes.row(i).dot(centroids.row(g)) > probes.row(i).dot(centroids.row(best))) best = g;
    }
    EXPECT_EQ(AssignGroup(probes.row(i).transpose(), m), best);
  }
}

TEST(Polarity, Examples) {
  const Date day(2024, 1, 2);
  EXPECT_EQ(SentimentPolarity(Doc("a", day, {1}, 1.0, 0.0)), 1.0);
  EXPECT_EQ(SentimentPolarity(Doc("b", day, {1}, 0.0, 0.0)), 0.0);
  EXPECT_NEAR(SentimentPolarity(Doc("c", day, {1}, 0.6, 0.2)), 0.4, 1e-15);
}

TEST(DailyWeights, Examples) {
  const Date day(2024, 1, 2);
  const auto m = Model({{1, 0}, {0, 1}});
  // polarity +0.6 and -0.2 in group 0
  const std::vector<DocumentEmbedding> docs{Doc("a", day, {1, 0.1}, 0.7, 0.1),
                                            Doc("b", day, {1, -0.1}, 0.2, 0.4)};
  const auto f = DailyGroupWeights(docs, day, m);
  EXPECT_NEAR(f.weights[0], 0.2, 1e-15);
  EXPECT_EQ(f.weights[1], 0.0);
  EXPECT_EQ(DailyGroupWeights({}, day, m).weights, (std::vector<double>{0.0, 0.0}));
  const std::vector<DocumentEmbedding> neutral{Doc("n", day, {0, 1}), Doc("o", day, {1, 0})};
  EXPECT_EQ(DailyGroupWeights(neutral, day, m).weights, (std::vector<double>{0.0, 0.0}));
}

TEST(GroupFeatureSeries, MultiDayFixture) {
  const auto m = Model({{1, 0}, {0, 1}});
  // Thu 4th, Fri 5th, Mon 8th, Tue 9th.
  const std::vector<Date> cal{Date(2024, 1, 4), Date(2024, 1, 5), Date(2024, 1, 8), Date(2024, 1, 9)};
  const std::vector<DocumentEmbedding> docs{
      Doc("d1", Date(2024, 1, 4), {1, 0}, 0.5, 0.1),   // g0 +0.4
      Doc("d2", Date(2024, 1, 4), {0, 1}, 0.1, 0.7),   // g1 -0.6
      Doc("d3", Date(2024, 1, 4), {2, 1}, 0.3, 0.3),   // g0  0.0
      Doc("d4", Date(2024, 1, 6), {0, 3}, 0.9, 0.0),   // Saturday -> Monday, g1 +0.9
      Doc("d5", Date(2024, 1, 8), {1, 2}, 0.2, 0.6),   // g1 -0.4
      Doc("d6", Date(2024, 1, 3), {1, 0}, 1.0, 0.0),   // before the calendar
      Doc("d7", Date(2024, 1, 10), {1, 0}, 1.0, 0.0),  // after the calendar
  };
  const auto s = BuildGroupFeatureSeries(docs, m, cal);
  EXPECT_EQ(s.dropped, 2u);
  const std::vector<std::string> names{"group_0_weight", "group_1_weight", "sent_pos", "sent_neg",
                                       "sent_neu"};
  EXPECT_EQ(s.columns.names(), names);
  const auto& v = s.columns.values();
  const double want[4][5] = {
      {0.2, -0.6, 0.3, 11.0 / 30.0, 1.0 - 0.3 - 11.0 / 30.0},
      {0, 0, 0, 0, 0},
      {0, 0.25, 0.55, 0.3, 0.15},
      {0, 0, 0, 0, 0},
  };
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) EXPECT_NEAR(v(r, c), want[r][c], 1e-12) << r << "," << c;
  }
}

TEST(GroupFeatureSeries, SingleDocPerDay) {
  const auto m = Model({{1, 0}, {0, 1}});
  const std::vector<Date> cal{Date(2024, 1, 2), Date(2024, 1, 3)};
  const auto s = BuildGroupFeatureSeries(
      std::vector<DocumentEmbedding>{Doc("a", cal[0], {0, 1}, 0.8, 0.1),
                                     Doc("b", cal[1], {1, 0}, 0.1, 0.5)},
      m, cal);
  EXPECT_NEAR(s.columns.values()(0, 1), 0.7, 1e-15);
  EXPECT_EQ(s.columns.values()(0, 0), 0.0);
  EXPECT_NEAR(s.columns.values()(1, 0), -0.4, 1e-15);
  EXPECT_EQ(s.columns.values()(1, 1), 0.0);
}

TEST(Jsonl, RoundTripAndValidation) {
  testing::TempDir dir;
  const Date day(2024, 1, 2);
  const std::vector<DocumentEmbedding> docs{Doc("a", day, {0.1, 0.2, 0.3}, 0.5, 0.25),
                                            Doc("b", day.AddDays(1), {1.5, -2, 1e-9}, 0.0, 1.0)};
  std::ofstream(dir / "e.jsonl") << EmbeddingsToJsonl(docs);
  const auto back = LoadEmbeddingsJsonl(dir / "e.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].doc_id, "b");
  EXPECT_EQ(back[1].vector, docs[1].vector);
  EXPECT_EQ(back[0].p_neg, 0.25);

  std::ofstream(dir / "sum.jsonl")
      << R"({"doc_id":"x","date":"2024-01-02","vector":[1],"p_pos":0.5,"p_neg":0.5,"p_neu":0.5})"
      << "\n";
  ExpectError(ErrorKind::kIntegrity, [&] { LoadEmbeddingsJsonl(dir / "sum.jsonl"); });
  std::ofstream(dir / "dim.jsonl")
      << R"({"doc_id":"x","date":"2024-01-02","vector":[1,0],"p_pos":0,"p_neg":0,"p_neu":1})"
      << "\n"
      << R"({"doc_id":"y","date":"2024-01-02","vector":[1],"p_pos":0,"p_neg":0,"p_neu":1})"
      << "\n";
  ExpectError(ErrorKind::kDimension, [&] { LoadEmbeddingsJsonl(dir / "dim.jsonl"); });
}

TEST(GroupingModelJson, RoundTrip) {
  const auto pts = RandomUnitRows(40, 3, 12);
  const auto m = ClusterCosineKMeans(pts, 3, 5);
  const auto back = GroupingModelFromJson(GroupingModelToJson(m));
  EXPECT_EQ(back.k, 3);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.centroids, m.centroids);
}

}  // namespace
}  // namespace gshap::grouping
