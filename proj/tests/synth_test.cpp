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
#include <filesystem>
#include <map>

#include <gtest/gtest.h>

#include "gshap/synth.hpp"
#include "support.hpp"

namespace gshap::synth {
namespace {

using testing::ExpectError;

SynthSpec Small(std::uint64_t seed) {
  SynthSpec s;
  s.years = 3;
  s.dim = 8;
  s.seed = seed;
  return s;
}

double Correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Correlation between the planted group signal on day t and the log return into day t+1.
double SignalReturnCorrelation(const SynthData& d) {
  std::map<Date, double> signal;
  for (std::size_t i = 0; i < d.docs.size(); ++i) {
    signal[d.docs[i].date] += d.betas[d.doc_groups[i]] * (d.docs[i].p_pos - d.docs[i].p_neg);
  }
  std::vector<double> s, r;
  for (std::size_t t = 1; t < d.target.rows.size(); ++t) {
    s.push_back(signal[d.target.rows[t - 1].date]);
    r.push_back(std::log(d.target.rows[t].close / d.target.rows[t - 1].close));
  }
  return Correlation(s, r);
}

TEST(Synth, DeterministicForSeed) {
  const auto a = Generate(Small(1));
  const auto b = Generate(Small(1));
  const auto c = Generate(Small(2));
  ASSERT_EQ(a.target.rows.size(), b.target.rows.size());
  for (std::size_t i = 0; i < a.target.rows.size(); ++i) {
    EXPECT_EQ(a.target.rows[i].close, b.target.rows[i].close);
  }
  EXPECT_EQ(a.directions, b.directions);
  EXPECT_NE(a.directions, c.directions);
}

TEST(Synth, CalendarAndShapes) {
  const auto spec = Small(3);
  const auto d = Generate(spec);
  for (const auto& row : d.target.rows) {
    EXPECT_GE(row.date.year(), 2015);
    EXPECT_LE(row.date.year(), 2017);
    EXPECT_NE(row.date.weekday(), 0u);
    EXPECT_NE(row.date.weekday(), 6u);
    EXPECT_LE(row.low, std::min(row.open, row.close));
    EXPECT_GE(row.high, std::max(row.open, row.close));
  }
  EXPECT_EQ(d.extra.size(), 7u);
  EXPECT_EQ(d.extra.back().symbol, "bitcoin");
  EXPECT_EQ(d.docs.size(), d.target.rows.size() * spec.groups * spec.docs_per_group);
  EXPECT_EQ(d.doc_groups.size(), d.docs.size());
  EXPECT_EQ(d.directions.rows(), 5);
  EXPECT_EQ(d.directions.cols(), 8);
}

TEST(Synth, DocumentProbabilitiesAreDistributions) {
  const auto d = Generate(Small(4));
  for (const auto& doc : d.docs) {
    EXPECT_GE(doc.p_pos, 0.0);
    EXPECT_GE(doc.p_neg, 0.0);
    EXPECT_GE(doc.p_neu, 0.0);
    EXPECT_NEAR(doc.p_pos + doc.p_neg + doc.p_neu, 1.0, 1e-12);
  }
}

TEST(Synth, DirectionsAreSeparatedAndDocsStayClose) {
  for (double sep : {60.0, 75.0, 90.0}) {
    auto spec = Small(5);
    spec.separation_deg = sep;
    spec.noise_deg = 10.0;
    const auto d = Generate(spec);
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(d.directions.row(i).norm(), 1.0, 1e-12);
      for (int j = i + 1; j < 5; ++j) {
        EXPECT_NEAR(d.directions.row(i).dot(d.directions.row(j)), std::cos(sep * M_PI / 180), 1e-12);
      }
    }
    const double min_cos = std::cos(10.0 * M_PI / 180) - 1e-12;
    for (std::size_t k = 0; k < d.docs.size(); k += 7) {
      const auto& v = d.docs[k].vector;
      EXPECT_GE(v.dot(d.directions.row(d.doc_groups[k]).transpose()) / v.norm(), min_cos);
    }
  }
}

TEST(Synth, SignalStrengthFollowsSnr) {
  auto strong = Small(6);
  strong.years = 4;
  auto none = strong;
  none.snr = 0.0;
  EXPECT_GT(SignalReturnCorrelation(Generate(strong)), 0.5);
  // About 1000 returns: 4 standard errors of a null correlation.
  EXPECT_LT(std::abs(SignalReturnCorrelation(Generate(none))), 4.0 / std::sqrt(1000.0));
}

TEST(Synth, SpecValidationAndJson) {
  auto s = Small(7);
  s.separation_deg = 0.0;
  ExpectError(ErrorKind::kConfig, [&] { s.Validate(); });
  s = Small(7);
  s.noise_deg = 90.0;
  ExpectError(ErrorKind::kConfig, [&] { s.Validate(); });
  s = Small(7);
  s.dim = 5;
  ExpectError(ErrorKind::kConfig, [&] { s.Validate(); });
  s = Small(7);
  s.snr = 2.5;
  const auto back = SynthSpecFromJson(SynthSpecToJson(s));
  EXPECT_EQ(back.snr, 2.5);
  EXPECT_EQ(back.dim, 8);
  ExpectError(ErrorKind::kConfig, [] { SynthSpecFromJson({{"yeers", 3}}); });
}

TEST(Synth, CorpusLoadsBack) {
  testing::TempDir dir;
  const auto spec = Small(8);
  const auto d = Generate(spec);
  WriteCorpus(d, spec, dir.path());
  for (const char* f : {"prices.csv", "macro.csv", "bitcoin.csv", "embeddings.jsonl", "truth.json"}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / f)) << f;
  }
  const auto prices = market::LoadPriceCsv(dir.path() / "prices.csv", market::CsvSchema{}, "gold");
  ASSERT_EQ(prices.rows.size(), d.target.rows.size());
  EXPECT_NEAR(prices.rows.back().close, d.target.rows.back().close,
              1e-9 * d.target.rows.back().close);
  const auto docs = grouping::LoadEmbeddingsJsonl(dir.path() / "embeddings.jsonl");
  EXPECT_EQ(docs.size(), d.docs.size());
  auto series = market::LoadSeriesCsv(dir.path() / "macro.csv");
  EXPECT_EQ(series.size(), 6u);
}

TEST(Purity, Examples) {
  const std::vector<int> planted{0, 0, 1, 1, 2, 2};
  EXPECT_EQ(Purity(planted, std::vector<int>{4, 4, 3, 3, 1, 1}), 1.0);
  EXPECT_NEAR(Purity(planted, std::vector<int>{0, 0, 0, 0, 1, 1}), 4.0 / 6.0, 1e-15);
  ExpectError(ErrorKind::kDimension, [&] { Purity(planted, std::vector<int>{0}); });
}

}  // namespace
}  // namespace gshap::synth
