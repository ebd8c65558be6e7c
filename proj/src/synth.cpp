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

#include "gshap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "gshap/errors.hpp"
#include "gshap/util.hpp"

namespace gshap::synth {

namespace {

using json = nlohmann::json;
constexpr double kDegToRad = std::numbers::pi / 180.0;

double Clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

Eigen::VectorXd RandomUnit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = n01(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

// Unit vector at `angle` radians from unit `d`, in a random orthogonal direction.
Eigen::VectorXd Perturb(const Eigen::VectorXd& d, double angle, std::mt19937_64& rng) {
  Eigen::VectorXd u;
  do {
    u = RandomUnit(static_cast<int>(d.size()), rng);
    u -= u.dot(d) * d;
  } while (u.norm() < 1e-9);
  u.normalize();
  return (std::cos(angle) * d + std::sin(angle) * u).normalized();
}

std::vector<Date> Weekdays(int first_year, int last_year) {
  std::vector<Date> out;
  for (Date d(first_year, 1, 1); d.year() <= last_year; d = d.AddDays(1)) {
    if (d.weekday() != 0 && d.weekday() != 6) out.push_back(d);
  }
  return out;
}

market::PriceSeries RandomWalk(std::string name, const std::vector<Date>& dates, double start,
                               double vol, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  market::PriceSeries s{std::move(name), {}};
  double level = std::log(start);
  for (const auto& d : dates) {
    const double close = std::exp(level);
    s.rows.push_back({d, close, close, close, close, 0.0});
    level += vol * n01(rng) - 0.01 * (level - std::log(start));
  }
  return s;
}

std::string SeriesCsv(std::span<const market::PriceSeries> series) {
  std::ostringstream out;
  out << "date";
  for (const auto& s : series) out << ',' << s.symbol;
  out << '\n';
  for (std::size_t i = 0; i < series.front().rows.size(); ++i) {
    out << series.front().rows[i].date.ToString();
    for (const auto& s : series) out << ',' << FormatDouble(s.rows[i].close);
    out << '\n';
  }
  return out.str();
}

}  // namespace

void SynthSpec::Validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) Fail(ErrorKind::kConfig, std::string("synth ") + name + " must be positive");
  };
  positive(years, "years");
  positive(features, "features");
  positive(groups, "groups");
  positive(dim, "dim");
  positive(docs_per_group, "docs_per_group");
  if (!(separation_deg > 0.0 && separation_deg <= 90.0)) {
    Fail(ErrorKind::kConfig, "synth separation_deg must lie in (0, 90]");
  }
  if (!(noise_deg >= 0.0 && noise_deg < 90.0)) {
    Fail(ErrorKind::kConfig, "synth noise_deg must lie in [0, 90)");
  }
  if (dim < groups + 1) Fail(ErrorKind::kConfig, "synth dim must exceed the group count");
  if (!(snr >= 0.0)) Fail(ErrorKind::kConfig, "synth snr must be nonnegative");
  if (!(volatility > 0.0)) Fail(ErrorKind::kConfig, "synth volatility must be positive");
  if (!(mean_reversion >= 0.0 && mean_reversion < 1.0)) {
    Fail(ErrorKind::kConfig, "synth mean_reversion must lie in [0, 1)");
  }
  if (!(start_price > 0.0)) Fail(ErrorKind::kConfig, "synth start_price must be positive");
}

json SynthSpecToJson(const SynthSpec& s) {
  return json{{"start_year", s.start_year},
              {"years", s.years},
              {"features", s.features},
              {"groups", s.groups},
              {"separation_deg", s.separation_deg},
              {"noise_deg", s.noise_deg},
              {"dim", s.dim},
              {"docs_per_group", s.docs_per_group},
              {"snr", s.snr},
              {"volatility", s.volatility},
              {"mean_reversion", s.mean_reversion},
              {"start_price", s.start_price},
              {"seed", s.seed}};
}

SynthSpec SynthSpecFromJson(const json& j) {
  SynthSpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "start_year") s.start_year = value.get<int>();
      else if (key == "years") s.years = value.get<int>();
      else if (key == "features") s.features = value.get<int>();
      else if (key == "groups") s.groups = value.get<int>();
      else if (key == "separation_deg") s.separation_deg = value.get<double>();
      else if (key == "noise_deg") s.noise_deg = value.get<double>();
      else if (key == "dim") s.dim = value.get<int>();
      else if (key == "docs_per_group") s.docs_per_group = value.get<int>();
      else if (key == "snr") s.snr = value.get<double>();
      else if (key == "volatility") s.volatility = value.get<double>();
      else if (key == "mean_reversion") s.mean_reversion = value.get<double>();
      else if (key == "start_price") s.start_price = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else Fail(ErrorKind::kConfig, "unknown synth key '" + key + "'");
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("synth config: ") + e.what());
  }
  s.Validate();
  return s;
}

SynthData Generate(const SynthSpec& spec) {
  spec.Validate();
  SynthData data;
  const int last_year = spec.start_year + spec.years - 1;
  const std::vector<Date> days = Weekdays(spec.start_year, last_year);
  const auto n_days = days.size();
  const int G = spec.groups;

  // Planted directions with pairwise cosine cos(separation): a shared axis
  // plus one private axis each, then a random rotation.
  {
    std::mt19937_64 rng(DeriveSeed(spec.seed, "directions"));
    std::normal_distribution<double> n01;
    Eigen::MatrixXd gauss(spec.dim, spec.dim);
    for (Eigen::Index i = 0; i < gauss.size(); ++i) gauss.data()[i] = n01(rng);
    const Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
    const double alpha = std::acos(std::sqrt(std::max(0.0, std::cos(spec.separation_deg * kDegToRad))));
    data.directions.resize(G, spec.dim);
    for (int g = 0; g < G; ++g) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.dim);
      v(0) = std::cos(alpha);
      v(g + 1) = std::sin(alpha);
      data.directions.row(g) = (rot * v).normalized().transpose();
    }
  }

  for (int g = 0; g < G; ++g) {
    data.betas.push_back((g % 2 == 0 ? 1.0 : -1.0) / (1.0 + g / 2));
  }

  // Latent AR(1) polarity per group, documents around the directions, and
  // the realized daily mean polarity per group.
  std::vector<double> signal(n_days, 0.0);
  {
    std::mt19937_64 rng(DeriveSeed(spec.seed, "documents"));
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> angle(0.0, spec.noise_deg * kDegToRad);
    std::vector<double> latent(G, 0.0);
    for (std::size_t t = 0; t < n_days; ++t) {
      for (int g = 0; g < G; ++g) {
        latent[g] = Clip(0.3 * latent[g] + 0.5 * n01(rng), -0.95, 0.95);
        double mean_polarity = 0.0;
        for (int j = 0; j < spec.docs_per_group; ++j) {
          const double q = Clip(latent[g] + 0.1 * n01(rng), -0.99, 0.99);
          grouping::DocumentEmbedding doc;
          doc.doc_id = "d" + std::to_string(t) + "_" + std::to_string(g) + "_" + std::to_string(j);
          doc.date = days[t];
          doc.vector = Perturb(data.directions.row(g).transpose(), angle(rng), rng);
          doc.p_neu = 0.5 * (1.0 - std::abs(q));
          doc.p_pos = (1.0 - doc.p_neu + q) / 2.0;
          doc.p_neg = (1.0 - doc.p_neu - q) / 2.0;
          mean_polarity += doc.p_pos - doc.p_neg;
          data.docs.push_back(std::move(doc));
          data.doc_groups.push_back(g);
        }
        signal[t] += data.betas[g] * mean_polarity / spec.docs_per_group;
      }
    }
  }
  double mean = 0.0;
  for (double s : signal) mean += s;
  mean /= static_cast<double>(n_days);
  double var = 0.0;
  for (double s : signal) var += (s - mean) * (s - mean);
  const double sd = std::sqrt(var / static_cast<double>(n_days));
  for (double& s : signal) s = sd > 0.0 ? (s - mean) / sd : 0.0;

  // Close on day t+1 responds to the group signal of day t.
  {
    std::mt19937_64 rng(DeriveSeed(spec.seed, "prices"));
    std::normal_distribution<double> n01;
    const double a = std::sqrt(spec.snr / (1.0 + spec.snr));
    const double b = std::sqrt(1.0 / (1.0 + spec.snr));
    const double anchor = std::log(spec.start_price);
    double level = anchor;
    double prev_close = spec.start_price;
    data.target.symbol = "target";
    for (std::size_t t = 0; t < n_days; ++t) {
      const double eps = n01(rng);
      if (t > 0) {
        level += spec.volatility * (a * signal[t - 1] + b * eps) -
                 spec.mean_reversion * (level - anchor);
      }
      const double close = std::exp(level);
      const double open = prev_close;
      const double high = std::max(open, close) * (1.0 + 0.002 * std::abs(n01(rng)));
      const double low = std::min(open, close) * (1.0 - 0.002 * std::abs(n01(rng)));
      const double volume = std::round(1e6 * std::exp(0.2 * n01(rng)));
      data.target.rows.push_back({days[t], open, high, low, close, volume});
      prev_close = close;
    }
  }

  {
    std::mt19937_64 rng(DeriveSeed(spec.seed, "macro"));
    for (int f = 1; f < spec.features; ++f) {
      data.extra.push_back(RandomWalk("macro_" + std::to_string(f), days, 100.0 * f, 0.01, rng));
    }
    std::vector<Date> every_day;
    for (Date d(spec.start_year, 1, 1); d.year() <= last_year; d = d.AddDays(1)) {
      every_day.push_back(d);
    }
    data.extra.push_back(RandomWalk("bitcoin", every_day, 1000.0, 0.03, rng));
  }
  return data;
}

void WriteCorpus(const SynthData& data, const SynthSpec& spec, const std::filesystem::path& dir) {
  std::ostringstream prices;
  prices << "date,open,high,low,close,volume\n";
  for (const auto& r : data.target.rows) {
    prices << r.date.ToString() << ',' << FormatDouble(r.open) << ',' << FormatDouble(r.high)
           << ',' << FormatDouble(r.low) << ',' << FormatDouble(r.close) << ','
           << FormatDouble(r.volume) << '\n';
  }
  WriteFileAtomic(dir / "prices.csv", prices.str());
  if (data.extra.size() > 1) {
    WriteFileAtomic(dir / "macro.csv",
                    SeriesCsv(std::span(data.extra).first(data.extra.size() - 1)));
  }
  WriteFileAtomic(dir / "bitcoin.csv", SeriesCsv(std::span(data.extra).last(1)));
  WriteFileAtomic(dir / "embeddings.jsonl", grouping::EmbeddingsToJsonl(data.docs));

  json directions = json::array();
  for (Eigen::Index g = 0; g < data.directions.rows(); ++g) {
    directions.push_back(std::vector<double>(data.directions.row(g).begin(),
                                             data.directions.row(g).end()));
  }
  const json truth{{"spec", SynthSpecToJson(spec)},
                   {"directions", directions},
                   {"betas", data.betas},
                   {"doc_groups", data.doc_groups}};
  WriteFileAtomic(dir / "truth.json", truth.dump() + "\n");
}

double Purity(std::span<const int> planted, std::span<const int> assigned) {
  if (planted.size() != assigned.size() || planted.empty()) {
    Fail(ErrorKind::kDimension, "purity needs equal nonzero label counts");
  }
  std::map<int, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < planted.size(); ++i) ++table[assigned[i]][planted[i]];
  std::size_t correct = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, n] : counts) best = std::max(best, n);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(planted.size());
}

}  // namespace gshap::synth
