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

#include "gshap/shapley.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "gshap/errors.hpp"

namespace gshap::shap {

namespace {

constexpr std::size_t kEvalChunk = 512;

using Clock = std::chrono::steady_clock;

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void EvaluateChunked(const ValueFunction& game, std::span<const Coalition> coalitions,
                     std::span<double> out) {
  for (std::size_t first = 0; first < coalitions.size(); first += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, coalitions.size() - first);
    game.Evaluate(coalitions.subspan(first, n), out.subspan(first, n));
  }
}

double Residual(const Attribution& a) {
  double sum = 0.0;
  for (double p : a.phi) sum += p;
  return std::abs(sum - (a.v_full - a.v_empty));
}

}  // namespace

void CallableGame::Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const {
  for (std::size_t i = 0; i < coalitions.size(); ++i) out[i] = fn_(coalitions[i]);
}

TableGame::TableGame(std::vector<double> table) : table_(std::move(table)) {
  players_ = 0;
  while ((std::size_t{1} << players_) < table_.size()) ++players_;
  if ((std::size_t{1} << players_) != table_.size()) {
    Fail(ErrorKind::kDimension, "value table size must be a power of two");
  }
}

void TableGame::Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const {
  for (std::size_t i = 0; i < coalitions.size(); ++i) {
    out[i] = table_[CoalitionMask(coalitions[i])];
  }
}

std::uint64_t CoalitionMask(const Coalition& coalition) {
  if (coalition.size() > 64) Fail(ErrorKind::kDomain, "coalition too large for a bitmask");
  std::uint64_t mask = 0;
  for (std::size_t g = 0; g < coalition.size(); ++g) {
    if (coalition[g]) mask |= std::uint64_t{1} << g;
  }
  return mask;
}

double ShapleyWeight(int coalition_size, int players) {
  if (players < 1 || coalition_size < 0 || coalition_size >= players) {
    Fail(ErrorKind::kDomain, "Shapley weight needs 0 <= s < n, got s=" +
                                 std::to_string(coalition_size) + ", n=" + std::to_string(players));
  }
  // s!(n-s-1)!/n! = 1 / (n * C(n-1, s)); the binomial is exact in double for n <= 60.
  const int m = players - 1;
  if (players <= 60) {
    double binom = 1.0;
    const int k = std::min(coalition_size, m - coalition_size);
    for (int i = 1; i <= k; ++i) binom = binom * (m - k + i) / i;
    return 1.0 / (players * std::round(binom));
  }
  return std::exp(std::lgamma(coalition_size + 1.0) + std::lgamma(players - coalition_size) -
                  std::lgamma(players + 1.0));
}

Attribution ExactShapley(const ValueFunction& game) {
  const std::size_t n = game.players();
  if (n < 1) Fail(ErrorKind::kDomain, "game has no players");
  if (n > static_cast<std::size_t>(kMaxExactPlayers)) {
    Fail(ErrorKind::kEnumerationLimit,
         std::to_string(n) + " players exceed the exact limit of " +
             std::to_string(kMaxExactPlayers) + "; use sampled attribution instead");
  }
  const auto start = Clock::now();
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> values(subsets);
  std::vector<Coalition> chunk;
  for (std::size_t first = 0; first < subsets; first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, subsets - first);
    chunk.assign(count, Coalition(n, false));
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t g = 0; g < n; ++g) chunk[i][g] = ((first + i) >> g) & 1U;
    }
    game.Evaluate(chunk, std::span<double>(values).subspan(first, count));
  }

  std::vector<double> weight(n);
  for (std::size_t s = 0; s < n; ++s) {
    weight[s] = ShapleyWeight(static_cast<int>(s), static_cast<int>(n));
  }
  Attribution a;
  a.phi.assign(n, 0.0);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t g = 0; g < n; ++g) {
      const std::size_t bit = std::size_t{1} << g;
      if (mask & bit) continue;
      a.phi[g] += weight[size] * (values[mask | bit] - values[mask]);
    }
  }
  a.v_empty = values.front();
  a.v_full = values.back();
  a.efficiency_residual = Residual(a);
  a.evaluations = subsets;
  a.wall_ms = ElapsedMs(start);
  return a;
}

Attribution SampledShapley(const ValueFunction& game, const SamplingOptions& options) {
  const std::size_t n = game.players();
  if (n < 1) Fail(ErrorKind::kDomain, "game has no players");
  if (options.budget < 1 && !options.exhaustive) {
    Fail(ErrorKind::kConfig, "permutation budget must be >= 1");
  }
  const auto start = Clock::now();
  Attribution a;
  {
    std::vector<Coalition> ends{Coalition(n, false), Coalition(n, true)};
    double v[2];
    game.Evaluate(ends, v);
    a.v_empty = v[0];
    a.v_full = v[1];
  }

  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Coalition> prefixes(n, Coalition(n, false));
  std::vector<double> values(n);
  std::mt19937_64 rng(options.seed);
  std::uint64_t permutations = 0;

  auto walk = [&]() {
    Coalition current(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      current[order[i]] = true;
      prefixes[i] = current;
    }
    EvaluateChunked(game, prefixes, values);
    double previous = a.v_empty;
    for (std::size_t i = 0; i < n; ++i) {
      const double marginal = values[i] - previous;
      sum[order[i]] += marginal;
      sum_sq[order[i]] += marginal * marginal;
      previous = values[i];
    }
    ++permutations;
  };

  if (options.exhaustive) {
    if (n > 10) Fail(ErrorKind::kEnumerationLimit, "exhaustive permutations need n <= 10");
    do {
      walk();
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    for (int b = 0; b < options.budget; ++b) {
      std::shuffle(order.begin(), order.end(), rng);
      walk();
    }
  }

  const auto m = static_cast<double>(permutations);
  a.phi.resize(n);
  a.standard_error.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    a.phi[g] = sum[g] / m;
    const double var = permutations > 1 ? std::max(0.0, (sum_sq[g] - m * a.phi[g] * a.phi[g]) /
                                                            (m - 1.0))
                                        : 0.0;
    a.standard_error[g] = std::sqrt(var / m);
  }
  a.efficiency_residual = Residual(a);
  a.evaluations = permutations * n + 2;
  a.wall_ms = ElapsedMs(start);
  return a;
}

CoalitionCount CountCoalitions(int players) {
  if (players < 1) Fail(ErrorKind::kDomain, "coalition count needs at least one unit");
  using boost::multiprecision::cpp_int;
  const cpp_int count = (cpp_int(1) << players) - 1;
  CoalitionCount out;
  out.exact = count.str();
  if (players <= 64) {
    out.value = static_cast<std::uint64_t>(count);
  } else {
    out.saturated = true;
  }
  return out;
}

std::string ValueModeName(ValueMode mode) {
  return mode == ValueMode::kPrediction ? "prediction" : "error_reduction";
}

ValueMode ParseValueMode(const std::string& name) {
  if (name == "prediction") return ValueMode::kPrediction;
  if (name == "error_reduction") return ValueMode::kErrorReduction;
  Fail(ErrorKind::kConfig, "unknown value mode '" + name + "'");
}

Eigen::VectorXd ColumnMeans(const Eigen::MatrixXd& values, std::size_t begin, std::size_t end) {
  if (end <= begin) Fail(ErrorKind::kInsufficientData, "baseline needs at least one row");
  return values.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin))
      .colwise()
      .mean()
      .transpose();
}

MaskedModelGame::MaskedModelGame(const forecast::ForecastModel& model, ValueFunctionSpec spec,
                                 const FeatureGroups& groups)
    : model_(model), spec_(std::move(spec)) {
  const auto ncols = static_cast<Eigen::Index>(spec_.columns.size());
  const Eigen::Index steps = spec_.instance.rows();
  if (spec_.instance.cols() != ncols || spec_.baseline.size() != ncols) {
    Fail(ErrorKind::kDimension, "baseline and instance must cover every input column");
  }
  if (groups.size() == 0) Fail(ErrorKind::kConfig, "need at least one feature group");
  const auto manifest = model.manifest.AllColumns();
  std::set<std::pair<Eigen::Index, Eigen::Index>> used;
  for (const auto& g : groups.groups) {
    if (g.step >= steps) {
      Fail(ErrorKind::kDimension, "group '" + g.name + "' step is outside the instance");
    }
    std::vector<Cell> cells;
    for (const auto& c : g.columns) {
      if (std::find(manifest.begin(), manifest.end(), c) == manifest.end()) {
        Fail(ErrorKind::kSchema, "group '" + g.name + "' column '" + c +
                                     "' is not a model input");
      }
      auto it = std::find(spec_.columns.begin(), spec_.columns.end(), c);
      if (it == spec_.columns.end()) {
        Fail(ErrorKind::kSchema, "instance has no column '" + c + "'");
      }
      const auto col = static_cast<Eigen::Index>(it - spec_.columns.begin());
      const Eigen::Index lo = g.step < 0 ? 0 : g.step;
      const Eigen::Index hi = g.step < 0 ? steps : g.step + 1;
      for (Eigen::Index t = lo; t < hi; ++t) {
        if (!used.insert({t, col}).second) {
          Fail(ErrorKind::kConfig, "column '" + c + "' belongs to more than one group");
        }
        cells.push_back({t, col});
      }
    }
    group_cells_.push_back(std::move(cells));
  }
}

void MaskedModelGame::Evaluate(std::span<const Coalition> coalitions,
                               std::span<double> out) const {
  std::vector<Eigen::MatrixXd> masked(coalitions.size(), spec_.instance);
  std::vector<const Eigen::MatrixXd*> inputs;
  for (std::size_t i = 0; i < coalitions.size(); ++i) {
    if (coalitions[i].size() != group_cells_.size()) {
      Fail(ErrorKind::kDimension, "coalition size does not match the group count");
    }
    for (std::size_t g = 0; g < group_cells_.size(); ++g) {
      if (coalitions[i][g]) continue;
      for (const Cell& cell : group_cells_[g]) {
        masked[i](cell.step, cell.column) = spec_.baseline(cell.column);
      }
    }
    inputs.push_back(&masked[i]);
  }
  const Eigen::VectorXd scaled = forecast::PredictScaled(model_, spec_.columns, inputs);
  const auto& range = model_.scaler.Range(market::kTargetColumn);
  for (std::size_t i = 0; i < coalitions.size(); ++i) {
    const double price = market::InvertValue(scaled(static_cast<Eigen::Index>(i)), range);
    out[i] = spec_.mode == ValueMode::kPrediction ? price : -std::abs(price - spec_.actual);
  }
}

double MaskedValue(const ValueFunctionSpec& spec, const FeatureGroups& groups,
                   const Coalition& coalition, const forecast::ForecastModel& model) {
  const MaskedModelGame game(model, spec, groups);
  double v = 0.0;
  game.Evaluate(std::span<const Coalition>(&coalition, 1), std::span<double>(&v, 1));
  return v;
}

Attribution ExactGroupShap(const ValueFunctionSpec& spec, const FeatureGroups& groups,
                           const forecast::ForecastModel& model) {
  if (groups.size() > static_cast<std::size_t>(kMaxExactPlayers)) {
    Fail(ErrorKind::kEnumerationLimit,
         std::to_string(groups.size()) + " groups exceed the exact limit of " +
             std::to_string(kMaxExactPlayers) + "; use sampled attribution instead");
  }
  return ExactShapley(MaskedModelGame(model, spec, groups));
}

Attribution SampledShap(const ValueFunctionSpec& spec, const FeatureGroups& units,
                        const forecast::ForecastModel& model, const SamplingOptions& options) {
  return SampledShapley(MaskedModelGame(model, spec, units), options);
}

FeatureGroups SingletonUnits(std::span<const std::string> columns) {
  FeatureGroups units;
  for (const auto& c : columns) units.groups.push_back({c, {c}});
  return units;
}

FeatureGroups CellUnits(std::span<const std::string> columns, int steps) {
  FeatureGroups units;
  for (int t = 0; t < steps; ++t) {
    for (const auto& c : columns) units.groups.push_back({c + "@" + std::to_string(t), {c}, t});
  }
  return units;
}

nlohmann::json AttributionToJson(const Attribution& a, const FeatureGroups& groups) {
  nlohmann::json phi = nlohmann::json::object();
  for (std::size_t g = 0; g < a.phi.size(); ++g) phi[groups.groups[g].name] = a.phi[g];
  nlohmann::json out{{"phi", std::move(phi)},
                     {"v_empty", a.v_empty},
                     {"v_full", a.v_full},
                     {"efficiency_residual", a.efficiency_residual},
                     {"evaluations", a.evaluations},
                     {"wall_ms", a.wall_ms}};
  if (!a.standard_error.empty()) {
    nlohmann::json se = nlohmann::json::object();
    for (std::size_t g = 0; g < a.standard_error.size(); ++g) {
      se[groups.groups[g].name] = a.standard_error[g];
    }
    out["standard_error"] = std::move(se);
  }
  return out;
}

}  // namespace gshap::shap
