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

#ifndef GSHAP_SHAPLEY_HPP_
#define GSHAP_SHAPLEY_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gshap/gru_forecaster.hpp"
#include "json.hpp"

namespace gshap::shap {

// Membership flags, one per player (group or token unit).
using Coalition = std::vector<bool>;

// A cooperative game over `players()` players. Implementations evaluate many
// coalitions per call so model-backed games can batch their forward passes.
class ValueFunction {
 public:
  virtual ~ValueFunction() = default;
  virtual std::size_t players() const = 0;
  virtual void Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const = 0;
};

// Adapts a per-coalition callable; handy for synthetic games.
class CallableGame final : public ValueFunction {
 public:
  CallableGame(std::size_t players, std::function<double(const Coalition&)> fn)
      : players_(players), fn_(std::move(fn)) {}
  std::size_t players() const override { return players_; }
  void Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const override;

 private:
  std::size_t players_;
  std::function<double(const Coalition&)> fn_;
};

// v given as a table indexed by the coalition bitmask (bit g = player g).
class TableGame final : public ValueFunction {
 public:
  explicit TableGame(std::vector<double> table);
  std::size_t players() const override { return players_; }
  void Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const override;

 private:
  std::size_t players_;
  std::vector<double> table_;
};

std::uint64_t CoalitionMask(const Coalition& coalition);

// s! (n-s-1)! / n!, the weight of a coalition of size s excluding the player.
double ShapleyWeight(int coalition_size, int players);

struct Attribution {
  std::vector<double> phi;
  std::vector<double> standard_error;  // sampled mode only
  double v_empty = 0.0;
  double v_full = 0.0;
  double efficiency_residual = 0.0;  // |sum(phi) - (v_full - v_empty)|
  std::uint64_t evaluations = 0;
  double wall_ms = 0.0;
};

inline constexpr int kMaxExactPlayers = 20;

// Exact Shapley values by evaluating every coalition once (2^n evaluations)
// and summing weighted marginal contributions in ascending mask order.
// n > kMaxExactPlayers raises kEnumerationLimit.
Attribution ExactShapley(const ValueFunction& game);

struct SamplingOptions {
  int budget = 10;  // permutations
  std::uint64_t seed = 0;
  // Walk every permutation instead of sampling (small n only).
  bool exhaustive = false;
};

// Monte-Carlo permutation estimator: each permutation adds players one at a
// time and credits each marginal contribution. Evaluations reported as
// budget * n + 2 (v(empty) and v(full) are evaluated once up front).
Attribution SampledShapley(const ValueFunction& game, const SamplingOptions& options);

struct CoalitionCount {
  std::optional<std::uint64_t> value;  // empty when saturated
  bool saturated = false;
  std::string exact;  // decimal text of 2^k - 1
};

// Number of nonempty coalitions over k players.
CoalitionCount CountCoalitions(int players);

// --- masking value function over a trained forecaster ----------------------

enum class ValueMode { kPrediction, kErrorReduction };
std::string ValueModeName(ValueMode mode);
ValueMode ParseValueMode(const std::string& name);

struct FeatureGroup {
  std::string name;
  std::vector<std::string> columns;
  int step = -1;  // -1 masks the columns at every time step
};

// Disjoint named cell sets, each treated as one player.
struct FeatureGroups {
  std::vector<FeatureGroup> groups;
  std::size_t size() const { return groups.size(); }
};

struct ValueFunctionSpec {
  Eigen::VectorXd baseline;       // per input column, scaled space
  Eigen::MatrixXd instance;       // steps x columns, scaled
  std::vector<std::string> columns;
  ValueMode mode = ValueMode::kPrediction;
  double actual = 0.0;            // price units, for kErrorReduction
};

// Per-column means over the given rows of a scaled matrix.
Eigen::VectorXd ColumnMeans(const Eigen::MatrixXd& values, std::size_t begin, std::size_t end);

// v(S): columns of groups outside S are replaced by the baseline at every
// step, columns in no group stay untouched, and the model is run without
// dropout. kPrediction returns the price-unit forecast; kErrorReduction
// returns -|forecast - actual|.
class MaskedModelGame final : public ValueFunction {
 public:
  MaskedModelGame(const forecast::ForecastModel& model, ValueFunctionSpec spec,
                  const FeatureGroups& groups);
  std::size_t players() const override { return group_cells_.size(); }
  void Evaluate(std::span<const Coalition> coalitions, std::span<double> out) const override;

 private:
  const forecast::ForecastModel& model_;
  ValueFunctionSpec spec_;
  struct Cell {
    Eigen::Index step;
    Eigen::Index column;
  };
  std::vector<std::vector<Cell>> group_cells_;
};

double MaskedValue(const ValueFunctionSpec& spec, const FeatureGroups& groups,
                   const Coalition& coalition, const forecast::ForecastModel& model);

Attribution ExactGroupShap(const ValueFunctionSpec& spec, const FeatureGroups& groups,
                           const forecast::ForecastModel& model);
Attribution SampledShap(const ValueFunctionSpec& spec, const FeatureGroups& units,
                        const forecast::ForecastModel& model, const SamplingOptions& options);

// One player per listed column.
FeatureGroups SingletonUnits(std::span<const std::string> columns);
// One player per (step, column) cell of a steps x columns instance, named "column@step".
FeatureGroups CellUnits(std::span<const std::string> columns, int steps);

nlohmann::json AttributionToJson(const Attribution& a, const FeatureGroups& groups);

}  // namespace gshap::shap

#endif  // GSHAP_SHAPLEY_HPP_
