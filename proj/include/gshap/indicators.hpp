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

#ifndef GSHAP_INDICATORS_HPP_
#define GSHAP_INDICATORS_HPP_

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace gshap::market {

// Indicator outputs are aligned with their input. Entries inside the warm-up
// prefix are undefined and hold quiet NaN.
using Series = std::vector<double>;

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool IsDefined(double v) { return !std::isnan(v); }

// Simple moving average over the trailing n closes. First n-1 entries undefined.
Series ComputeSma(std::span<const double> close, int n);

// Exponential moving average, alpha = 2/(n+1), seeded with close[0].
Series ComputeEma(std::span<const double> close, int n);

// Relative strength index with Wilder smoothing. The first defined entry is at
// index n (simple mean of the first n changes); later entries use
// avg = (avg*(n-1) + x)/n. A window with zero gain and zero loss reads 50.
Series ComputeRsi(std::span<const double> close, int n);

struct Macd {
  Series macd;
  Series signal;
  Series histogram;
};

// macd = EMA_fast - EMA_slow; signal = EMA_signal(macd).
Macd ComputeMacd(std::span<const double> close, int fast, int slow, int signal);

struct Bollinger {
  Series mid;
  Series upper;
  Series lower;
};

// mid = SMA_n; bands at mid +/- k * rolling population standard deviation.
Bollinger ComputeBollinger(std::span<const double> close, int n, double k);

}  // namespace gshap::market

#endif  // GSHAP_INDICATORS_HPP_
