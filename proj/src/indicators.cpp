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

#include "gshap/indicators.hpp"

#include <string>

#include "gshap/errors.hpp"

namespace gshap::market {

namespace {

void RequirePositivePeriod(int n, const char* what) {
  if (n < 1) {
    Fail(ErrorKind::kConfig, std::string(what) + " period must be >= 1, got " +
                                 std::to_string(n));
  }
}

void RequireLength(std::size_t length, std::size_t needed, const char* what) {
  if (length < needed) {
    Fail(ErrorKind::kEmptyWindow, std::string(what) + " needs " +
                                      std::to_string(needed) + " values, got " +
                                      std::to_string(length));
  }
}

}  // namespace

Series ComputeSma(std::span<const double> close, int n) {
  RequirePositivePeriod(n, "SMA");
  const auto window = static_cast<std::size_t>(n);
  RequireLength(close.size(), window, "SMA");
  Series out(close.size(), kUndefined);
  for (std::size_t t = window - 1; t < close.size(); ++t) {
    double sum = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) sum += close[i];
    out[t] = sum / static_cast<double>(window);
  }
  return out;
}

Series ComputeEma(std::span<const double> close, int n) {
  RequirePositivePeriod(n, "EMA");
  RequireLength(close.size(), 1, "EMA");
  const double alpha = 2.0 / (static_cast<double>(n) + 1.0);
  Series out(close.size());
  out[0] = close[0];
  for (std::size_t t = 1; t < close.size(); ++t) {
    out[t] = alpha * close[t] + (1.0 - alpha) * out[t - 1];
  }
  return out;
}

Series ComputeRsi(std::span<const double> close, int n) {
  RequirePositivePeriod(n, "RSI");
  const auto period = static_cast<std::size_t>(n);
  RequireLength(close.size(), period + 1, "RSI");

  auto rsi = [](double gain, double loss) {
    if (gain == 0.0 && loss == 0.0) return 50.0;
    if (loss == 0.0) return 100.0;
    return 100.0 - 100.0 / (1.0 + gain / loss);
  };

  Series out(close.size(), kUndefined);
  double avg_gain = 0.0;
  double avg_loss = 0.0;
  for (std::size_t t = 1; t <= period; ++t) {
    const double change = close[t] - close[t - 1];
    if (change > 0) avg_gain += change;
    else avg_loss -= change;
  }
  avg_gain /= static_cast<double>(period);
  avg_loss /= static_cast<double>(period);
  out[period] = rsi(avg_gain, avg_loss);

  const double keep = static_cast<double>(period - 1);
  for (std::size_t t = period + 1; t < close.size(); ++t) {
    const double change = close[t] - close[t - 1];
    const double gain = change > 0 ? change : 0.0;
    const double loss = change < 0 ? -change : 0.0;
    avg_gain = (avg_gain * keep + gain) / static_cast<double>(period);
    avg_loss = (avg_loss * keep + loss) / static_cast<double>(period);
    out[t] = rsi(avg_gain, avg_loss);
  }
  return out;
}

Macd ComputeMacd(std::span<const double> close, int fast, int slow, int signal) {
  if (fast >= slow) {
    Fail(ErrorKind::kConfig, "MACD fast span (" + std::to_string(fast) +
                                 ") must be shorter than slow span (" +
                                 std::to_string(slow) + ")");
  }
  const Series fast_ema = ComputeEma(close, fast);
  const Series slow_ema = ComputeEma(close, slow);
  Macd out;
  out.macd.resize(close.size());
  for (std::size_t t = 0; t < close.size(); ++t) {
    out.macd[t] = fast_ema[t] - slow_ema[t];
  }
  out.signal = ComputeEma(out.macd, signal);
  out.histogram.resize(close.size());
  for (std::size_t t = 0; t < close.size(); ++t) {
    out.histogram[t] = out.macd[t] - out.signal[t];
  }
  return out;
}

Bollinger ComputeBollinger(std::span<const double> close, int n, double k) {
  if (n < 2) {
    Fail(ErrorKind::kConfig, "Bollinger window must be >= 2, got " + std::to_string(n));
  }
  Bollinger out;
  out.mid = ComputeSma(close, n);
  out.upper.assign(close.size(), kUndefined);
  out.lower.assign(close.size(), kUndefined);
  const auto window = static_cast<std::size_t>(n);
  for (std::size_t t = window - 1; t < close.size(); ++t) {
    double ss = 0.0;
    for (std::size_t i = t + 1 - window; i <= t; ++i) {
      const double d = close[i] - out.mid[t];
      ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(window));
    out.upper[t] = out.mid[t] + k * sigma;
    out.lower[t] = out.mid[t] - k * sigma;
  }
  return out;
}

}  // namespace gshap::market
