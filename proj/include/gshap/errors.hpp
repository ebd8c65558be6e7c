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

#ifndef GSHAP_ERRORS_HPP_
#define GSHAP_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace gshap {

// Broad failure classes. Each maps onto one CLI exit code (see ExitCodeFor).
enum class ErrorKind {
  kUsage,             // bad command line or unknown command
  kConfig,            // invalid configuration value or precondition
  kParse,             // malformed input text
  kIntegrity,         // duplicate or out-of-order records
  kSchema,            // missing or unexpected columns / manifest mismatch
  kEmptyWindow,       // indicator window longer than the series
  kAlignment,         // series with no overlap with the calendar
  kInsufficientData,  // not enough rows / years for the requested operation
  kDegenerate,        // zero vectors, constant variance, nonpositive prices
  kUnderDetermined,   // fewer distinct points than clusters
  kDimension,         // tensor shape mismatch
  kDomain,            // argument outside the mathematical domain
  kEnumerationLimit,  // exact Shapley requested for too many groups
  kNumerical,         // non-finite activation or loss
  kIo,                // filesystem failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

std::string_view ErrorKindName(ErrorKind kind);

// 0 success, 1 usage error, 2 data error, 3 numerical failure.
int ExitCodeFor(ErrorKind kind);

[[noreturn]] void Fail(ErrorKind kind, const std::string& message);

}  // namespace gshap

#endif  // GSHAP_ERRORS_HPP_
