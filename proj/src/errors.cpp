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

#include "gshap/errors.hpp"

namespace gshap {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIntegrity: return "integrity error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kEmptyWindow: return "empty-window error";
    case ErrorKind::kAlignment: return "alignment error";
    case ErrorKind::kInsufficientData: return "insufficient-data error";
    case ErrorKind::kDegenerate: return "degenerate-input error";
    case ErrorKind::kUnderDetermined: return "under-determined clustering error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kEnumerationLimit: return "enumeration-limit error";
    case ErrorKind::kNumerical: return "numerical failure";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kConfig:
      return 1;
    case ErrorKind::kNumerical:
      return 3;
    default:
      return 2;
  }
}

void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(ErrorKindName(kind)) + ": " + message);
}

}  // namespace gshap
