// Copyright 2026 The whale-kit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "base/error.h"

namespace whale {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kInputTooShort: return "input-too-short";
    case ErrorKind::kImpossibleAlignment: return "impossible-alignment";
    case ErrorKind::kUnknownLanguage: return "unknown-language";
    case ErrorKind::kVocab: return "vocab";
    case ErrorKind::kLength: return "length";
    case ErrorKind::kGraph: return "graph";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

bool IsValidationKind(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape:
    case ErrorKind::kValidation:
    case ErrorKind::kInputTooShort:
    case ErrorKind::kUnknownLanguage:
    case ErrorKind::kVocab:
    case ErrorKind::kLength:
      return true;
    default:
      return false;
  }
}

}  // namespace whale
