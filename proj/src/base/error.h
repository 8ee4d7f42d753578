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

#ifndef WHALE_BASE_ERROR_H_
#define WHALE_BASE_ERROR_H_

#include <stdexcept>
#include <string>

namespace whale {

enum class ErrorKind {
  kShape,
  kNumeric,
  kValidation,
  kInputTooShort,
  kImpossibleAlignment,
  kUnknownLanguage,
  kVocab,
  kLength,
  kGraph,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

// Validation-class errors are caused by bad user input and map to exit
// code 1; everything else is a runtime failure (exit code 2).
bool IsValidationKind(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

#define WHALE_DEFINE_ERROR(Name, Kind)                     \
  class Name : public Error {                              \
   public:                                                 \
    explicit Name(const std::string& what)                 \
        : Error(ErrorKind::Kind, what) {}                  \
  };

WHALE_DEFINE_ERROR(ShapeError, kShape)
WHALE_DEFINE_ERROR(NumericError, kNumeric)
WHALE_DEFINE_ERROR(ValidationError, kValidation)
WHALE_DEFINE_ERROR(InputTooShortError, kInputTooShort)
WHALE_DEFINE_ERROR(ImpossibleAlignmentError, kImpossibleAlignment)
WHALE_DEFINE_ERROR(UnknownLanguageError, kUnknownLanguage)
WHALE_DEFINE_ERROR(VocabError, kVocab)
WHALE_DEFINE_ERROR(LengthError, kLength)
WHALE_DEFINE_ERROR(GraphError, kGraph)
WHALE_DEFINE_ERROR(IoError, kIo)

#undef WHALE_DEFINE_ERROR

}  // namespace whale

#endif  // WHALE_BASE_ERROR_H_
