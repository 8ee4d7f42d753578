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

#ifndef WHALE_EVAL_NORMALIZE_H_
#define WHALE_EVAL_NORMALIZE_H_

#include <string>

namespace whale {

// Bumped whenever a rule below changes; the golden fixtures pin it.
inline constexpr const char* kNormalizerVersion = "whale-norm-1";

// Languages scored by character error rate.
bool IsCharacterScored(const std::string& language);

// Rules, in order:
//   1. lowercase ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters
//   2. replace punctuation and symbols (see IsPunctuation) with a space
//   3. collapse runs of whitespace to one space, trim both ends
//   4. character-scored languages: drop every space
// Invalid UTF-8 bytes are kept as-is.
std::string NormalizeText(const std::string& text, const std::string& language);

bool IsPunctuation(char32_t c);
char32_t ToLower(char32_t c);

}  // namespace whale

#endif  // WHALE_EVAL_NORMALIZE_H_
