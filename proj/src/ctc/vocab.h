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

#ifndef WHALE_CTC_VOCAB_H_
#define WHALE_CTC_VOCAB_H_

#include <map>
#include <span>
#include <string>
#include <vector>

namespace whale {

// Splits UTF-8 text into code points (each returned as its byte string).
// Invalid bytes are passed through one at a time.
std::vector<std::string> SplitUtf8(const std::string& text);

// Shared label space of the CTC branch and the decoder.
//
// Layout: id 0 is the CTC blank, then the characters, then <sos>, <eos>,
// and one <xx> token per language. Characters are the only CTC-emittable
// labels; the special tokens are decoder-side.
class Vocab {
 public:
  struct Language {
    std::string code;
    int token_id = -1;
    std::vector<int> charset;  // sorted character ids
  };

  static constexpr int kBlankId = 0;

  Vocab() = default;

  // `charsets` maps language code to its characters. The character list is
  // the sorted union of all charsets.
  static Vocab Build(const std::map<std::string, std::vector<std::string>>& charsets);

  static Vocab Load(const std::string& path);
  void Save(const std::string& path) const;
  std::string ToJson() const;
  static Vocab FromJson(const std::string& json);

  int size() const { return static_cast<int>(tokens_.size()); }
  int blank_id() const { return kBlankId; }
  int sos_id() const { return sos_id_; }
  int eos_id() const { return eos_id_; }

  const std::string& token(int id) const { return tokens_.at(id); }
  // Throws VocabError for unknown tokens.
  int TokenId(const std::string& token) const;
  bool IsCharacter(int id) const { return id > 0 && id < sos_id_; }
  // Character ids in ascending order.
  std::vector<int> CharacterIds() const;

  std::vector<std::string> LanguageCodes() const;
  bool HasLanguage(const std::string& code) const;
  // Throws UnknownLanguageError.
  const Language& language(const std::string& code) const;

  // Text -> character ids (one per code point). Throws VocabError on
  // characters outside the vocabulary.
  std::vector<int> Encode(const std::string& text) const;
  // Character ids -> text; special tokens are skipped.
  std::string Decode(std::span<const int> ids) const;

 private:
  void Index();

  std::vector<std::string> tokens_;
  std::map<std::string, int> ids_;
  std::map<std::string, Language> languages_;
  int sos_id_ = -1;
  int eos_id_ = -1;
};

}  // namespace whale

#endif  // WHALE_CTC_VOCAB_H_
