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

#include "ctc/vocab.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "base/error.h"
#include "json.hpp"

namespace whale {

std::vector<std::string> SplitUtf8(const std::string& text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = text[i];
    size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    if (i + len > text.size()) len = 1;
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

Vocab Vocab::Build(
    const std::map<std::string, std::vector<std::string>>& charsets) {
  if (charsets.empty()) throw ValidationError("vocab needs at least one language");
  std::set<std::string> chars;
  for (const auto& [code, list] : charsets) {
    if (list.empty()) {
      throw ValidationError("language '" + code + "' has an empty charset");
    }
    chars.insert(list.begin(), list.end());
  }
  Vocab v;
  v.tokens_.push_back("<blank>");
  for (const auto& c : chars) {
    if (c.empty() || c.front() == '<') {
      throw ValidationError("invalid character token '" + c + "'");
    }
    v.tokens_.push_back(c);
  }
  v.sos_id_ = static_cast<int>(v.tokens_.size());
  v.tokens_.push_back("<sos>");
  v.eos_id_ = static_cast<int>(v.tokens_.size());
  v.tokens_.push_back("<eos>");
  v.Index();
  for (const auto& [code, list] : charsets) {
    Language lang;
    lang.code = code;
    lang.token_id = static_cast<int>(v.tokens_.size());
    v.tokens_.push_back("<" + code + ">");
    for (const auto& c : list) lang.charset.push_back(v.ids_.at(c));
    std::sort(lang.charset.begin(), lang.charset.end());
    lang.charset.erase(std::unique(lang.charset.begin(), lang.charset.end()),
                       lang.charset.end());
    v.languages_[code] = std::move(lang);
  }
  v.Index();
  return v;
}

void Vocab::Index() {
  ids_.clear();
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw VocabError("duplicate token '" + tokens_[i] + "'");
    }
  }
}

int Vocab::TokenId(const std::string& token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) throw VocabError("token '" + token + "' not in vocabulary");
  return it->second;
}

std::vector<int> Vocab::CharacterIds() const {
  std::vector<int> ids;
  for (int i = 1; i < sos_id_; ++i) ids.push_back(i);
  return ids;
}

std::vector<std::string> Vocab::LanguageCodes() const {
  std::vector<std::string> codes;
  for (const auto& [code, lang] : languages_) codes.push_back(code);
  return codes;
}

bool Vocab::HasLanguage(const std::string& code) const {
  return languages_.count(code) > 0;
}

const Vocab::Language& Vocab::language(const std::string& code) const {
  auto it = languages_.find(code);
  if (it == languages_.end()) {
    throw UnknownLanguageError("language '" + code + "' is not in the vocabulary");
  }
  return it->second;
}

std::vector<int> Vocab::Encode(const std::string& text) const {
  std::vector<int> ids;
  for (const auto& cp : SplitUtf8(text)) {
    auto it = ids_.find(cp);
    if (it == ids_.end() || !IsCharacter(it->second)) {
      throw VocabError("character '" + cp + "' not in vocabulary");
    }
    ids.push_back(it->second);
  }
  return ids;
}

std::string Vocab::Decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (IsCharacter(id)) out += tokens_[id];
  }
  return out;
}

std::string Vocab::ToJson() const {
  nlohmann::ordered_json j;
  j["tokens"] = tokens_;
  j["blank_id"] = kBlankId;
  j["sos_id"] = sos_id_;
  j["eos_id"] = eos_id_;
  nlohmann::ordered_json langs = nlohmann::ordered_json::object();
  for (const auto& [code, lang] : languages_) {
    std::vector<std::string> chars;
    for (int id : lang.charset) chars.push_back(tokens_[id]);
    langs[code] = {{"token", tokens_[lang.token_id]}, {"charset", chars}};
  }
  j["languages"] = langs;
  return j.dump(1);
}

Vocab Vocab::FromJson(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const std::exception& e) {
    throw VocabError(std::string("malformed vocabulary file: ") + e.what());
  }
  Vocab v;
  try {
    v.tokens_ = j.at("tokens").get<std::vector<std::string>>();
    if (j.at("blank_id").get<int>() != kBlankId) {
      throw VocabError("blank must have id 0");
    }
    v.sos_id_ = j.at("sos_id").get<int>();
    v.eos_id_ = j.at("eos_id").get<int>();
    v.Index();
    if (v.sos_id_ <= 0 || v.eos_id_ != v.sos_id_ + 1 ||
        v.eos_id_ >= v.size()) {
      throw VocabError("special token ids out of layout");
    }
    for (const auto& [code, entry] : j.at("languages").items()) {
      Language lang;
      lang.code = code;
      lang.token_id = v.TokenId(entry.at("token").get<std::string>());
      for (const auto& c : entry.at("charset").get<std::vector<std::string>>()) {
        const int id = v.TokenId(c);
        if (!v.IsCharacter(id)) {
          throw VocabError("charset of '" + code + "' holds non-character '" +
                           c + "'");
        }
        lang.charset.push_back(id);
      }
      std::sort(lang.charset.begin(), lang.charset.end());
      v.languages_[code] = std::move(lang);
    }
  } catch (const nlohmann::json::exception& e) {
    throw VocabError(std::string("malformed vocabulary file: ") + e.what());
  }
  return v;
}

Vocab Vocab::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

void Vocab::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  out << ToJson() << "\n";
  if (!out) throw IoError("cannot write vocabulary " + path);
}

}  // namespace whale
