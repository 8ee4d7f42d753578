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

#include "eval/normalize.h"

#include <vector>

namespace whale {

namespace {

// Decodes one code point at s[i]; returns false on malformed input.
bool DecodeUtf8(const std::string& s, size_t& i, char32_t& out) {
  const unsigned char c = s[i];
  int len = 0;
  char32_t cp = 0;
  if (c < 0x80) {
    out = c;
    ++i;
    return true;
  } else if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    return false;
  }
  if (i + len > s.size()) return false;
  for (int k = 1; k < len; ++k) {
    const unsigned char cc = s[i + k];
    if ((cc & 0xC0) != 0x80) return false;
    cp = (cp << 6) | (cc & 0x3F);
  }
  i += len;
  out = cp;
  return true;
}

void EncodeUtf8(char32_t c, std::string& out) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

bool IsSpace(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' ||
         c == 0x00A0 || c == 0x3000 || (c >= 0x2000 && c <= 0x200A);
}

}  // namespace

bool IsCharacterScored(const std::string& language) {
  return language == "ja" || language == "zh" || language == "yue";
}

bool IsPunctuation(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  if (c >= 0x00A1 && c <= 0x00BF) return c != 0x00AA && c != 0x00B5 && c != 0x00BA;
  if (c == 0x00D7 || c == 0x00F7) return true;
  if (c >= 0x200B && c <= 0x206F) return true;   // general punctuation
  if (c >= 0x2190 && c <= 0x21FF) return true;   // arrows
  if (c >= 0x3001 && c <= 0x3003) return true;   // 、。〃
  if (c >= 0x3008 && c <= 0x3011) return true;   // CJK brackets
  if (c >= 0x3014 && c <= 0x301F) return true;
  if (c == 0x30FB) return true;                  // katakana middle dot
  if (c >= 0xFF01 && c <= 0xFF0F) return true;   // fullwidth forms
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  return false;
}

char32_t ToLower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) return c + 32;
  if (c == 0x0178) return 0x00FF;
  if (c >= 0x0100 && c <= 0x017F) {
    // Latin Extended-A alternates upper/lower, with a parity flip at 0x0138.
    if (c == 0x0130 || c == 0x0138 || c == 0x0149 || c == 0x017F) return c;
    const bool odd_upper = (c >= 0x0139 && c <= 0x0148) || (c >= 0x0179 && c <= 0x017E);
    const bool upper = odd_upper ? (c & 1) : !(c & 1);
    return upper ? c + 1 : c;
  }
  if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;
  if (c >= 0x0410 && c <= 0x042F) return c + 32;
  if (c >= 0x0400 && c <= 0x040F) return c + 80;
  return c;
}

std::string NormalizeText(const std::string& text, const std::string& language) {
  const bool drop_spaces = IsCharacterScored(language);
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  size_t i = 0;
  while (i < text.size()) {
    char32_t c;
    const size_t at = i;
    if (!DecodeUtf8(text, i, c)) {
      if (pending_space && !out.empty() && !drop_spaces) out.push_back(' ');
      pending_space = false;
      out.push_back(text[at]);
      i = at + 1;
      continue;
    }
    c = ToLower(c);
    if (IsSpace(c) || IsPunctuation(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && !drop_spaces) out.push_back(' ');
    pending_space = false;
    EncodeUtf8(c, out);
  }
  return out;
}

}  // namespace whale
