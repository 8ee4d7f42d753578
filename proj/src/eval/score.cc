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

#include "eval/score.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "base/error.h"
#include "ctc/vocab.h"
#include "eval/normalize.h"
#include "json.hpp"

namespace whale {

namespace {

// Lexicographic (edits, -substitutions) cost of an alignment prefix.
struct Cell {
  long edits = 0;
  long subs = 0;
  long dels = 0;
  bool Better(const Cell& o) const {
    if (edits != o.edits) return edits < o.edits;
    return subs > o.subs;
  }
};

double Rate(const EditOps& ops, long n) {
  if (n > 0) return static_cast<double>(ops.total()) / static_cast<double>(n);
  return ops.total() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string Percent(double rate) {
  if (!std::isfinite(rate)) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << rate * 100.0;
  return os.str();
}

nlohmann::ordered_json RateJson(double rate) {
  if (!std::isfinite(rate)) return nullptr;
  return rate;
}

void Accumulate(EditOps& into, const EditOps& e) {
  into.sub += e.sub;
  into.del += e.del;
  into.ins += e.ins;
}

}  // namespace

EditOps EditDistance(const std::vector<std::string>& ref,
                     const std::vector<std::string>& hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {static_cast<long>(j), 0, 0};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<long>(i), 0, static_cast<long>(i)};
    for (size_t j = 1; j <= m; ++j) {
      Cell diag = prev[j - 1];
      if (ref[i - 1] != hyp[j - 1]) {
        ++diag.edits;
        ++diag.subs;
      }
      Cell ins = cur[j - 1];
      ++ins.edits;
      Cell del = prev[j];
      ++del.edits;
      ++del.dels;
      Cell best = diag;
      if (ins.Better(best)) best = ins;
      if (del.Better(best)) best = del;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[m];
  EditOps ops;
  ops.sub = c.subs;
  ops.del = c.dels;
  ops.ins = c.edits - c.subs - c.dels;
  return ops;
}

const char* MetricName(Metric m) { return m == Metric::kCer ? "CER" : "WER"; }

const char* RankName(ResourceRank r) {
  switch (r) {
    case ResourceRank::kHigh:
      return "High";
    case ResourceRank::kMiddle:
      return "Middle";
    case ResourceRank::kLow:
      return "Low";
  }
  return "?";
}

Metric MetricFor(const std::string& language) {
  return IsCharacterScored(language) ? Metric::kCer : Metric::kWer;
}

ResourceRank RankForHours(double hours) {
  if (hours > 100.0) return ResourceRank::kHigh;
  if (hours >= 20.0) return ResourceRank::kMiddle;
  return ResourceRank::kLow;
}

std::vector<std::string> ScoringUnits(const std::string& normalized, Metric metric) {
  std::vector<std::string> units;
  if (metric == Metric::kCer) {
    for (std::string& ch : SplitUtf8(normalized)) {
      if (ch != " ") units.push_back(std::move(ch));
    }
    return units;
  }
  std::istringstream is(normalized);
  std::string w;
  while (is >> w) units.push_back(w);
  return units;
}

double LanguageScore::error_rate() const { return Rate(ops, num_ref_units); }
double RankScore::error_rate() const { return Rate(ops, num_ref_units); }

ScoreReport ScoreCorpus(const std::vector<TextRecord>& refs,
                        const std::vector<TextRecord>& hyps,
                        const std::map<std::string, double>& hours) {
  ScoreReport report;
  std::unordered_map<std::string, const TextRecord*> ref_by_id;
  for (const TextRecord& r : refs) {
    if (!ref_by_id.emplace(r.utt_id, &r).second) {
      report.errors.push_back(r.utt_id + ": duplicate reference");
    }
  }
  std::unordered_map<std::string, const TextRecord*> hyp_by_id;
  for (const TextRecord& h : hyps) {
    if (!ref_by_id.count(h.utt_id)) {
      report.errors.push_back(h.utt_id + ": missing reference");
      continue;
    }
    if (!hyp_by_id.emplace(h.utt_id, &h).second) {
      report.errors.push_back(h.utt_id + ": duplicate hypothesis");
    }
  }

  std::map<std::string, LanguageScore> by_lang;
  for (const TextRecord& r : refs) {
    if (ref_by_id.at(r.utt_id) != &r) continue;
    std::string hyp_text;
    auto it = hyp_by_id.find(r.utt_id);
    if (it == hyp_by_id.end()) {
      report.errors.push_back(r.utt_id + ": missing hypothesis, scored as empty");
    } else {
      hyp_text = it->second->text;
    }
    LanguageScore& ls = by_lang[r.language];
    ls.language = r.language;
    ls.metric = MetricFor(r.language);
    const auto ref_units = ScoringUnits(NormalizeText(r.text, r.language), ls.metric);
    const auto hyp_units = ScoringUnits(NormalizeText(hyp_text, r.language), ls.metric);
    Accumulate(ls.ops, EditDistance(ref_units, hyp_units));
    ls.num_ref_units += static_cast<long>(ref_units.size());
    ++ls.num_utts;
  }

  const std::vector<std::string> rank_order = {"High", "Middle", "Low", "Unranked"};
  std::map<std::string, RankScore> by_rank;
  for (auto& [code, ls] : by_lang) {
    auto h = hours.find(code);
    if (h == hours.end()) {
      ls.rank = "Unranked";
    } else {
      ls.hours = h->second;
      ls.rank = RankName(RankForHours(h->second));
    }
    RankScore& rs = by_rank[ls.rank];
    rs.rank = ls.rank;
    rs.languages.push_back(code);
    Accumulate(rs.ops, ls.ops);
    rs.num_ref_units += ls.num_ref_units;
    report.languages.push_back(ls);
  }
  for (const std::string& r : rank_order) {
    auto it = by_rank.find(r);
    if (it != by_rank.end()) report.ranks.push_back(it->second);
  }
  return report;
}

std::string ScoreReport::ToText() const {
  std::ostringstream os;
  os << "normalizer: " << kNormalizerVersion << "\n\n";
  os << std::left << std::setw(10) << "language" << std::setw(10) << "rank"
     << std::setw(8) << "metric" << std::right << std::setw(8) << "err%"
     << std::setw(8) << "S" << std::setw(8) << "D" << std::setw(8) << "I"
     << std::setw(10) << "N" << std::setw(8) << "utts" << "\n";
  for (const LanguageScore& l : languages) {
    os << std::left << std::setw(10) << l.language << std::setw(10) << l.rank
       << std::setw(8) << MetricName(l.metric) << std::right << std::setw(8)
       << Percent(l.error_rate()) << std::setw(8) << l.ops.sub << std::setw(8)
       << l.ops.del << std::setw(8) << l.ops.ins << std::setw(10) << l.num_ref_units
       << std::setw(8) << l.num_utts << "\n";
  }
  os << "\n" << std::left << std::setw(10) << "rank" << std::right << std::setw(8)
     << "err%" << std::setw(10) << "N" << "  languages\n";
  for (const RankScore& r : ranks) {
    os << std::left << std::setw(10) << r.rank << std::right << std::setw(8)
       << Percent(r.error_rate()) << std::setw(10) << r.num_ref_units << "  ";
    for (size_t i = 0; i < r.languages.size(); ++i) {
      os << (i ? "," : "") << r.languages[i];
    }
    os << "\n";
  }
  if (!errors.empty()) {
    os << "\nerrors:\n";
    for (const std::string& e : errors) os << "  " << e << "\n";
  }
  return os.str();
}

std::string ScoreReport::ToJson() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["normalizer"] = kNormalizerVersion;
  ordered_json langs = ordered_json::array();
  for (const LanguageScore& l : languages) {
    ordered_json o;
    o["language"] = l.language;
    o["metric"] = MetricName(l.metric);
    o["rank"] = l.rank;
    o["hours"] = l.hours >= 0 ? ordered_json(l.hours) : ordered_json(nullptr);
    o["error_rate"] = RateJson(l.error_rate());
    o["substitutions"] = l.ops.sub;
    o["deletions"] = l.ops.del;
    o["insertions"] = l.ops.ins;
    o["num_ref_units"] = l.num_ref_units;
    o["num_utts"] = l.num_utts;
    langs.push_back(o);
  }
  j["languages"] = langs;
  ordered_json ranks_j = ordered_json::array();
  for (const RankScore& r : ranks) {
    ordered_json o;
    o["rank"] = r.rank;
    o["languages"] = r.languages;
    o["error_rate"] = RateJson(r.error_rate());
    o["substitutions"] = r.ops.sub;
    o["deletions"] = r.ops.del;
    o["insertions"] = r.ops.ins;
    o["num_ref_units"] = r.num_ref_units;
    ranks_j.push_back(o);
  }
  j["ranks"] = ranks_j;
  j["errors"] = errors;
  return j.dump(2) + "\n";
}

std::vector<TextRecord> ReadTextRecords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TextRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      // Decode output carries "text"; manifests carry "transcript".
      std::string text = j.contains("text") ? j.at("text").get<std::string>()
                                            : j.value("transcript", std::string());
      out.push_back({j.at("utt_id").get<std::string>(), std::move(text),
                     j.at("language").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, double> ReadHoursTable(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out[j.at("language").get<std::string>()] = j.at("hours").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void WriteTextRecords(const std::string& path, const std::vector<TextRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const TextRecord& r : records) {
    nlohmann::ordered_json j;
    j["utt_id"] = r.utt_id;
    j["text"] = r.text;
    j["language"] = r.language;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void WriteReport(const ScoreReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream txt(base / "report.txt");
  std::ofstream js(base / "report.json");
  if (!txt || !js) throw IoError("cannot write report in " + dir);
  txt << report.ToText();
  js << report.ToJson();
  if (!txt || !js) throw IoError("report write failed in " + dir);
}

}  // namespace whale
