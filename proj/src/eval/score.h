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

#ifndef WHALE_EVAL_SCORE_H_
#define WHALE_EVAL_SCORE_H_

#include <map>
#include <string>
#include <vector>

namespace whale {

struct EditOps {
  long sub = 0;
  long del = 0;
  long ins = 0;
  long total() const { return sub + del + ins; }
};

// Unit-cost Levenshtein. Among minimal alignments the one with the most
// substitutions is chosen, which also fixes D and I.
EditOps EditDistance(const std::vector<std::string>& ref,
                     const std::vector<std::string>& hyp);

enum class Metric { kWer, kCer };
enum class ResourceRank { kHigh, kMiddle, kLow };

const char* MetricName(Metric m);
const char* RankName(ResourceRank r);
Metric MetricFor(const std::string& language);
ResourceRank RankForHours(double hours);

// Splits normalized text into scoring units: words for WER, characters for CER.
std::vector<std::string> ScoringUnits(const std::string& normalized, Metric metric);

struct TextRecord {
  std::string utt_id;
  std::string text;
  std::string language;
};

struct LanguageScore {
  std::string language;
  Metric metric = Metric::kWer;
  std::string rank;  // "High" | "Middle" | "Low" | "Unranked"
  double hours = -1.0;
  long num_utts = 0;
  EditOps ops;
  long num_ref_units = 0;
  double error_rate() const;
};

struct RankScore {
  std::string rank;
  std::vector<std::string> languages;
  EditOps ops;
  long num_ref_units = 0;
  double error_rate() const;
};

struct ScoreReport {
  std::vector<LanguageScore> languages;  // sorted by language code
  std::vector<RankScore> ranks;          // High, Middle, Low, Unranked (non-empty only)
  std::vector<std::string> errors;

  std::string ToText() const;
  std::string ToJson() const;  // stable key order and formatting
};

ScoreReport ScoreCorpus(const std::vector<TextRecord>& refs,
                        const std::vector<TextRecord>& hyps,
                        const std::map<std::string, double>& hours);

// JSON lines with utt_id, language and "text" (or "transcript").
std::vector<TextRecord> ReadTextRecords(const std::string& path);
std::map<std::string, double> ReadHoursTable(const std::string& path);
void WriteTextRecords(const std::string& path, const std::vector<TextRecord>& records);

// Writes report.txt and report.json into `dir`.
void WriteReport(const ScoreReport& report, const std::string& dir);

}  // namespace whale

#endif  // WHALE_EVAL_SCORE_H_
