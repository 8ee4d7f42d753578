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

#ifndef WHALE_PIPELINE_PIPELINE_H_
#define WHALE_PIPELINE_PIPELINE_H_

#include <string>
#include <vector>

#include "data/manifest.h"
#include "eval/score.h"
#include "model/asr_model.h"
#include "search/beam_search.h"

namespace whale {

struct DecodeOptions {
  BeamConfig beam;
  std::string language;        // decoder language token; empty: the manifest's
  std::string adapt_language;  // language mask at encoder taps; empty: none
  double mask_epsilon = 1e-4;
};

struct DecodeResult {
  std::string utt_id;
  std::string language;
  std::string text;
  std::vector<int> tokens;
  double joint = 0;
  double ctc = 0;
  double att = 0;
  bool truncated = false;
  std::vector<std::pair<std::string, double>> nbest;  // (text, joint), when nbest > 1
};

// Runs SSL -> encoder -> joint beam search on one utterance.
DecodeResult DecodeFeatures(const AsrModel& model, const Tensor& features,
                            const std::string& language, const DecodeOptions& opts);

// Decodes every entry; utterances run in parallel on WHALE_KIT_THREADS
// workers, output order follows the manifest.
std::vector<DecodeResult> DecodeManifest(const AsrModel& model, const Manifest& data,
                                         const DecodeOptions& opts);

// JSON lines {utt_id, text, joint, ctc, att, truncated, language[, nbest]}.
std::string DecodeResultsToJsonl(const std::vector<DecodeResult>& results);
void WriteDecodeResults(const std::string& path, const std::vector<DecodeResult>& results);
std::vector<TextRecord> ReferenceRecords(const Manifest& data);
std::vector<TextRecord> HypothesisRecords(const std::vector<DecodeResult>& results);

// Character error rate over a corpus (normalized text, spaces excluded).
double CorpusCer(const std::vector<TextRecord>& refs, const std::vector<TextRecord>& hyps);

}  // namespace whale

#endif  // WHALE_PIPELINE_PIPELINE_H_
