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

#include "pipeline/pipeline.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "base/error.h"
#include "data/features.h"
#include "eval/normalize.h"
#include "json.hpp"
#include "selfcond/selfcond.h"

namespace whale {

DecodeResult DecodeFeatures(const AsrModel& model, const Tensor& features,
                            const std::string& language, const DecodeOptions& opts) {
  NoGradGuard no_grad;
  const Vocab& vocab = model.vocab();
  const int lang_token = vocab.language(language).token_id;
  std::unique_ptr<LanguageMask> mask;
  if (!opts.adapt_language.empty()) {
    mask = std::make_unique<LanguageMask>(
        BuildLanguageMask(opts.adapt_language, vocab, opts.mask_epsilon));
  }
  const Tensor ssl = model.ssl().ExtractFeatures(features);
  const EncoderOutput enc = model.encoder().Encode(ssl, RunMode::Eval(), mask.get());

  BeamConfig beam = opts.beam;
  beam.max_len = std::min(beam.max_len, model.config().decoder.max_target_len - 2);
  DecoderScorer att(model.decoder(), enc);
  const std::vector<int> start = {vocab.sos_id(), lang_token};
  const std::vector<int> labels = vocab.CharacterIds();
  SearchResult r = JointBeamSearch(enc.ctc_log_posteriors, att, start, labels,
                                   vocab.eos_id(), beam, vocab.blank_id());
  DecodeResult out;
  out.language = language;
  out.truncated = r.truncated;
  if (!r.nbest.empty()) {
    const Hypothesis& h = r.nbest[0];
    out.tokens = h.tokens;
    out.text = vocab.Decode(h.tokens);
    out.joint = h.joint;
    out.ctc = h.ctc_logprob;
    out.att = h.att_logprob;
  }
  if (beam.nbest > 1) {
    for (const Hypothesis& h : r.nbest) out.nbest.emplace_back(vocab.Decode(h.tokens), h.joint);
  }
  return out;
}

std::vector<DecodeResult> DecodeManifest(const AsrModel& model, const Manifest& data,
                                         const DecodeOptions& opts) {
  opts.beam.Validate();
  std::vector<DecodeResult> results(data.entries.size());
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < data.entries.size();) {
      try {
        const ManifestEntry& e = data.entries[k];
        const Tensor feats = ReadFeatures(data.ResolvePath(e)).ToTensor();
        const std::string lang = opts.language.empty() ? e.language : opts.language;
        results[k] = DecodeFeatures(model, feats, lang, opts);
        results[k].utt_id = e.utt_id;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads =
      std::max(1, std::min<int>(WorkerThreads(), static_cast<int>(data.entries.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::string DecodeResultsToJsonl(const std::vector<DecodeResult>& results) {
  std::string out;
  for (const DecodeResult& r : results) {
    nlohmann::ordered_json j;
    j["utt_id"] = r.utt_id;
    j["text"] = r.text;
    j["joint"] = r.joint;
    j["ctc"] = r.ctc;
    j["att"] = r.att;
    j["truncated"] = r.truncated;
    j["language"] = r.language;
    if (!r.nbest.empty()) {
      nlohmann::ordered_json alts = nlohmann::ordered_json::array();
      for (const auto& [text, joint] : r.nbest) alts.push_back({{"text", text}, {"joint", joint}});
      j["nbest"] = alts;
    }
    out += j.dump();
    out += "\n";
  }
  return out;
}

void WriteDecodeResults(const std::string& path, const std::vector<DecodeResult>& results) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << DecodeResultsToJsonl(results);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TextRecord> ReferenceRecords(const Manifest& data) {
  std::vector<TextRecord> out;
  for (const ManifestEntry& e : data.entries) out.push_back({e.utt_id, e.transcript, e.language});
  return out;
}

std::vector<TextRecord> HypothesisRecords(const std::vector<DecodeResult>& results) {
  std::vector<TextRecord> out;
  for (const DecodeResult& r : results) out.push_back({r.utt_id, r.text, r.language});
  return out;
}

double CorpusCer(const std::vector<TextRecord>& refs, const std::vector<TextRecord>& hyps) {
  std::map<std::string, const TextRecord*> by_id;
  for (const TextRecord& h : hyps) by_id[h.utt_id] = &h;
  long errors = 0, units = 0;
  for (const TextRecord& r : refs) {
    auto it = by_id.find(r.utt_id);
    const std::string hyp = it == by_id.end() ? "" : it->second->text;
    const auto ru = ScoringUnits(NormalizeText(r.text, r.language), Metric::kCer);
    const auto hu = ScoringUnits(NormalizeText(hyp, r.language), Metric::kCer);
    errors += EditDistance(ru, hu).total();
    units += static_cast<long>(ru.size());
  }
  return units ? static_cast<double>(errors) / static_cast<double>(units) : 0.0;
}

}  // namespace whale
