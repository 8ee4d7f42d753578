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

#ifndef WHALE_DATA_SYNTHETIC_H_
#define WHALE_DATA_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ctc/vocab.h"
#include "data/manifest.h"

namespace whale {

struct SyntheticLanguage {
  std::string code;
  std::string charset;     // UTF-8 letters; a space is always added
  double hours = 0.0;      // training-split target
  int utterances = 0;      // when > 0, overrides `hours`
  int heldout = 0;         // held-out utterances
};

struct SyntheticSpec {
  std::vector<SyntheticLanguage> languages;
  int feature_dim = 16;
  double tokens_per_second = 10.0;
  int frame_jitter = 2;        // +/- frames per token segment
  int max_gap_frames = 2;      // silence frames drawn in [0, max] between tokens
  double noise = 0.35;
  double template_scale = 1.0;
  int min_words = 2;
  int max_words = 4;
  int min_word_len = 2;
  int max_word_len = 4;
  uint64_t seed = 7;

  void Validate() const;
  static SyntheticSpec FromJson(const std::string& json);
  std::string ToJson() const;
  static SyntheticSpec Load(const std::string& path);

  // Two languages with overlapping charsets, 10 training and 10 held-out
  // utterances each.
  static SyntheticSpec Toy();
};

struct SyntheticCorpus {
  Manifest train;
  Manifest heldout;
  Vocab vocab;
};

// Writes into out_dir:
//   feats/<utt_id>.f32, train.jsonl, heldout.jsonl, vocab.json, hours.jsonl, spec.json
// Output bytes depend only on the spec (not on WHALE_KIT_THREADS).
SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec, const std::string& out_dir);

// Builds the vocabulary implied by a spec.
Vocab SyntheticVocab(const SyntheticSpec& spec);

// Per-character template means, indexed like Vocab::CharacterIds().
std::vector<std::vector<float>> TokenTemplates(const SyntheticSpec& spec, const Vocab& vocab);

}  // namespace whale

#endif  // WHALE_DATA_SYNTHETIC_H_
