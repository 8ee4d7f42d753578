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

#include "data/synthetic.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "base/error.h"
#include "base/rng.h"
#include "data/features.h"
#include "json.hpp"
#include "ssl/frontend.h"

namespace whale {

namespace {

constexpr uint64_t kTemplateStream = 0x7e3a1f00;
constexpr uint64_t kUttStream = 0x5a17c0de;

std::vector<std::string> Letters(const SyntheticLanguage& l) {
  std::vector<std::string> out;
  for (std::string& c : SplitUtf8(l.charset)) {
    if (c != " ") out.push_back(std::move(c));
  }
  return out;
}

struct UttJob {
  std::string utt_id;
  std::string language;
  const std::vector<std::string>* letters;
  uint64_t seed;
};

struct UttResult {
  std::string transcript;
  FeatureMatrix feats;
};

UttResult Render(const SyntheticSpec& spec, const Vocab& vocab,
                 const std::vector<std::vector<float>>& templates, const UttJob& job) {
  Rng rng(job.seed);
  UttResult r;
  const int words = spec.min_words +
                    static_cast<int>(rng.UniformInt(spec.max_words - spec.min_words + 1));
  for (int w = 0; w < words; ++w) {
    if (w) r.transcript += " ";
    const int len = spec.min_word_len +
                    static_cast<int>(rng.UniformInt(spec.max_word_len - spec.min_word_len + 1));
    for (int i = 0; i < len; ++i) {
      r.transcript += (*job.letters)[rng.UniformInt(job.letters->size())];
    }
  }
  const int base = static_cast<int>(std::lround(kFrameRate / spec.tokens_per_second));
  const int dim = spec.feature_dim;
  auto emit = [&](const float* mean) {
    for (int d = 0; d < dim; ++d) {
      const double m = mean ? mean[d] : 0.0;
      r.feats.values.push_back(static_cast<float>(m + spec.noise * rng.Normal()));
    }
    ++r.feats.num_frames;
  };
  const std::vector<int> ids = vocab.Encode(r.transcript);
  auto gap = [&] {
    const int g = static_cast<int>(rng.UniformInt(spec.max_gap_frames + 1));
    for (int k = 0; k < g; ++k) emit(nullptr);
  };
  gap();
  for (size_t i = 0; i < ids.size(); ++i) {
    const int frames = base - spec.frame_jitter +
                       static_cast<int>(rng.UniformInt(2 * spec.frame_jitter + 1));
    const float* mean = templates[ids[i] - 1].data();
    for (int k = 0; k < frames; ++k) emit(mean);
    // Repeated letters always get a silence frame so segments stay distinct.
    if (i + 1 < ids.size() && ids[i + 1] == ids[i]) emit(nullptr);
    gap();
  }
  r.feats.dim = static_cast<uint32_t>(dim);
  return r;
}

}  // namespace

void SyntheticSpec::Validate() const {
  if (languages.empty()) throw ValidationError("synthetic spec needs at least one language");
  std::map<std::string, int> seen;
  for (const SyntheticLanguage& l : languages) {
    if (l.code.empty()) throw ValidationError("language code must not be empty");
    if (seen[l.code]++) throw ValidationError("duplicate language " + l.code);
    if (l.utterances <= 0 && !(l.hours > 0.0)) {
      throw ValidationError("language " + l.code + " has zero hours");
    }
    if (l.heldout < 0) throw ValidationError("heldout must be >= 0");
    if (Letters(l).empty()) throw ValidationError("language " + l.code + " has an empty charset");
  }
  if (feature_dim < 1) throw ValidationError("feature_dim must be >= 1");
  if (!(tokens_per_second > 0.0)) throw ValidationError("tokens_per_second must be > 0");
  const int base = static_cast<int>(std::lround(kFrameRate / tokens_per_second));
  if (frame_jitter < 0 || base - frame_jitter < 1) {
    throw ValidationError("frame_jitter leaves token segments empty");
  }
  if (max_gap_frames < 0) throw ValidationError("max_gap_frames must be >= 0");
  if (noise < 0.0) throw ValidationError("noise must be >= 0");
  if (min_words < 1 || max_words < min_words) throw ValidationError("bad word count range");
  if (min_word_len < 1 || max_word_len < min_word_len) {
    throw ValidationError("bad word length range");
  }
}

SyntheticSpec SyntheticSpec::FromJson(const std::string& json) {
  SyntheticSpec s;
  try {
    auto j = nlohmann::json::parse(json);
    for (const auto& l : j.at("languages")) {
      SyntheticLanguage lang;
      lang.code = l.at("code").get<std::string>();
      lang.charset = l.at("charset").get<std::string>();
      lang.hours = l.value("hours", 0.0);
      lang.utterances = l.value("utterances", 0);
      lang.heldout = l.value("heldout", 0);
      s.languages.push_back(lang);
    }
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.tokens_per_second = j.value("tokens_per_second", s.tokens_per_second);
    s.frame_jitter = j.value("frame_jitter", s.frame_jitter);
    s.max_gap_frames = j.value("max_gap_frames", s.max_gap_frames);
    s.noise = j.value("noise", s.noise);
    s.template_scale = j.value("template_scale", s.template_scale);
    s.min_words = j.value("min_words", s.min_words);
    s.max_words = j.value("max_words", s.max_words);
    s.min_word_len = j.value("min_word_len", s.min_word_len);
    s.max_word_len = j.value("max_word_len", s.max_word_len);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad synthetic spec: ") + e.what());
  }
  s.Validate();
  return s;
}

std::string SyntheticSpec::ToJson() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json langs = nlohmann::ordered_json::array();
  for (const SyntheticLanguage& l : languages) {
    nlohmann::ordered_json o;
    o["code"] = l.code;
    o["charset"] = l.charset;
    o["hours"] = l.hours;
    o["utterances"] = l.utterances;
    o["heldout"] = l.heldout;
    langs.push_back(o);
  }
  j["languages"] = langs;
  j["feature_dim"] = feature_dim;
  j["tokens_per_second"] = tokens_per_second;
  j["frame_jitter"] = frame_jitter;
  j["max_gap_frames"] = max_gap_frames;
  j["noise"] = noise;
  j["template_scale"] = template_scale;
  j["min_words"] = min_words;
  j["max_words"] = max_words;
  j["min_word_len"] = min_word_len;
  j["max_word_len"] = max_word_len;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

SyntheticSpec SyntheticSpec::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

SyntheticSpec SyntheticSpec::Toy() {
  SyntheticSpec s;
  s.languages = {{"ta", "abcdefgh", 0.0, 10, 10}, {"tb", "efghijkl", 0.0, 10, 10}};
  return s;
}

Vocab SyntheticVocab(const SyntheticSpec& spec) {
  std::map<std::string, std::vector<std::string>> charsets;
  for (const SyntheticLanguage& l : spec.languages) {
    std::vector<std::string> cs = Letters(l);
    cs.push_back(" ");
    charsets[l.code] = cs;
  }
  return Vocab::Build(charsets);
}

std::vector<std::vector<float>> TokenTemplates(const SyntheticSpec& spec, const Vocab& vocab) {
  std::vector<std::vector<float>> out;
  for (int id : vocab.CharacterIds()) {
    Rng rng(DeriveSeed(DeriveSeed(spec.seed, kTemplateStream), static_cast<uint64_t>(id)));
    std::vector<float> mean(spec.feature_dim);
    for (float& v : mean) v = static_cast<float>(spec.template_scale * rng.Normal());
    out.push_back(std::move(mean));
  }
  return out;
}

SyntheticCorpus GenerateSyntheticCorpus(const SyntheticSpec& spec, const std::string& out_dir) {
  spec.Validate();
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "feats");
  SyntheticCorpus corpus;
  corpus.vocab = SyntheticVocab(spec);
  const auto templates = TokenTemplates(spec, corpus.vocab);
  std::vector<std::vector<std::string>> letters;
  for (const SyntheticLanguage& l : spec.languages) letters.push_back(Letters(l));

  const uint64_t utt_root = DeriveSeed(spec.seed, kUttStream);
  auto seed_for = [&](size_t lang, int split, int i) {
    return DeriveSeed(utt_root, (static_cast<uint64_t>(lang) << 32) |
                                    (static_cast<uint64_t>(split) << 31) |
                                    static_cast<uint64_t>(i));
  };
  auto job_for = [&](size_t lang, int split, int i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%s-%05d", spec.languages[lang].code.c_str(),
                  split == 0 ? "train" : "heldout", i);
    return UttJob{id, spec.languages[lang].code, &letters[lang], seed_for(lang, split, i)};
  };

  // Hours mode needs durations before the job list is final, so training
  // utterances are rendered language by language; the cost is negligible.
  std::vector<UttJob> jobs;
  std::vector<int> split_of;
  std::map<std::string, UttResult> rendered;
  for (size_t li = 0; li < spec.languages.size(); ++li) {
    const SyntheticLanguage& l = spec.languages[li];
    if (l.utterances > 0) {
      for (int i = 0; i < l.utterances; ++i) {
        jobs.push_back(job_for(li, 0, i));
        split_of.push_back(0);
      }
    } else {
      const double target = l.hours * 3600.0;
      double total = 0;
      for (int i = 0; total < target; ++i) {
        UttJob job = job_for(li, 0, i);
        UttResult r = Render(spec, corpus.vocab, templates, job);
        total += static_cast<double>(r.feats.num_frames) / kFrameRate;
        rendered.emplace(job.utt_id, std::move(r));
        jobs.push_back(job);
        split_of.push_back(0);
      }
    }
    for (int i = 0; i < l.heldout; ++i) {
      jobs.push_back(job_for(li, 1, i));
      split_of.push_back(1);
    }
  }

  std::vector<UttResult> results(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < jobs.size();) {
      auto it = rendered.find(jobs[k].utt_id);
      results[k] = it != rendered.end() ? it->second
                                        : Render(spec, corpus.vocab, templates, jobs[k]);
      WriteFeatures((fs::path(out_dir) / "feats" / (jobs[k].utt_id + ".f32")).string(),
                    results[k].feats);
    }
  };
  const int threads = std::min<int>(WorkerThreads(), static_cast<int>(jobs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  corpus.train.base_dir = corpus.heldout.base_dir = out_dir;
  for (size_t k = 0; k < jobs.size(); ++k) {
    ManifestEntry e;
    e.utt_id = jobs[k].utt_id;
    e.features_path = "feats/" + jobs[k].utt_id + ".f32";
    e.num_frames = static_cast<int>(results[k].feats.num_frames);
    e.transcript = results[k].transcript;
    e.language = jobs[k].language;
    e.duration_sec = static_cast<double>(e.num_frames) / kFrameRate;
    (split_of[k] == 0 ? corpus.train : corpus.heldout).entries.push_back(std::move(e));
  }
  SaveManifest((fs::path(out_dir) / "train.jsonl").string(), corpus.train);
  SaveManifest((fs::path(out_dir) / "heldout.jsonl").string(), corpus.heldout);
  corpus.vocab.Save((fs::path(out_dir) / "vocab.json").string());
  std::ofstream hours(fs::path(out_dir) / "hours.jsonl");
  for (const SyntheticLanguage& l : spec.languages) {
    nlohmann::ordered_json j;
    j["language"] = l.code;
    j["hours"] = corpus.train.Hours(l.code);
    hours << j.dump() << "\n";
  }
  std::ofstream(fs::path(out_dir) / "spec.json") << spec.ToJson();
  if (!hours) throw IoError("cannot write hours.jsonl in " + out_dir);
  return corpus;
}

}  // namespace whale
