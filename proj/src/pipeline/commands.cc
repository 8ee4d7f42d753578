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

#include "pipeline/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "data/synthetic.h"
#include "json.hpp"
#include "tensor/checkpoint.h"

namespace whale {

namespace fs = std::filesystem;

namespace {

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelConfig ResolveModelConfig(const std::string& explicit_path, const std::string& init_ssl) {
  if (!explicit_path.empty()) return ModelConfig::FromJson(Slurp(explicit_path));
  if (!init_ssl.empty() && fs::exists(fs::path(init_ssl) / "config.json")) {
    return ModelConfig::FromJson(Slurp(fs::path(init_ssl) / "config.json"));
  }
  return ModelConfig::Toy();
}

std::set<std::string> Languages(const Manifest& m) {
  std::set<std::string> out;
  for (const ManifestEntry& e : m.entries) out.insert(e.language);
  return out;
}

}  // namespace

SyntheticCorpus RunGenData(const std::string& spec_path, const std::string& out_dir,
                           std::optional<uint64_t> seed) {
  SyntheticSpec spec = spec_path.empty() ? SyntheticSpec::Toy() : SyntheticSpec::Load(spec_path);
  if (seed) spec.seed = *seed;
  return GenerateSyntheticCorpus(spec, out_dir);
}

PretrainSummary RunPretrain(const PretrainOptions& opts) {
  Manifest data = LoadManifest(opts.manifest);
  ModelConfig mc = ResolveModelConfig(opts.model_config, "");
  Rng rng(DeriveSeed(opts.cfg.seed, 1));
  mc.ssl.Validate();
  SslFrontend ssl(mc.ssl, Dtype::kFloat32, rng);
  fs::create_directories(opts.out_dir);
  const fs::path metrics = fs::path(opts.out_dir) / "metrics.jsonl";
  fs::remove(metrics);
  std::vector<PretrainStep> hist = RunSslPretraining(ssl, data, opts.cfg, metrics.string());
  SaveTensors(opts.out_dir, NamedParameters(ssl, "ssl"));
  std::ofstream(fs::path(opts.out_dir) / "config.json") << mc.ToJson();
  PretrainSummary s;
  s.steps = static_cast<int>(hist.size());
  if (!hist.empty()) {
    s.first_loss = hist.front().metrics.loss;
    s.final_loss = hist.back().metrics.loss;
  }
  s.eval_accuracy = EvaluateSslAccuracy(ssl, data, DeriveSeed(opts.cfg.seed, 2));
  return s;
}

void RunTrain(const TrainOptions& opts) {
  Manifest corpus = LoadManifest(opts.manifest);
  const std::string vocab_path =
      opts.vocab.empty() ? (fs::path(corpus.base_dir) / "vocab.json").string() : opts.vocab;
  Vocab vocab = Vocab::Load(vocab_path);

  const std::set<std::string> langs = Languages(corpus);
  if (langs.empty()) throw ValidationError("training manifest is empty");
  // Early stages use the first language listed in the vocabulary that has data.
  std::string primary;
  for (const std::string& code : vocab.LanguageCodes()) {
    if (langs.count(code)) {
      primary = code;
      break;
    }
  }
  StagePlan plan = BuildStagePlan(ParsePlanScale(opts.stage_plan), primary, {});
  TrainConfig cfg;
  if (!opts.config_ini.empty()) LoadTrainIni(opts.config_ini, cfg, plan);
  if (opts.seed) cfg.seed = *opts.seed;
  plan = plan.Scaled(opts.steps_scale);
  fs::create_directories(opts.out_dir);
  SaveTrainIni((fs::path(opts.out_dir) / "train.ini").string(), cfg, plan);

  std::unique_ptr<Trainer> trainer;
  if (!opts.resume.empty()) {
    trainer = Trainer::Resume(opts.resume, plan, cfg, corpus, opts.out_dir);
  } else {
    fs::remove(fs::path(opts.out_dir) / "metrics.jsonl");
    auto model = std::make_unique<AsrModel>(ResolveModelConfig(opts.model_config, opts.init_ssl),
                                            vocab, DeriveSeed(cfg.seed, 0x30de1));
    if (!opts.init_ssl.empty()) {
      LoadParameters(model->ssl(), LoadTensors(opts.init_ssl), "ssl");
    }
    trainer = std::make_unique<Trainer>(std::move(model), plan, cfg, corpus, opts.out_dir);
  }
  trainer->Run();
  trainer->model().Save((fs::path(opts.out_dir) / "final").string());
}

std::unique_ptr<AsrModel> LoadModelDir(const std::string& dir) {
  if (fs::exists(fs::path(dir) / "model" / "config.json")) {
    return AsrModel::Load((fs::path(dir) / "model").string());
  }
  return AsrModel::Load(dir);
}

std::vector<DecodeResult> RunDecode(const DecodeCommand& cmd) {
  auto model = LoadModelDir(cmd.model);
  Manifest data = LoadManifest(cmd.manifest);
  std::vector<DecodeResult> results = DecodeManifest(*model, data, cmd.opts);
  if (!cmd.out.empty()) WriteDecodeResults(cmd.out, results);
  return results;
}

ScoreReport RunScore(const std::string& refs, const std::string& hyps,
                     const std::string& hours, const std::string& out_dir) {
  ScoreReport report =
      ScoreCorpus(ReadTextRecords(refs), ReadTextRecords(hyps),
                  hours.empty() ? std::map<std::string, double>{} : ReadHoursTable(hours));
  WriteReport(report, out_dir);
  return report;
}

std::string InspectCheckpoint(const std::string& dir) {
  auto model = LoadModelDir(dir);
  nlohmann::ordered_json j;
  j["path"] = dir;
  j["config"] = nlohmann::ordered_json::parse(model->config().ToJson());
  j["vocab_size"] = model->vocab().size();
  j["languages"] = model->vocab().LanguageCodes();
  j["encoder_depth"] = model->encoder().num_blocks();
  j["tap_layers"] = model->encoder().tap_layers();
  std::map<std::string, long> counts;
  long total = 0;
  for (auto& [name, t] : NamedParameters(*model)) {
    const long n = static_cast<long>(t.numel());
    counts[name.substr(0, name.find('.'))] += n;
    total += n;
  }
  j["parameters"] = counts;
  j["total_parameters"] = total;
  const fs::path state = fs::path(dir) / "state.json";
  if (fs::exists(state)) {
    auto s = nlohmann::json::parse(Slurp(state));
    s.erase("batches");
    j["train_state"] = s;
  }
  return j.dump(2);
}

}  // namespace whale
