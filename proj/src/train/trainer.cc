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

#include "train/trainer.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "base/error.h"
#include "ctc/ctc.h"
#include "data/features.h"
#include "json.hpp"
#include "nn/module.h"
#include "tensor/checkpoint.h"
#include "tensor/ops.h"

namespace whale {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string JoinSet(const std::set<std::string>& s) {
  std::string out;
  for (const std::string& x : s) out += (out.empty() ? "" : ",") + x;
  return out;
}

std::set<std::string> SplitSet(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.insert(item);
  }
  return out;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double Scalar(const Tensor& t) { return t.ToVector().at(0); }

}  // namespace

void TrainConfig::Validate() const {
  if (batch_frames < 1) throw ValidationError("batch_frames must be >= 1");
  if (max_batch_utts < 1) throw ValidationError("max_batch_utts must be >= 1");
  if (tap_weight < 0.0) throw ValidationError("tap_weight must be >= 0");
  if (log_every < 1) throw ValidationError("log_every must be >= 1");
}

void LoadTrainIni(const std::string& path, TrainConfig& cfg, StagePlan& plan) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(e.what());
  }
  try {
    if (auto t = tree.get_child_optional("train")) {
      cfg.seed = t->get("seed", cfg.seed);
      cfg.batch_frames = t->get("batch_frames", cfg.batch_frames);
      cfg.max_batch_utts = t->get("max_batch_utts", cfg.max_batch_utts);
      cfg.tap_weight = t->get("tap_weight", cfg.tap_weight);
      cfg.log_every = t->get("log_every", cfg.log_every);
      cfg.adamw.beta1 = t->get("beta1", cfg.adamw.beta1);
      cfg.adamw.beta2 = t->get("beta2", cfg.adamw.beta2);
      cfg.adamw.eps = t->get("eps", cfg.adamw.eps);
      cfg.adamw.weight_decay = t->get("weight_decay", cfg.adamw.weight_decay);
      cfg.adamw.clip_norm = t->get("clip_norm", cfg.adamw.clip_norm);
    }
    std::vector<Stage> stages;
    for (int k = 1;; ++k) {
      auto sec = tree.get_child_optional("stage" + std::to_string(k));
      if (!sec) break;
      Stage s = k <= static_cast<int>(plan.stages.size()) ? plan.stages[k - 1] : Stage{};
      s.name = sec->get("name", s.name.empty() ? "stage" + std::to_string(k) : s.name);
      s.encoder_depth = sec->get("encoder_depth", s.encoder_depth);
      if (auto l = sec->get_optional<std::string>("languages")) s.data.languages = SplitSet(*l);
      s.data.fraction = sec->get("fraction", s.data.fraction);
      if (auto f = sec->get_optional<std::string>("frozen")) s.frozen_sets = SplitSet(*f);
      s.step_budget = sec->get("steps", s.step_budget);
      s.lr.peak = sec->get("peak_lr", s.lr.peak);
      s.lr.warmup = sec->get("warmup", s.lr.warmup);
      stages.push_back(s);
    }
    if (!stages.empty()) plan.stages = stages;
  } catch (const pt::ptree_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  cfg.Validate();
  plan.Validate();
}

void SaveTrainIni(const std::string& path, const TrainConfig& cfg, const StagePlan& plan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << std::setprecision(17);
  out << "[train]\n"
      << "seed = " << cfg.seed << "\n"
      << "batch_frames = " << cfg.batch_frames << "\n"
      << "max_batch_utts = " << cfg.max_batch_utts << "\n"
      << "tap_weight = " << cfg.tap_weight << "\n"
      << "log_every = " << cfg.log_every << "\n"
      << "beta1 = " << cfg.adamw.beta1 << "\n"
      << "beta2 = " << cfg.adamw.beta2 << "\n"
      << "eps = " << cfg.adamw.eps << "\n"
      << "weight_decay = " << cfg.adamw.weight_decay << "\n"
      << "clip_norm = " << cfg.adamw.clip_norm << "\n";
  for (size_t k = 0; k < plan.stages.size(); ++k) {
    const Stage& s = plan.stages[k];
    out << "\n[stage" << k + 1 << "]\n"
        << "name = " << s.name << "\n"
        << "encoder_depth = " << s.encoder_depth << "\n"
        << "languages = " << JoinSet(s.data.languages) << "\n"
        << "fraction = " << s.data.fraction << "\n"
        << "frozen = " << JoinSet(s.frozen_sets) << "\n"
        << "steps = " << s.step_budget << "\n"
        << "peak_lr = " << s.lr.peak << "\n"
        << "warmup = " << s.lr.warmup << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

JointLoss ComputeJointLoss(const AsrModel& model, const Tensor& ssl_features,
                           std::span<const int> labels, const std::string& language,
                           const RunMode& mode, double tap_weight) {
  const int t_out = (static_cast<int>(ssl_features.shape()[0]) + 1) / 2;
  if (CtcMinFrames(labels) > t_out) {
    throw ImpossibleAlignmentError("transcript needs " + std::to_string(CtcMinFrames(labels)) +
                                   " frames, encoder gives " + std::to_string(t_out));
  }
  const EncoderOutput enc = model.encoder().Encode(ssl_features, mode);
  JointLoss out;
  out.ctc = CtcLoss(enc.ctc_log_posteriors, labels, model.vocab().blank_id());
  const std::vector<int> wrapped = WrappedTarget(model.vocab(), language, labels);
  out.att = Scale(model.decoder().TeacherForcedLoss(enc, wrapped, mode),
                  static_cast<double>(wrapped.size() - 1));
  out.total = Add(Scale(out.ctc, kCtcWeight), Scale(out.att, kAttentionWeight));
  if (!enc.tap_log_posteriors.empty()) {
    Tensor taps;
    for (const Tensor& lp : enc.tap_log_posteriors) {
      Tensor l = CtcLoss(lp, labels, model.vocab().blank_id());
      taps = taps.defined() ? Add(taps, l) : l;
    }
    out.taps = Scale(taps, 1.0 / static_cast<double>(enc.tap_log_posteriors.size()));
    if (tap_weight > 0.0) out.total = Add(out.total, Scale(out.taps, tap_weight));
  } else {
    out.taps = Tensor::Zeros({1});
  }
  return out;
}

Trainer::Trainer(std::unique_ptr<AsrModel> model, StagePlan plan, TrainConfig cfg,
                 Manifest corpus, std::string out_dir)
    : model_(std::move(model)),
      plan_(std::move(plan)),
      cfg_(cfg),
      corpus_(std::move(corpus)),
      out_dir_(std::move(out_dir)),
      rng_(DeriveSeed(cfg.seed, 0x7a1)) {
  plan_.Validate();
  cfg_.Validate();
  if (corpus_.entries.empty()) throw ValidationError("training corpus is empty");
  for (const ManifestEntry& e : corpus_.entries) {
    if (!model_->vocab().HasLanguage(e.language)) {
      throw UnknownLanguageError(e.utt_id + ": language " + e.language + " not in vocabulary");
    }
    model_->vocab().Encode(e.transcript);
  }
  state_.rng = rng_.state();
}

void Trainer::RebuildOptimizer() {
  optimizer_ = std::make_unique<AdamW>(NamedParameters(*model_), cfg_.adamw);
}

void Trainer::BeginStage() {
  const Stage& s = current_stage();
  model_->GrowEncoder(s.encoder_depth, rng_);
  RebuildOptimizer();
  stage_data_ = FilterManifest(corpus_, s.data.languages, s.data.fraction);
  if (stage_data_.entries.empty()) {
    throw ValidationError(s.name + ": data filter selects no utterances");
  }
  ssl_cache_.clear();
  state_.stage_started = true;
  state_.step_in_stage = 0;
  state_.batches.clear();
  state_.cursor = 0;
  state_.rng = rng_.state();
}

void Trainer::NewEpoch() {
  const int n = static_cast<int>(stage_data_.entries.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng_.UniformInt(static_cast<uint64_t>(i) + 1)]);
  }
  // Length buckets: sort within pools of a few batches, then pack by frames.
  const int pool = 4 * cfg_.max_batch_utts;
  for (int start = 0; start < n; start += pool) {
    auto first = order.begin() + start;
    auto last = order.begin() + std::min(n, start + pool);
    std::stable_sort(first, last, [&](int a, int b) {
      return stage_data_.entries[a].num_frames < stage_data_.entries[b].num_frames;
    });
  }
  std::vector<std::vector<int>> batches;
  std::vector<int> cur;
  int frames = 0;
  for (int i : order) {
    const int f = stage_data_.entries[i].num_frames;
    if (!cur.empty() && (frames + f > cfg_.batch_frames ||
                         static_cast<int>(cur.size()) >= cfg_.max_batch_utts)) {
      batches.push_back(cur);
      cur.clear();
      frames = 0;
    }
    cur.push_back(i);
    frames += f;
  }
  if (!cur.empty()) batches.push_back(cur);
  for (int i = static_cast<int>(batches.size()) - 1; i > 0; --i) {
    std::swap(batches[i], batches[rng_.UniformInt(static_cast<uint64_t>(i) + 1)]);
  }
  state_.batches = std::move(batches);
  state_.cursor = 0;
}

Tensor Trainer::SslFeatures(int index, const RunMode& mode) {
  const ManifestEntry& e = stage_data_.entries.at(index);
  auto raw = raw_cache_.find(e.utt_id);
  if (raw == raw_cache_.end()) {
    FeatureMatrix m = ReadFeatures(stage_data_.ResolvePath(e));
    if (static_cast<int>(m.num_frames) != e.num_frames) {
      throw ValidationError(e.utt_id + ": feature frames do not match the manifest");
    }
    raw = raw_cache_.emplace(e.utt_id, m.ToTensor()).first;
  }
  if (!IsFrozen(current_stage().frozen_sets, "ssl")) {
    return model_->ssl().Forward(raw->second, mode);
  }
  auto it = ssl_cache_.find(e.utt_id);
  if (it == ssl_cache_.end()) {
    NoGradGuard no_grad;
    it = ssl_cache_.emplace(e.utt_id, model_->ssl().ExtractFeatures(raw->second)).first;
  }
  return it->second;
}

StepMetrics Trainer::Step() {
  if (!state_.stage_started) BeginStage();
  if (state_.cursor >= state_.batches.size()) NewEpoch();
  const std::vector<int> batch = state_.batches[state_.cursor++];
  const Stage& stage = current_stage();

  StepMetrics m;
  m.stage = state_.stage + 1;
  m.step = state_.step_in_stage + 1;
  m.global_step = state_.global_step + 1;
  m.lr = stage.lr.At(m.step);

  ZeroGrads(*model_);
  RunMode mode = RunMode::Train(&rng_);
  std::vector<Tensor> totals;
  for (int idx : batch) {
    const ManifestEntry& e = stage_data_.entries[idx];
    const std::vector<int> labels = model_->vocab().Encode(e.transcript);
    Tensor feats = SslFeatures(idx, mode);
    try {
      JointLoss l = ComputeJointLoss(*model_, feats, labels, e.language, mode, cfg_.tap_weight);
      m.loss_ctc += Scalar(l.ctc);
      m.loss_att += Scalar(l.att);
      m.loss_taps += Scalar(l.taps);
      totals.push_back(l.total);
    } catch (const ImpossibleAlignmentError&) {
      ++state_.skipped_samples;
    }
  }
  m.used_samples = static_cast<int>(totals.size());
  if (!totals.empty()) {
    Tensor sum = totals[0];
    for (size_t i = 1; i < totals.size(); ++i) sum = Add(sum, totals[i]);
    Tensor loss = Scale(sum, 1.0 / static_cast<double>(totals.size()));
    m.loss_total = Scalar(loss);
    loss.Backward();
    const double inv = 1.0 / static_cast<double>(totals.size());
    m.loss_ctc *= inv;
    m.loss_att *= inv;
    m.loss_taps *= inv;
    const auto& frozen = stage.frozen_sets;
    m.grad_norm = optimizer_->Step(
        m.lr, [&](const std::string& name) { return IsFrozen(frozen, name); });
  }
  ++state_.step_in_stage;
  ++state_.global_step;
  m.skipped_samples = state_.skipped_samples;
  state_.rng = rng_.state();
  history_.push_back(m);

  if (m.step % cfg_.log_every == 0 || m.step == stage.step_budget) {
    ordered_json j;
    j["stage"] = m.stage;
    j["step"] = m.global_step;
    j["stage_step"] = m.step;
    j["loss_total"] = m.loss_total;
    j["loss_ctc"] = m.loss_ctc;
    j["loss_att"] = m.loss_att;
    j["loss_taps"] = m.loss_taps;
    j["lr"] = m.lr;
    j["grad_norm"] = m.grad_norm;
    j["skipped_samples"] = m.skipped_samples;
    AppendMetrics(j.dump());
  }
  return m;
}

void Trainer::AppendMetrics(const std::string& line) {
  if (out_dir_.empty()) return;
  fs::create_directories(out_dir_);
  std::ofstream out(fs::path(out_dir_) / "metrics.jsonl", std::ios::app);
  out << line << "\n";
  if (!out) throw IoError("cannot append to metrics.jsonl in " + out_dir_);
}

void Trainer::EndStage() {
  const Stage& s = current_stage();
  const int k = state_.stage + 1;
  state_.stage += 1;
  state_.stage_started = false;
  state_.step_in_stage = 0;
  state_.batches.clear();
  state_.cursor = 0;
  state_.rng = rng_.state();
  if (out_dir_.empty()) return;
  SaveCheckpoint((fs::path(out_dir_) / ("stage" + std::to_string(k))).string());
  ordered_json j;
  j["stage"] = k;
  j["event"] = "stage_end";
  j["name"] = s.name;
  j["encoder_depth"] = model_->encoder().num_blocks();
  j["step"] = state_.global_step;
  j["num_utts"] = stage_data_.entries.size();
  j["skipped_samples"] = state_.skipped_samples;
  AppendMetrics(j.dump());
}

void Trainer::Run() {
  while (state_.stage < static_cast<int>(plan_.stages.size())) {
    if (!state_.stage_started) BeginStage();
    while (state_.step_in_stage < current_stage().step_budget) Step();
    EndStage();
  }
}

void Trainer::SaveCheckpoint(const std::string& dir) {
  const fs::path target(dir);
  const fs::path tmp = target.string() + ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  try {
    fs::create_directories(tmp);
    model_->Save((tmp / "model").string());
    if (optimizer_) SaveTensors((tmp / "optimizer").string(), optimizer_->ExportState());
    ordered_json j;
    j["stage"] = state_.stage;
    j["stage_started"] = state_.stage_started;
    j["step_in_stage"] = state_.step_in_stage;
    j["global_step"] = state_.global_step;
    j["skipped_samples"] = state_.skipped_samples;
    j["rng"] = state_.rng;
    j["batches"] = state_.batches;
    j["cursor"] = state_.cursor;
    j["has_optimizer"] = static_cast<bool>(optimizer_);
    std::ofstream out(tmp / "state.json");
    out << j.dump(1) << "\n";
    out.close();
    if (!out) throw IoError("cannot write state.json");
    fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("checkpoint write failed: ") + e.what());
  }
}

std::unique_ptr<Trainer> Trainer::Resume(const std::string& checkpoint_dir, StagePlan plan,
                                         TrainConfig cfg, Manifest corpus,
                                         std::string out_dir) {
  const fs::path dir(checkpoint_dir);
  auto model = AsrModel::Load((dir / "model").string());
  auto t = std::make_unique<Trainer>(std::move(model), std::move(plan), cfg,
                                     std::move(corpus), std::move(out_dir));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(Slurp(dir / "state.json"));
    t->state_.stage = j.at("stage").get<int>();
    t->state_.stage_started = j.at("stage_started").get<bool>();
    t->state_.step_in_stage = j.at("step_in_stage").get<int>();
    t->state_.global_step = j.at("global_step").get<int>();
    t->state_.skipped_samples = j.at("skipped_samples").get<long>();
    t->state_.rng = j.at("rng").get<Rng::State>();
    t->state_.batches = j.at("batches").get<std::vector<std::vector<int>>>();
    t->state_.cursor = j.at("cursor").get<size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad state.json: ") + e.what());
  }
  t->rng_.set_state(t->state_.rng);
  if (t->state_.stage > static_cast<int>(t->plan_.stages.size())) {
    throw ValidationError("checkpoint is past the end of the stage plan");
  }
  if (t->state_.stage_started) {
    const Stage& s = t->current_stage();
    t->stage_data_ = FilterManifest(t->corpus_, s.data.languages, s.data.fraction);
    t->RebuildOptimizer();
    if (j.value("has_optimizer", false)) {
      t->optimizer_->ImportState(LoadTensors((dir / "optimizer").string()));
    }
  }
  return t;
}

}  // namespace whale
