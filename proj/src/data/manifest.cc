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

#include "data/manifest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <unordered_set>

#include "base/error.h"
#include "data/features.h"
#include "json.hpp"
#include "ssl/frontend.h"

namespace whale {

std::string Manifest::ResolvePath(const ManifestEntry& e) const {
  std::filesystem::path p(e.features_path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

double Manifest::Hours(const std::string& language) const {
  double s = 0;
  for (const ManifestEntry& e : entries) {
    if (e.language == language) s += e.duration_sec;
  }
  return s / 3600.0;
}

void ValidateManifest(const Manifest& m, bool check_features) {
  std::unordered_set<std::string> ids;
  for (const ManifestEntry& e : m.entries) {
    if (e.utt_id.empty()) throw ValidationError("empty utt_id in manifest");
    if (!ids.insert(e.utt_id).second) {
      throw ValidationError("duplicate utt_id " + e.utt_id);
    }
    if (e.num_frames <= 0) throw ValidationError(e.utt_id + ": num_frames must be positive");
    const double want = static_cast<double>(e.num_frames) / kFrameRate;
    if (std::abs(e.duration_sec - want) > 1e-9) {
      throw ValidationError(e.utt_id + ": duration_sec does not equal num_frames/100");
    }
    if (check_features) {
      const auto [t, d] = ReadFeatureHeader(m.ResolvePath(e));
      if (static_cast<int>(t) != e.num_frames) {
        throw ValidationError(e.utt_id + ": num_frames " + std::to_string(e.num_frames) +
                              " but feature file has " + std::to_string(t));
      }
      (void)d;
    }
  }
}

Manifest LoadManifest(const std::string& path, bool check_features) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.utt_id = j.at("utt_id").get<std::string>();
      e.features_path = j.at("features_path").get<std::string>();
      e.num_frames = j.at("num_frames").get<int>();
      e.transcript = j.at("transcript").get<std::string>();
      e.language = j.at("language").get<std::string>();
      e.duration_sec = j.at("duration_sec").get<double>();
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  ValidateManifest(m, check_features);
  return m;
}

void SaveManifest(const std::string& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const ManifestEntry& e : m.entries) {
    nlohmann::ordered_json j;
    j["utt_id"] = e.utt_id;
    j["features_path"] = e.features_path;
    j["num_frames"] = e.num_frames;
    j["transcript"] = e.transcript;
    j["language"] = e.language;
    j["duration_sec"] = e.duration_sec;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

Manifest FilterManifest(const Manifest& m, const std::set<std::string>& languages,
                        double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("subsample fraction must be in (0, 1]");
  }
  std::map<std::string, int> total, taken;
  for (const ManifestEntry& e : m.entries) ++total[e.language];
  Manifest out;
  out.base_dir = m.base_dir;
  for (const ManifestEntry& e : m.entries) {
    if (!languages.empty() && !languages.count(e.language)) continue;
    const int keep = static_cast<int>(std::ceil(fraction * total[e.language] - 1e-9));
    if (taken[e.language] >= keep) continue;
    ++taken[e.language];
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace whale
