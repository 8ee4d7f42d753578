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

#ifndef WHALE_DATA_MANIFEST_H_
#define WHALE_DATA_MANIFEST_H_

#include <set>
#include <string>
#include <vector>

namespace whale {

struct ManifestEntry {
  std::string utt_id;
  std::string features_path;  // absolute, or relative to the manifest file
  int num_frames = 0;
  std::string transcript;
  std::string language;
  double duration_sec = 0.0;
};

struct Manifest {
  std::string base_dir;  // directory of the manifest file
  std::vector<ManifestEntry> entries;

  std::string ResolvePath(const ManifestEntry& e) const;
  // Sum of durations per language, in hours.
  double Hours(const std::string& language) const;
};

// Parses and validates a manifest: unique ids, duration == num_frames / 100,
// and (when check_features is set) feature headers matching num_frames.
// Throws ValidationError on any violation.
Manifest LoadManifest(const std::string& path, bool check_features = true);
void SaveManifest(const std::string& path, const Manifest& m);
void ValidateManifest(const Manifest& m, bool check_features);

// Utterances of the given languages (all when empty); keeps the first
// ceil(fraction * n) of each language in manifest order.
Manifest FilterManifest(const Manifest& m, const std::set<std::string>& languages,
                        double fraction);

}  // namespace whale

#endif  // WHALE_DATA_MANIFEST_H_
