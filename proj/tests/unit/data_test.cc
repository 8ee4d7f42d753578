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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "base/error.h"
#include "data/features.h"
#include "data/manifest.h"
#include "data/synthetic.h"

namespace whale {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("whale_data_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Concatenation of every file under `dir`, in sorted path order.
std::string TreeBytes(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += fs::relative(f, dir).string() + "\n" + Slurp(f);
  return all;
}

TEST(FeaturesTest, RoundTrip) {
  fs::path dir = TempDir("feat");
  FeatureMatrix m;
  m.num_frames = 3;
  m.dim = 2;
  m.values = {1.5f, -2.0f, 0.0f, 3.25f, 1e-7f, -0.5f};
  WriteFeatures((dir / "x.f32").string(), m);
  EXPECT_EQ(fs::file_size(dir / "x.f32"), 8u + 24u);
  FeatureMatrix r = ReadFeatures((dir / "x.f32").string());
  EXPECT_EQ(r.num_frames, 3u);
  EXPECT_EQ(r.dim, 2u);
  EXPECT_EQ(r.values, m.values);
  EXPECT_EQ(ReadFeatureHeader((dir / "x.f32").string()).first, 3u);
  Tensor t = r.ToTensor();
  EXPECT_EQ(t.shape(), (Shape{3, 2}));
  fs::remove_all(dir);
}

TEST(SyntheticTest, SeededRegenerationIsByteIdentical) {
  fs::path a = TempDir("det_a"), b = TempDir("det_b");
  SyntheticSpec spec = SyntheticSpec::Toy();
  GenerateSyntheticCorpus(spec, a.string());
  setenv("WHALE_KIT_THREADS", "3", 1);
  GenerateSyntheticCorpus(spec, b.string());
  unsetenv("WHALE_KIT_THREADS");
  EXPECT_EQ(TreeBytes(a), TreeBytes(b));
  spec.seed += 1;
  GenerateSyntheticCorpus(spec, b.string());
  EXPECT_NE(TreeBytes(a), TreeBytes(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(SyntheticTest, HourAccountingWithinOneUtterance) {
  fs::path dir = TempDir("hours");
  SyntheticSpec spec;
  spec.languages = {{"xa", "abcd", 0.1, 0, 0}, {"xb", "cdef", 0.1, 0, 0}};
  SyntheticCorpus c = GenerateSyntheticCorpus(spec, dir.string());
  double longest = 0;
  for (const auto& e : c.train.entries) longest = std::max(longest, e.duration_sec);
  double total = 0;
  for (const char* lang : {"xa", "xb"}) {
    const double h = c.train.Hours(lang);
    EXPECT_GE(h, 0.1);
    EXPECT_LT(h - 0.1, longest / 3600.0);
    total += h;
  }
  EXPECT_NEAR(total, 0.2, 2 * longest / 3600.0);
  fs::remove_all(dir);
}

TEST(SyntheticTest, ZeroHourLanguageRejected) {
  SyntheticSpec spec;
  spec.languages = {{"xa", "abcd", 0.0, 0, 0}};
  EXPECT_THROW(spec.Validate(), ValidationError);
}

TEST(SyntheticTest, ManifestContractsAndVocab) {
  fs::path dir = TempDir("contracts");
  SyntheticCorpus c = GenerateSyntheticCorpus(SyntheticSpec::Toy(), dir.string());
  EXPECT_EQ(c.train.entries.size(), 20u);
  EXPECT_EQ(c.heldout.entries.size(), 20u);
  Manifest m = LoadManifest((dir / "train.jsonl").string());
  ASSERT_EQ(m.entries.size(), 20u);
  for (const auto& e : m.entries) {
    EXPECT_EQ(e.duration_sec, e.num_frames / 100.0);
    FeatureMatrix f = ReadFeatures(m.ResolvePath(e));
    EXPECT_EQ(static_cast<int>(f.num_frames), e.num_frames);
    EXPECT_EQ(f.dim, 16u);
    // Transcripts only use the language's own charset plus spaces.
    const auto& charset = c.vocab.language(e.language).charset;
    for (int id : c.vocab.Encode(e.transcript)) {
      EXPECT_TRUE(std::binary_search(charset.begin(), charset.end(), id));
    }
  }
  Vocab v = Vocab::Load((dir / "vocab.json").string());
  EXPECT_EQ(v.size(), c.vocab.size());
  // Overlapping charsets: e..h plus space are shared.
  int shared = 0;
  for (int id : v.language("ta").charset) {
    const auto& cb = v.language("tb").charset;
    shared += std::binary_search(cb.begin(), cb.end(), id);
  }
  EXPECT_EQ(shared, 5);
  fs::remove_all(dir);
}

TEST(ManifestTest, RejectsFrameCountMismatch) {
  fs::path dir = TempDir("mismatch");
  SyntheticCorpus c = GenerateSyntheticCorpus(SyntheticSpec::Toy(), dir.string());
  Manifest bad = c.train;
  bad.entries[3].num_frames += 1;
  bad.entries[3].duration_sec = bad.entries[3].num_frames / 100.0;
  SaveManifest((dir / "bad.jsonl").string(), bad);
  EXPECT_THROW(LoadManifest((dir / "bad.jsonl").string()), ValidationError);
  EXPECT_NO_THROW(LoadManifest((dir / "bad.jsonl").string(), false));

  Manifest dur = c.train;
  dur.entries[0].duration_sec += 0.01;
  EXPECT_THROW(ValidateManifest(dur, false), ValidationError);

  Manifest dup = c.train;
  dup.entries[1].utt_id = dup.entries[0].utt_id;
  EXPECT_THROW(ValidateManifest(dup, false), ValidationError);
  fs::remove_all(dir);
}

TEST(ManifestTest, Filter) {
  Manifest m;
  for (int i = 0; i < 10; ++i) {
    m.entries.push_back({"a" + std::to_string(i), "", 10, "x", "ta", 0.1});
    m.entries.push_back({"b" + std::to_string(i), "", 10, "x", "tb", 0.1});
  }
  EXPECT_EQ(FilterManifest(m, {"ta"}, 1.0).entries.size(), 10u);
  EXPECT_EQ(FilterManifest(m, {"ta"}, 0.3).entries.size(), 3u);
  EXPECT_EQ(FilterManifest(m, {}, 0.5).entries.size(), 10u);
  EXPECT_EQ(FilterManifest(m, {"ta"}, 0.3).entries[0].utt_id, "a0");
  EXPECT_THROW(FilterManifest(m, {}, 0.0), ValidationError);
}

}  // namespace
}  // namespace whale
