/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "geomatch/benchgen.hpp"
#include "geomatch/error.hpp"
#include "geomatch/synthetic.hpp"
#include "support.hpp"

namespace geomatch {
namespace {

std::uint64_t choose2(std::uint64_t n) { return n * (n - 1) / 2; }

CorpusImage image(const std::string& id, const std::string& species, const std::string& family,
                  int visible, int instances = 1) {
  CorpusImage img;
  img.id = id;
  img.species = species;
  img.family = family;
  img.instance_count = instances;
  img.keypoints.image = {100, 100};
  for (int k = 0; k < 6; ++k) img.keypoints.points.push_back({{10.0 * k, 10.0}, k < visible});
  return img;
}

AnnotationCorpus corpus_of(int seed) {
  SyntheticCorpusConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(seed);
  return make_synthetic_corpus(cfg);
}

TEST(FilterImages, DropsFewVisibleAndMultiInstance) {
  AnnotationCorpus c;
  c.images = {image("a", "s", "f", 2), image("b", "s", "f", 3), image("c", "s", "f", 6, 2)};
  const AnnotationCorpus f = filter_images(c);
  ASSERT_EQ(f.images.size(), 1u);
  EXPECT_EQ(f.images[0].id, "b");
}

TEST(FilterImages, MatchesPredicateOracle) {
  const AnnotationCorpus c = corpus_of(3);
  const AnnotationCorpus f = filter_images(c);
  std::vector<std::string> want;
  for (const auto& img : c.images) {
    int visible = 0;
    for (const auto& k : img.keypoints.points) visible += k.visible;
    if (visible >= 3 && img.instance_count == 1) want.push_back(img.id);
  }
  std::vector<std::string> got;
  for (const auto& img : f.images) got.push_back(img.id);
  EXPECT_EQ(got, want);
  EXPECT_LT(got.size(), c.images.size());
}

TEST(AnnotationCorpus, RejectsDuplicatesAndSpeciesInTwoFamilies) {
  AnnotationCorpus dup;
  dup.images = {image("a", "s", "f", 3), image("a", "s", "f", 3)};
  EXPECT_THROW(dup.validate(), ArgumentError);
  AnnotationCorpus fam;
  fam.images = {image("a", "s", "f", 3), image("b", "s", "g", 3)};
  EXPECT_THROW(fam.validate(), ArgumentError);
}

TEST(SampleUnorderedPairs, CapAndDistinctness) {
  CounterRng rng(31);
  for (int n : {0, 1, 2, 5, 9, 30}) {
    for (std::uint64_t cap : {0ull, 3ull, 10ull, 250ull, 1000ull}) {
      const auto pairs = sample_unordered_pairs(n, cap, rng);
      const std::uint64_t total = n < 2 ? 0 : choose2(n);
      EXPECT_EQ(pairs.size(), std::min(cap, total));
      std::set<std::pair<int, int>> seen(pairs.begin(), pairs.end());
      EXPECT_EQ(seen.size(), pairs.size());
      EXPECT_TRUE(std::is_sorted(pairs.begin(), pairs.end()));
      for (auto [i, j] : pairs) {
        EXPECT_LE(0, i);
        EXPECT_LT(i, j);
        EXPECT_LT(j, n);
      }
    }
  }
}

TEST(SampleUnorderedPairs, FiveImagesCapAtTen) {
  CounterRng rng(32);
  EXPECT_EQ(sample_unordered_pairs(5, 50 * 5, rng).size(), 10u);
}

TEST(SampleUnorderedPairs, RoughlyUniform) {
  CounterRng rng(33);
  std::map<std::pair<int, int>, int> hits;
  const int trials = 6000;
  for (int t = 0; t < trials; ++t) {
    for (auto p : sample_unordered_pairs(6, 3, rng)) ++hits[p];
  }
  ASSERT_EQ(hits.size(), 15u);
  const double expected = trials * 3.0 / 15.0;
  for (const auto& [p, h] : hits) EXPECT_NEAR(h, expected, 0.15 * expected);
}

TEST(SplitSpecies, SizesAndHoldouts) {
  AnnotationCorpus c;
  for (int i = 0; i < 100; ++i) c.images.push_back(image("big_" + std::to_string(1000 + i), "big", "f", 6));
  for (int i = 0; i < 10; ++i) c.images.push_back(image("tiny_" + std::to_string(i), "tiny", "f", 6));
  for (int i = 0; i < 60; ++i) c.images.push_back(image("mid_" + std::to_string(100 + i), "mid", "g", 6));
  BenchmarkConfig cfg;
  cfg.holdout_below = 70;
  const BenchmarkSplit s = split_species(c, cfg);
  const auto& big = s.species.at("big");
  EXPECT_FALSE(big.holdout);
  EXPECT_EQ(big.val.size(), 20u);
  EXPECT_EQ(big.test.size(), 30u);
  EXPECT_EQ(big.train.size(), 50u);
  const auto& tiny = s.species.at("tiny");
  EXPECT_TRUE(tiny.holdout);
  EXPECT_TRUE(tiny.train.empty());
  EXPECT_TRUE(tiny.val.empty());
  EXPECT_EQ(tiny.test.size(), 10u);
  const auto& mid = s.species.at("mid");
  EXPECT_TRUE(mid.holdout);
  EXPECT_TRUE(mid.train.empty());
  EXPECT_EQ(mid.val.size(), 20u);
  EXPECT_EQ(mid.test.size(), 30u);
  EXPECT_EQ(s.holdout_species, (std::vector<std::string>{"mid", "tiny"}));

  for (const auto& [name, sp] : s.species) {
    std::set<std::string> all;
    for (const auto* part : {&sp.train, &sp.val, &sp.test}) {
      for (const auto& id : *part) EXPECT_TRUE(all.insert(id).second) << id;
    }
  }
}

TEST(SplitSpecies, SeedDeterminesSplit) {
  const AnnotationCorpus f = filter_images(corpus_of(0));
  BenchmarkConfig cfg;
  const BenchmarkSplit a = split_species(f, cfg);
  const BenchmarkSplit b = split_species(f, cfg);
  cfg.seed = 1;
  const BenchmarkSplit c = split_species(f, cfg);
  bool differs = false;
  for (const auto& [name, sp] : a.species) {
    EXPECT_EQ(sp.val, b.species.at(name).val);
    EXPECT_EQ(sp.train, b.species.at(name).train);
    differs = differs || sp.val != c.species.at(name).val;
  }
  EXPECT_TRUE(differs);
}

TEST(SplitSpecies, IndependentOfInputOrder) {
  AnnotationCorpus f = filter_images(corpus_of(0));
  const BenchmarkSplit a = split_species(f, {});
  std::reverse(f.images.begin(), f.images.end());
  const BenchmarkSplit b = split_species(f, {});
  for (const auto& [name, sp] : a.species) EXPECT_EQ(sp.test, b.species.at(name).test);
}

class BuiltBenchmark : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new AnnotationCorpus(corpus_of(0));
    filtered_ = new AnnotationCorpus(filter_images(*corpus_));
    split_ = new BenchmarkSplit(build_benchmark(*corpus_, {}));
  }
  static void TearDownTestSuite() {
    delete corpus_;
    delete filtered_;
    delete split_;
  }
  static const CorpusImage& img(const std::string& id) {
    for (const auto& i : filtered_->images) {
      if (i.id == id) return i;
    }
    throw std::runtime_error("missing " + id);
  }
  static AnnotationCorpus* corpus_;
  static AnnotationCorpus* filtered_;
  static BenchmarkSplit* split_;
};
AnnotationCorpus* BuiltBenchmark::corpus_ = nullptr;
AnnotationCorpus* BuiltBenchmark::filtered_ = nullptr;
BenchmarkSplit* BuiltBenchmark::split_ = nullptr;

TEST_F(BuiltBenchmark, EveryPairHasThreeMutualVisible) {
  for (const auto* list :
       {&split_->intra_train, &split_->intra_val, &split_->intra_test, &split_->cross_species_val,
        &split_->cross_species_test, &split_->cross_family_val, &split_->cross_family_test}) {
    for (const auto& p : *list) {
      const auto& a = img(p.src_id).keypoints;
      const auto& b = img(p.tgt_id).keypoints;
      std::vector<int> mv;
      for (std::size_t k = 0; k < a.points.size(); ++k) {
        if (a.points[k].visible && b.points[k].visible) mv.push_back(static_cast<int>(k));
      }
      EXPECT_GE(mv.size(), 3u);
      EXPECT_EQ(p.mutual_visible, mv);
    }
  }
}

TEST_F(BuiltBenchmark, TrainPairCapsAndHoldouts) {
  std::set<std::string> holdouts(split_->holdout_species.begin(), split_->holdout_species.end());
  for (const auto& [name, sp] : split_->species) {
    const std::uint64_t n = sp.train.size();
    const auto& counts = split_->train_counts.at(name);
    const std::uint64_t cap = std::min<std::uint64_t>(50 * n, n < 2 ? 0 : choose2(n));
    EXPECT_EQ(counts.sampled, cap) << name;
    EXPECT_LE(counts.kept, counts.sampled);
    if (holdouts.count(name)) {
      EXPECT_EQ(n, 0u);
    }
    EXPECT_EQ(split_->val_counts.at(name).sampled,
              sp.val.size() < 2 ? 0 : choose2(sp.val.size()));
    EXPECT_EQ(split_->test_counts.at(name).sampled,
              sp.test.size() < 2 ? 0 : choose2(sp.test.size()));
  }
  for (const auto& p : split_->intra_train) {
    EXPECT_EQ(holdouts.count(p.src_species), 0u);
    EXPECT_EQ(p.src_species, p.tgt_species);
    EXPECT_LT(p.src_id, p.tgt_id);
  }
  EXPECT_FALSE(holdouts.empty());
}

TEST_F(BuiltBenchmark, IntraEvalPairsAreAllCombinations) {
  std::set<std::pair<std::string, std::string>> want;
  for (const auto& [name, sp] : split_->species) {
    for (std::size_t i = 0; i < sp.val.size(); ++i) {
      for (std::size_t j = i + 1; j < sp.val.size(); ++j) {
        if (mutual_visible(img(sp.val[i]).keypoints, img(sp.val[j]).keypoints).size() >= 3) {
          want.insert({sp.val[i], sp.val[j]});
        }
      }
    }
  }
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& p : split_->intra_val) got.insert({p.src_id, p.tgt_id});
  EXPECT_EQ(got, want);
}

TEST_F(BuiltBenchmark, CrossSpeciesMatchesBruteForce) {
  std::set<std::pair<std::string, std::string>> want;
  for (const auto& [a, sa] : split_->species) {
    for (const auto& [b, sb] : split_->species) {
      if (!(a < b) || sa.family != sb.family) continue;
      for (const auto& x : sa.test) {
        for (const auto& y : sb.test) {
          if (mutual_visible(img(x).keypoints, img(y).keypoints).size() >= 3) want.insert({x, y});
        }
      }
    }
  }
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& p : split_->cross_species_test) {
    got.insert({p.src_id, p.tgt_id});
    EXPECT_LT(p.src_species, p.tgt_species);
  }
  EXPECT_EQ(got, want);
  EXPECT_FALSE(got.empty());
}

TEST_F(BuiltBenchmark, CrossFamilyDrawsFromDistinctFamilies) {
  std::map<std::string, std::string> family;
  for (const auto& [name, sp] : split_->species) family[name] = sp.family;
  std::set<std::string> family_names;
  for (const auto& [n, f] : family) family_names.insert(f);
  const std::size_t families = family_names.size();
  const std::size_t family_pairs = families * (families - 1) / 2;
  EXPECT_EQ(split_->cross_family_val_counts.sampled, family_pairs * 20);
  EXPECT_EQ(split_->cross_family_test_counts.sampled, family_pairs * 30);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : split_->cross_family_test) {
    EXPECT_LT(family.at(p.src_species), family.at(p.tgt_species));
    EXPECT_TRUE(seen.insert({p.src_id, p.tgt_id}).second);
    const auto& ts = split_->species.at(p.src_species).test;
    EXPECT_TRUE(std::binary_search(ts.begin(), ts.end(), p.src_id));
  }
}

TEST_F(BuiltBenchmark, DeterministicForSeed) {
  const BenchmarkSplit again = build_benchmark(*corpus_, {});
  EXPECT_EQ(again.intra_train, split_->intra_train);
  EXPECT_EQ(again.intra_test, split_->intra_test);
  EXPECT_EQ(again.cross_family_val, split_->cross_family_val);
  BenchmarkConfig other;
  other.seed = 7;
  EXPECT_NE(build_benchmark(*corpus_, other).intra_train, split_->intra_train);
}

TEST(BenchmarkConfig, RejectsNonPositiveSizes) {
  BenchmarkConfig cfg;
  cfg.n_val = 0;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

}  // namespace
}  // namespace geomatch
