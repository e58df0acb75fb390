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
#include "geomatch/benchgen.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

using ImageIndex = std::map<std::string, const CorpusImage*>;

// Applies the mutual-visibility filter to (src, tgt) id pairs.
void emit(const std::vector<std::pair<std::string, std::string>>& candidates,
          const ImageIndex& index, int min_mutual, std::vector<PairRecord>& out,
          PairCounts& counts) {
  counts.sampled += candidates.size();
  for (const auto& [a, b] : candidates) {
    const CorpusImage* src = index.at(a);
    const CorpusImage* tgt = index.at(b);
    auto mv = mutual_visible(src->keypoints, tgt->keypoints);
    if (static_cast<int>(mv.size()) < min_mutual) continue;
    out.push_back({a, b, src->species, tgt->species, std::move(mv)});
    counts.kept += 1;
  }
}

std::vector<std::pair<std::string, std::string>> all_pairs(
    const std::vector<std::string>& ids) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) out.emplace_back(ids[i], ids[j]);
  }
  return out;
}

std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

}  // namespace

void AnnotationCorpus::validate() const {
  std::set<std::string> ids;
  std::map<std::string, std::string> family_of;
  for (const auto& img : images) {
    if (!ids.insert(img.id).second) {
      throw ArgumentError("duplicate image id '" + img.id + "'");
    }
    auto [it, inserted] = family_of.emplace(img.species, img.family);
    if (!inserted && it->second != img.family) {
      throw ArgumentError("species '" + img.species + "' appears in families '" +
                          it->second + "' and '" + img.family + "'");
    }
  }
}

std::map<std::string, const CorpusImage*> AnnotationCorpus::index() const {
  std::map<std::string, const CorpusImage*> out;
  for (const auto& img : images) out.emplace(img.id, &img);
  return out;
}

void BenchmarkConfig::validate() const {
  if (n_val <= 0 || n_test <= 0) throw ArgumentError("n_val and n_test must be positive");
  if (holdout_below < 0 || train_pair_factor <= 0 || min_visible < 0 ||
      min_mutual_visible < 0) {
    throw ArgumentError("benchmark thresholds must be non-negative");
  }
}

AnnotationCorpus filter_images(const AnnotationCorpus& corpus, int min_visible) {
  AnnotationCorpus out;
  for (const auto& img : corpus.images) {
    if (img.instance_count != 1) continue;
    if (static_cast<int>(img.keypoints.visible_indices().size()) < min_visible) continue;
    out.images.push_back(img);
  }
  return out;
}

std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k,
                                           CounterRng& rng) {
  k = std::min(k, n);
  std::vector<std::uint64_t> out;
  if (k == n) {
    out.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  // Floyd's algorithm: exactly k draws, uniform over k-subsets.
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = n - k; j < n; ++j) {
    const std::uint64_t t = rng.bounded(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<int, int>> sample_unordered_pairs(int n, std::uint64_t cap,
                                                        CounterRng& rng) {
  const std::uint64_t total = choose2(static_cast<std::uint64_t>(std::max(n, 0)));
  const auto picks = sample_distinct(total, std::min(cap, total), rng);
  std::vector<std::pair<int, int>> out;
  out.reserve(picks.size());
  // walk rows of the strict upper triangle alongside the sorted picks
  int row = 0;
  std::uint64_t row_start = 0;
  for (std::uint64_t k : picks) {
    while (k >= row_start + static_cast<std::uint64_t>(n - 1 - row)) {
      row_start += static_cast<std::uint64_t>(n - 1 - row);
      ++row;
    }
    out.emplace_back(row, row + 1 + static_cast<int>(k - row_start));
  }
  return out;
}

BenchmarkSplit split_species(const AnnotationCorpus& filtered, const BenchmarkConfig& cfg) {
  cfg.validate();
  filtered.validate();
  std::map<std::string, std::vector<std::string>> by_species;
  std::map<std::string, std::string> family_of;
  for (const auto& img : filtered.images) {
    by_species[img.species].push_back(img.id);
    family_of[img.species] = img.family;
  }
  const CounterRng root(cfg.seed);
  BenchmarkSplit split;
  for (auto& [species, ids] : by_species) {
    std::sort(ids.begin(), ids.end());
    SpeciesSplit s;
    s.family = family_of[species];
    const int n = static_cast<int>(ids.size());
    const int eval = cfg.n_val + cfg.n_test;
    s.holdout = n < cfg.holdout_below || n < eval;
    if (s.holdout && n < eval) {
      s.test = ids;
    } else {
      CounterRng rng = root.substream("split/" + species);
      std::vector<std::string> perm = ids;
      for (int i = 0; i < eval; ++i) {
        const auto j = i + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n - i)));
        std::swap(perm[i], perm[j]);
      }
      s.val.assign(perm.begin(), perm.begin() + cfg.n_val);
      s.test.assign(perm.begin() + cfg.n_val, perm.begin() + eval);
      if (!s.holdout) s.train.assign(perm.begin() + eval, perm.end());
      std::sort(s.val.begin(), s.val.end());
      std::sort(s.test.begin(), s.test.end());
      std::sort(s.train.begin(), s.train.end());
    }
    if (s.holdout) split.holdout_species.push_back(species);
    split.species.emplace(species, std::move(s));
  }
  return split;
}

void sample_intra_pairs(BenchmarkSplit& split, const AnnotationCorpus& filtered,
                        const BenchmarkConfig& cfg) {
  const auto index = filtered.index();
  const CounterRng root(cfg.seed);
  for (const auto& [species, s] : split.species) {
    emit(all_pairs(s.val), index, cfg.min_mutual_visible, split.intra_val,
         split.val_counts[species]);
    emit(all_pairs(s.test), index, cfg.min_mutual_visible, split.intra_test,
         split.test_counts[species]);

    const int n = static_cast<int>(s.train.size());
    const std::uint64_t cap = static_cast<std::uint64_t>(cfg.train_pair_factor) * n;
    CounterRng rng = root.substream("train-pairs/" + species);
    std::vector<std::pair<std::string, std::string>> candidates;
    for (auto [i, j] : sample_unordered_pairs(n, cap, rng)) {
      candidates.emplace_back(s.train[i], s.train[j]);
    }
    emit(candidates, index, cfg.min_mutual_visible, split.intra_train,
         split.train_counts[species]);
  }
}

void sample_cross_pairs(BenchmarkSplit& split, const AnnotationCorpus& filtered,
                        const BenchmarkConfig& cfg) {
  const auto index = filtered.index();
  std::map<std::string, std::vector<std::string>> family_species;
  for (const auto& [species, s] : split.species) family_species[s.family].push_back(species);

  // cross-species: every species pair within a family (species map is sorted)
  for (const auto& [family, members] : family_species) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const auto& sa = split.species.at(members[a]);
        const auto& sb = split.species.at(members[b]);
        std::vector<std::pair<std::string, std::string>> val, test;
        for (const auto& x : sa.val) {
          for (const auto& y : sb.val) val.emplace_back(x, y);
        }
        for (const auto& x : sa.test) {
          for (const auto& y : sb.test) test.emplace_back(x, y);
        }
        emit(val, index, cfg.min_mutual_visible, split.cross_species_val,
             split.cross_species_val_counts);
        emit(test, index, cfg.min_mutual_visible, split.cross_species_test,
             split.cross_species_test_counts);
      }
    }
  }

  // cross-family: n_val / n_test sampled pairs per unordered family pair
  std::map<std::string, std::vector<std::string>> val_pool, test_pool;
  for (const auto& [species, s] : split.species) {
    auto& v = val_pool[s.family];
    v.insert(v.end(), s.val.begin(), s.val.end());
    auto& t = test_pool[s.family];
    t.insert(t.end(), s.test.begin(), s.test.end());
  }
  for (auto* pool : {&val_pool, &test_pool}) {
    for (auto& [family, ids] : *pool) std::sort(ids.begin(), ids.end());
  }
  const CounterRng root(cfg.seed);
  auto sample_between = [](const std::vector<std::string>& a,
                           const std::vector<std::string>& b, int k, CounterRng rng) {
    std::vector<std::pair<std::string, std::string>> out;
    const std::uint64_t total = static_cast<std::uint64_t>(a.size()) * b.size();
    for (std::uint64_t idx : sample_distinct(total, static_cast<std::uint64_t>(k), rng)) {
      out.emplace_back(a[idx / b.size()], b[idx % b.size()]);
    }
    return out;
  };
  std::vector<std::string> families;
  for (const auto& [family, members] : family_species) families.push_back(family);
  for (std::size_t a = 0; a < families.size(); ++a) {
    for (std::size_t b = a + 1; b < families.size(); ++b) {
      const CounterRng rng = root.substream("cross-family/" + families[a] + "|" + families[b]);
      emit(sample_between(val_pool[families[a]], val_pool[families[b]], cfg.n_val,
                          rng.substream("val")),
           index, cfg.min_mutual_visible, split.cross_family_val,
           split.cross_family_val_counts);
      emit(sample_between(test_pool[families[a]], test_pool[families[b]], cfg.n_test,
                          rng.substream("test")),
           index, cfg.min_mutual_visible, split.cross_family_test,
           split.cross_family_test_counts);
    }
  }
}

BenchmarkSplit build_benchmark(const AnnotationCorpus& corpus, const BenchmarkConfig& cfg) {
  const AnnotationCorpus filtered = filter_images(corpus, cfg.min_visible);
  BenchmarkSplit split = split_species(filtered, cfg);
  sample_intra_pairs(split, filtered, cfg);
  sample_cross_pairs(split, filtered, cfg);
  return split;
}

}  // namespace geomatch
