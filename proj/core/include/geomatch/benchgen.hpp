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
#pragma once

// Deterministic construction of correspondence benchmarks from single-image
// pose annotations: filtering, species-balanced splits with hold-outs, capped
// intra-species pairing, and cross-species / cross-family pairing.
//
// Stream order: species are processed in sorted-name order and images in
// sorted-id order; each species and each family pair draws from its own named
// substream of the seed, so the output does not depend on processing order.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geomatch/geoware.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {

struct CorpusImage {
  std::string id;
  std::string species;
  std::string family;
  KeypointSet keypoints;
  int instance_count = 1;
};

struct AnnotationCorpus {
  std::vector<CorpusImage> images;

  /// Throws ArgumentError on duplicate ids or a species in two families.
  void validate() const;
  std::map<std::string, const CorpusImage*> index() const;
};

struct BenchmarkConfig {
  int n_val = 20;
  int n_test = 30;
  int holdout_below = 50;
  int train_pair_factor = 50;
  int min_visible = 3;
  int min_mutual_visible = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SpeciesSplit {
  std::string family;
  bool holdout = false;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

struct PairRecord {
  std::string src_id;
  std::string tgt_id;
  std::string src_species;
  std::string tgt_species;
  std::vector<int> mutual_visible;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct PairCounts {
  std::size_t sampled = 0;  // before the mutual-visibility filter
  std::size_t kept = 0;
};

struct BenchmarkSplit {
  std::map<std::string, SpeciesSplit> species;
  std::vector<std::string> holdout_species;

  std::vector<PairRecord> intra_train, intra_val, intra_test;
  std::vector<PairRecord> cross_species_val, cross_species_test;
  std::vector<PairRecord> cross_family_val, cross_family_test;

  std::map<std::string, PairCounts> train_counts, val_counts, test_counts;  // per species
  PairCounts cross_species_val_counts, cross_species_test_counts;
  PairCounts cross_family_val_counts, cross_family_test_counts;
};

/// Keeps images with at least `min_visible` visible keypoints and exactly one
/// instance.
AnnotationCorpus filter_images(const AnnotationCorpus& corpus, int min_visible = 3);

/// Species below the hold-out threshold (or too small for val + test) become
/// hold-outs and never contribute training images. Hold-outs with enough
/// images get regular val/test samples; smaller ones put everything in test.
BenchmarkSplit split_species(const AnnotationCorpus& filtered, const BenchmarkConfig& cfg);

/// Uniform sample of min(cap, n(n-1)/2) distinct unordered index pairs (i < j),
/// in lexicographic order.
std::vector<std::pair<int, int>> sample_unordered_pairs(int n, std::uint64_t cap,
                                                        CounterRng& rng);

/// Uniform sample of min(k, n) distinct integers from [0, n), ascending.
std::vector<std::uint64_t> sample_distinct(std::uint64_t n, std::uint64_t k,
                                           CounterRng& rng);

/// All val/test pairs and capped train pairs per species, then the
/// mutual-visibility filter.
void sample_intra_pairs(BenchmarkSplit& split, const AnnotationCorpus& filtered,
                        const BenchmarkConfig& cfg);

/// Every species pair inside each multi-species family (all val x val and
/// test x test combinations), plus n_val / n_test uniformly sampled pairs per
/// unordered family pair; mutual-visibility filter applied last.
void sample_cross_pairs(BenchmarkSplit& split, const AnnotationCorpus& filtered,
                        const BenchmarkConfig& cfg);

/// filter -> split -> intra -> cross.
BenchmarkSplit build_benchmark(const AnnotationCorpus& corpus, const BenchmarkConfig& cfg);

}  // namespace geomatch
