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

#include <cmath>
#include <limits>

#include "geomatch/error.hpp"
#include "geomatch/pose.hpp"
#include "support.hpp"

namespace geomatch {
namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i]) * b[i];
  return s;
}

double oracle_imd(const FeatureMap& s, const FeatureMap& t, const InstanceMask& m, bool mean) {
  double total = 0;
  std::size_t n = 0;
  for (int y = 0; y < s.height(); ++y) {
    for (int x = 0; x < s.width(); ++x) {
      if (!m.at(y, x)) continue;
      int best = 0;
      for (int j = 1; j < t.cells(); ++j) {
        if (dot(s.at(y, x), t.cell(j)) > dot(s.at(y, x), t.cell(best))) best = j;
      }
      double d2 = 0;
      for (int c = 0; c < s.channels(); ++c) d2 += std::pow(double(s.at(y, x)[c]) - t.cell(best)[c], 2);
      total += std::sqrt(d2);
      ++n;
    }
  }
  return mean ? total / double(n) : total;
}

InstanceMask random_mask(int h, int w, CounterRng& rng) {
  InstanceMask m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, rng.uniform() < 0.5);
  }
  m.set(0, 0, true);
  return m;
}

TEST(Imd, ZeroForSelf) {
  CounterRng rng(1);
  const FeatureMap f = test::random_features(5, 5, 8, rng);
  EXPECT_EQ(imd(f, f, InstanceMask(5, 5, true)), 0.0);
}

TEST(Imd, OrthogonalCellIsSqrtTwo) {
  FeatureMap s(1, 2, 3);
  s.at(0, 0)[0] = 1.0f;
  s.at(0, 1)[1] = 1.0f;
  FeatureMap t(2, 2, 3);
  for (int i = 0; i < 4; ++i) t.at(i / 2, i % 2)[2] = 1.0f;
  InstanceMask m(1, 2);
  m.set(0, 0, true);
  EXPECT_NEAR(imd(l2_normalize(s), l2_normalize(t), m), std::sqrt(2.0), 1e-7);
}

TEST(Imd, MatchesOracleSumAndMean) {
  CounterRng rng(2);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap a = test::random_features(4, 4, 4, rng);
    const FeatureMap b = test::random_features(4, 4, 4, rng);
    const InstanceMask m = random_mask(4, 4, rng);
    EXPECT_NEAR(imd(a, b, m, Reduction::sum), oracle_imd(a, b, m, false), 1e-6);
    EXPECT_NEAR(imd(a, b, m, Reduction::mean), oracle_imd(a, b, m, true), 1e-6);
  }
}

TEST(Imd, InvariantToTargetPermutation) {
  CounterRng rng(3);
  const FeatureMap a = test::random_features(4, 5, 6, rng);
  const FeatureMap b = test::random_features(4, 5, 6, rng);
  const InstanceMask m = random_mask(4, 5, rng);
  // Reverse the target's cell order (a permutation of cells).
  std::vector<float> data;
  for (int i = b.cells() - 1; i >= 0; --i) data.insert(data.end(), b.cell(i).begin(), b.cell(i).end());
  const FeatureMap p(4, 5, 6, data, true);
  EXPECT_NEAR(imd(a, b, m), imd(a, p, m), 1e-9);
  EXPECT_GE(imd(a, b, m), 0.0);
}

TEST(Imd, ErrorsOnEmptyOrMismatchedMask) {
  CounterRng rng(4);
  const FeatureMap a = test::random_features(3, 3, 4, rng);
  EXPECT_THROW(imd(a, a, InstanceMask(3, 3, false)), ArgumentError);
  EXPECT_THROW(imd(a, a, InstanceMask(2, 3, true)), ArgumentError);
}

TEST(MutualNnDistance, ZeroForSelfAndMatchesOracle) {
  CounterRng rng(5);
  const FeatureMap a = test::random_features(5, 5, 4, rng);
  EXPECT_NEAR(mutual_nn_distance(a, a), 0.0, 1e-6);
  const FeatureMap b = test::random_features(5, 5, 4, rng);
  const auto pairs = mutual_nn_pairs(a, b);
  double sum = 0;
  for (auto [i, j] : pairs) {
    double d2 = 0;
    for (int c = 0; c < 4; ++c) d2 += std::pow(double(a.cell(i)[c]) - b.cell(j)[c], 2);
    sum += std::sqrt(d2);
  }
  EXPECT_NEAR(mutual_nn_distance(a, b), sum / double(pairs.size()), 1e-6);
}

TEST(Variants, ParseAndFramesRoundTrip) {
  EXPECT_EQ(parse_variant_list("identity,hflip"),
            (std::vector<VariantLabel>{VariantLabel::identity, VariantLabel::hflip}));
  EXPECT_THROW(parse_variant("mirror"), ArgumentError);
  EXPECT_THROW(parse_variant_list("hflip,identity"), ArgumentError);
  const GridSize g{7, 4};
  for (auto v : {VariantLabel::identity, VariantLabel::hflip, VariantLabel::rot90,
                 VariantLabel::rot180, VariantLabel::rot270}) {
    const GridPoint p{2.25, 1.5};
    const GridPoint q = from_variant_frame(to_variant_frame(p, v, g), v, g);
    EXPECT_NEAR(q.x, p.x, 1e-12);
    EXPECT_NEAR(q.y, p.y, 1e-12);
  }
}

TEST(Variants, FeatureAndMaskTransformsAgreeWithFrames) {
  CounterRng rng(6);
  const FeatureMap f = test::random_features(3, 5, 2, rng);
  for (auto v : {VariantLabel::hflip, VariantLabel::rot90, VariantLabel::rot270}) {
    const FeatureMap t = transform_features(f, v);
    const GridPoint q = to_variant_frame({4, 1}, v, f.grid());
    EXPECT_EQ(t.at(int(q.y), int(q.x))[0], f.at(1, 4)[0]);
    InstanceMask m(3, 5);
    m.set(1, 4, true);
    EXPECT_TRUE(transform_mask(m, v).at(int(q.y), int(q.x)));
  }
}

TemplateSet make_set(const std::string& name, std::map<std::string, FeatureMap> maps) {
  TemplateSet s;
  s.name = name;
  for (auto& [label, f] : maps) s.templates[label] = PoseTemplate{f, std::nullopt};
  return s;
}

TEST(PredictPose, ExactTemplateWins) {
  CounterRng rng(7);
  const FeatureMap q = test::random_features(4, 4, 8, rng);
  const std::vector<TemplateSet> sets{
      make_set("a", {{"left", q}, {"right", test::random_features(4, 4, 8, rng)}})};
  const PosePrediction p = predict_pose(q, InstanceMask(4, 4, true), sets);
  EXPECT_EQ(p.label, "left");
  EXPECT_EQ(p.set_scores[0].at("left"), 0.0);
}

TEST(PredictPose, MajorityVote) {
  CounterRng rng(8);
  const FeatureMap q = test::random_features(4, 4, 8, rng);
  const FeatureMap other = test::random_features(4, 4, 8, rng);
  const std::vector<TemplateSet> sets{make_set("a", {{"left", q}, {"right", other}}),
                                      make_set("b", {{"left", q}, {"right", other}}),
                                      make_set("c", {{"left", other}, {"right", q}})};
  const PosePrediction p = predict_pose(q, InstanceMask(4, 4, true), sets);
  EXPECT_EQ(p.label, "left");
  EXPECT_EQ(p.votes.at("left"), 2);
  EXPECT_EQ(p.votes.at("right"), 1);
}

TEST(PredictPose, SingleSetIsPerSetArgmin) {
  CounterRng rng(9);
  for (int t = 0; t < 10; ++t) {
    const FeatureMap q = test::random_features(4, 4, 4, rng);
    std::map<std::string, FeatureMap> maps;
    for (const char* l : {"back", "front", "left", "right"}) {
      maps.emplace(l, test::random_features(4, 4, 4, rng));
    }
    const InstanceMask m = random_mask(4, 4, rng);
    std::string best;
    double bs = std::numeric_limits<double>::infinity();
    for (auto& [l, f] : maps) {
      const double s = oracle_imd(q, f, m, false);
      if (s < bs) {
        bs = s;
        best = l;
      }
    }
    EXPECT_EQ(predict_pose(q, m, std::vector<TemplateSet>{make_set("s", maps)}).label, best);
  }
}

TEST(PredictPose, NearestTemplatePerSetWinsTheVote) {
  CounterRng rng(10);
  // Features of a rotated image are not a rotated tensor, so each pose has its
  // own map; the query is a perturbed copy of the r90 map.
  const FeatureMap r90 = test::random_features(5, 5, 8, rng);
  FeatureMap query = r90;
  for (float& v : query.mutable_data()) v += 0.05f * static_cast<float>(rng.normal());
  std::vector<TemplateSet> sets;
  for (int k = 0; k < 3; ++k) {
    sets.push_back(make_set("set" + std::to_string(k),
                            {{"r0", test::random_features(5, 5, 8, rng)},
                             {"r90", r90},
                             {"r180", test::random_features(5, 5, 8, rng)}}));
  }
  const PosePrediction p = predict_pose(l2_normalize(query), InstanceMask(5, 5, true), sets);
  EXPECT_EQ(p.label, "r90");
  for (const auto& c : p.set_choices) EXPECT_EQ(c, "r90");
}

TEST(Imd, TensorRotationOfTargetIsInvisible) {
  CounterRng rng(17);
  const FeatureMap f = test::random_features(5, 5, 8, rng);
  const InstanceMask m(5, 5, true);
  EXPECT_EQ(imd(f, rotate90(f, 1), m), 0.0);
  EXPECT_EQ(imd(f, flip_horizontal(f), m), 0.0);
}

TEST(PredictPose, TieBreaksByTotalImdThenLabel) {
  CounterRng rng(11);
  const FeatureMap q = test::random_features(4, 4, 8, rng);
  const FeatureMap far = test::random_features(4, 4, 8, rng);
  const FeatureMap near = test::random_features(4, 4, 8, rng);
  // One vote each; "b" sets have an exact match so their total IMD is lower.
  const std::vector<TemplateSet> sets{make_set("x", {{"a", near}, {"b", far}}),
                                      make_set("y", {{"a", far}, {"b", q}})};
  const InstanceMask m(4, 4, true);
  const PosePrediction p = predict_pose(q, m, sets);
  const double ta = imd(q, near, m) + imd(q, far, m);
  const double tb = imd(q, far, m) + 0.0;
  EXPECT_EQ(p.label, ta < tb ? "a" : "b");
  // Identical sets with swapped labels: equal votes and totals, lexicographic.
  const std::vector<TemplateSet> sym{make_set("x", {{"a", q}, {"b", far}}),
                                     make_set("y", {{"a", far}, {"b", q}})};
  EXPECT_EQ(predict_pose(q, m, sym).label, "a");
}

TEST(PredictPose, RejectsDegenerateSets) {
  CounterRng rng(12);
  const FeatureMap q = test::random_features(3, 3, 4, rng);
  EXPECT_THROW(predict_pose(q, InstanceMask(3, 3, true), {}), ArgumentError);
  const std::vector<TemplateSet> one{make_set("x", {{"a", q}})};
  EXPECT_THROW(predict_pose(q, InstanceMask(3, 3, true), one), ArgumentError);
}

std::vector<PoseVariant> variants_of(const FeatureMap& f, const InstanceMask& m) {
  std::vector<PoseVariant> out;
  for (auto v : {VariantLabel::identity, VariantLabel::hflip}) {
    out.push_back({v, transform_features(f, v), transform_mask(m, v)});
  }
  return out;
}

// Identity and mirrored-image features as separately extracted maps.
std::vector<PoseVariant> extracted_variants(const FeatureMap& plain, const FeatureMap& mirrored,
                                            const InstanceMask& m) {
  return {{VariantLabel::identity, plain, m},
          {VariantLabel::hflip, mirrored, transform_mask(m, VariantLabel::hflip)}};
}

TEST(AdaptiveAlign, PicksExactFlipWithZeroScore) {
  CounterRng rng(13);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap plain = test::random_features(6, 6, 16, rng);
    const FeatureMap mirrored = test::random_features(6, 6, 16, rng);
    const InstanceMask m = random_mask(6, 6, rng);
    const auto vs = extracted_variants(plain, mirrored, m);
    const AlignmentResult r = adaptive_align(vs, mirrored);
    EXPECT_EQ(r.chosen, VariantLabel::hflip);
    EXPECT_EQ(r.scores[1].second, 0.0);
    EXPECT_GT(r.scores[0].second, 0.0);
    EXPECT_EQ(adaptive_align(vs, plain).chosen, VariantLabel::identity);
  }
}

TEST(AdaptiveAlign, ArgminOfPerVariantOracle) {
  CounterRng rng(14);
  for (int t = 0; t < 10; ++t) {
    const FeatureMap src = test::random_features(5, 5, 4, rng);
    const FeatureMap tgt = test::random_features(5, 5, 4, rng);
    const InstanceMask m = random_mask(5, 5, rng);
    const auto vs = variants_of(src, m);
    const AlignmentResult r = adaptive_align(vs, tgt);
    const double s0 = oracle_imd(vs[0].features, tgt, vs[0].mask, true);
    const double s1 = oracle_imd(vs[1].features, tgt, vs[1].mask, true);
    EXPECT_NEAR(r.scores[0].second, s0, 1e-6);
    EXPECT_NEAR(r.scores[1].second, s1, 1e-6);
    EXPECT_EQ(r.chosen, s1 < s0 ? VariantLabel::hflip : VariantLabel::identity);
  }
}

TEST(AdaptiveAlign, TieKeepsIdentityAndRequiresItFirst) {
  CounterRng rng(15);
  const FeatureMap sym = test::random_features(1, 1, 4, rng);  // mirror-symmetric
  const InstanceMask m(1, 1, true);
  const AlignmentResult r = adaptive_align(variants_of(sym, m), sym);
  EXPECT_EQ(r.chosen, VariantLabel::identity);
  auto vs = variants_of(sym, m);
  std::swap(vs[0], vs[1]);
  EXPECT_THROW(adaptive_align(vs, sym), ArgumentError);
}

TEST(AdaptiveAlign, MutualNnMetric) {
  CounterRng rng(16);
  const FeatureMap src = test::random_features(5, 5, 16, rng);
  AlignConfig cfg;
  cfg.metric = AlignMetric::mutual_nn;
  const FeatureMap mirrored = test::random_features(5, 5, 16, rng);
  const auto vs = extracted_variants(src, mirrored, InstanceMask(5, 5, true));
  EXPECT_EQ(adaptive_align(vs, mirrored, cfg).chosen, VariantLabel::hflip);
  EXPECT_EQ(adaptive_align(vs, src, cfg).chosen, VariantLabel::identity);
}

}  // namespace
}  // namespace geomatch
