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
#include <numeric>

#include "geomatch/error.hpp"
#include "geomatch/metrics.hpp"
#include "geomatch/synthetic.hpp"
#include "support.hpp"

namespace geomatch {
namespace {

KeypointSet box_set(double w, double h) {
  KeypointSet set;
  set.image = {200, 200};
  set.bbox = BoundingBox{10, 10, w, h};
  set.points = {{{20, 20}, true}};
  return set;
}

std::vector<int> all_indices(const KeypointSet& s) {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    if (s.points[i].visible) idx.push_back(i);
  }
  return idx;
}

std::vector<ImagePoint> jittered(const KeypointSet& gts, const std::vector<int>& idx,
                                 double spread, CounterRng& rng) {
  std::vector<ImagePoint> preds;
  for (int i : idx) {
    const ImagePoint g = gts.points[i].position;
    preds.push_back({g.x + spread * rng.normal(), g.y + spread * rng.normal()});
  }
  return preds;
}

TEST(Pck, ExactPredictionIsCorrect) {
  const KeypointSet set = box_set(100, 50);
  const std::vector<ImagePoint> preds{{20, 20}};
  const std::vector<int> idx{0};
  for (double a : {1e-6, 0.05, 0.1, 0.2}) {
    EXPECT_TRUE(pck(preds, set, idx, {a, PckReference::bbox}).correct[0]);
  }
}

TEST(Pck, ThresholdIsInclusive) {
  const KeypointSet set = box_set(100, 50);
  const std::vector<int> idx{0};
  const PckConfig cfg{0.10, PckReference::bbox};
  EXPECT_DOUBLE_EQ(pck_threshold(set, cfg), 10.0);
  const std::vector<ImagePoint> at{{30.0, 20.0}};
  const std::vector<ImagePoint> beyond{{30.01, 20.0}};
  EXPECT_TRUE(pck(at, set, idx, cfg).correct[0]);
  EXPECT_FALSE(pck(beyond, set, idx, cfg).correct[0]);
}

TEST(Pck, ImageReferenceUsesImageSize) {
  KeypointSet set = box_set(100, 50);
  set.image = {320, 240};
  set.bbox.reset();
  EXPECT_DOUBLE_EQ(pck_threshold(set, {0.1, PckReference::image}), 32.0);
  EXPECT_THROW(pck_threshold(set, {0.1, PckReference::bbox}), ArgumentError);
  EXPECT_THROW(pck_threshold(set, {0.0, PckReference::image}), ArgumentError);
}

TEST(Pck, MatchesBruteForceOracle) {
  CounterRng rng(21);
  for (int c = 0; c < 100; ++c) {
    const KeypointSet gts = test::random_keypoints(12, {240, 180}, rng, 0.9);
    const auto idx = all_indices(gts);
    const auto preds = jittered(gts, idx, 15.0, rng);
    const PckConfig cfg{0.05 + 0.1 * rng.uniform(), PckReference::bbox};
    const PckResult r = pck(preds, gts, idx, cfg);
    const double thr = cfg.alpha * std::max(gts.bbox->w, gts.bbox->h);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double dx = preds[i].x - gts.points[idx[i]].position.x;
      const double dy = preds[i].y - gts.points[idx[i]].position.y;
      const bool ok = std::sqrt(dx * dx + dy * dy) <= thr;
      EXPECT_EQ(r.correct[i], ok);
      hits += ok;
    }
    EXPECT_EQ(r.score, idx.empty() ? 0.0 : double(hits) / double(idx.size()));
  }
}

TEST(Pck, MonotoneInAlpha) {
  CounterRng rng(22);
  const KeypointSet gts = test::random_keypoints(17, {240, 180}, rng, 1.0);
  const auto idx = all_indices(gts);
  const auto preds = jittered(gts, idx, 20.0, rng);
  double prev = 0.0;
  for (double a = 0.01; a < 0.5; a += 0.01) {
    const double s = pck(preds, gts, idx, {a, PckReference::bbox}).score;
    EXPECT_GE(s, prev);
    prev = s;
  }
}

TEST(Pck, InvariantUnderHorizontalFlip) {
  const SubgroupSchema schema = quadruped_schema();
  CounterRng rng(23);
  for (int c = 0; c < 50; ++c) {
    const KeypointSet gts = test::random_keypoints(17, {240, 180}, rng, 0.8);
    const auto idx = all_indices(gts);
    const auto preds = jittered(gts, idx, 15.0, rng);
    // mirror everything without relabeling
    const std::vector<int> identity = [] {
      std::vector<int> v(17);
      std::iota(v.begin(), v.end(), 0);
      return v;
    }();
    const KeypointSet fg = flip_keypoints(gts, identity);
    std::vector<ImagePoint> fp;
    for (const auto& p : preds) fp.push_back({239.0 - p.x, p.y});
    const PckConfig cfg{0.1, PckReference::bbox};
    const PckResult a = pck(preds, gts, idx, cfg);
    const PckResult b = pck(fp, fg, idx, cfg);
    EXPECT_EQ(a.correct, b.correct);
    EXPECT_DOUBLE_EQ(a.threshold, b.threshold);
  }
}

TEST(Pck, RejectsMisalignedInput) {
  const KeypointSet set = box_set(100, 50);
  const std::vector<ImagePoint> preds{{1, 1}, {2, 2}};
  const std::vector<int> one{0};
  const std::vector<int> bad{0, 4};
  EXPECT_THROW(pck(preds, set, one, {}), ArgumentError);
  EXPECT_THROW(pck(preds, set, bad, {}), ArgumentError);
}

PckResult result_of(std::vector<bool> correct) {
  PckResult r;
  r.correct = std::move(correct);
  return r;
}

TEST(Aggregate, ImageAndPointGrouping) {
  const std::vector<PckResult> rs{result_of({true}), result_of({false, false, false})};
  EXPECT_DOUBLE_EQ(aggregate(rs, Grouping::per_image), 0.5);
  EXPECT_DOUBLE_EQ(aggregate(rs, Grouping::per_point), 0.25);
}

TEST(Aggregate, SingleImageAgrees) {
  const std::vector<PckResult> rs{result_of({true, false, true})};
  EXPECT_DOUBLE_EQ(aggregate(rs, Grouping::per_image), aggregate(rs, Grouping::per_point));
}

TEST(Aggregate, EqualCountsAgreeAndMatchOracle) {
  CounterRng rng(24);
  std::vector<PckResult> rs;
  for (int i = 0; i < 30; ++i) {
    std::vector<bool> c;
    for (int k = 0; k < 5; ++k) c.push_back(rng.uniform() < 0.6);
    rs.push_back(result_of(c));
  }
  EXPECT_NEAR(aggregate(rs, Grouping::per_image), aggregate(rs, Grouping::per_point), 1e-12);

  rs.clear();
  double image_sum = 0;
  std::size_t hits = 0, total = 0;
  for (int i = 0; i < 30; ++i) {
    const int n = 1 + static_cast<int>(rng.bounded(9));
    std::vector<bool> c;
    std::size_t h = 0;
    for (int k = 0; k < n; ++k) {
      c.push_back(rng.uniform() < 0.6);
      h += c.back();
    }
    image_sum += double(h) / n;
    hits += h;
    total += n;
    rs.push_back(result_of(c));
  }
  EXPECT_NEAR(aggregate(rs, Grouping::per_image), image_sum / 30.0, 1e-12);
  EXPECT_NEAR(aggregate(rs, Grouping::per_point), double(hits) / double(total), 1e-12);
}

TEST(Aggregate, EmptyIsAnError) {
  EXPECT_THROW(aggregate({}, Grouping::per_point), ArgumentError);
  const std::vector<PckResult> empty{result_of({})};
  EXPECT_THROW(aggregate(empty, Grouping::per_image), ArgumentError);
}

TEST(AzimuthSensitivity, Formula) {
  EXPECT_EQ(azimuth_sensitivity({{0, 0.8}, {4, 0.4}}), 0.5);
  EXPECT_EQ(azimuth_sensitivity({{0, 0.3}, {1, 0.3}, {2, 0.3}}), 0.0);
  CounterRng rng(25);
  for (int t = 0; t < 50; ++t) {
    std::map<int, double> s;
    double hi = 0, lo = 1;
    for (int b = 0; b < 5; ++b) {
      s[b] = 0.05 + 0.9 * rng.uniform();
      hi = std::max(hi, s[b]);
      lo = std::min(lo, s[b]);
    }
    EXPECT_DOUBLE_EQ(azimuth_sensitivity(s), (hi - lo) / hi);
  }
}

TEST(AzimuthSensitivity, UndefinedCases) {
  EXPECT_THROW(azimuth_sensitivity({}), ArgumentError);
  try {
    azimuth_sensitivity({{0, 0.0}, {1, 0.0}});
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("undefined sensitivity"), std::string::npos);
  }
}

// Exhaustive restatement of the classification rules.
KeypointOutcome oracle_outcome(ImagePoint p, int gt, const KeypointSet& gts,
                               const SubgroupSchema& schema, const BoundingBox& box,
                               double thr) {
  auto dist = [&](int k) {
    return std::hypot(p.x - gts.points[k].position.x, p.y - gts.points[k].position.y);
  };
  if (dist(gt) <= thr) return {Outcome::correct, false};
  if (!(p.x >= box.x && p.x <= box.x + box.w && p.y >= box.y && p.y <= box.y + box.h)) {
    return {Outcome::miss, false};
  }
  bool other_closer = false;
  int closest_other = -1;
  for (int k = 0; k < static_cast<int>(gts.size()); ++k) {
    if (k == gt || !gts.points[k].visible) continue;
    if (dist(k) < dist(gt) && (closest_other < 0 || dist(k) < dist(closest_other))) {
      closest_other = k;
      other_closer = true;
    }
  }
  if (!other_closer) return {Outcome::jitter, false};
  bool lr = false;
  if (const auto* m = schema.members_of(gt)) {
    lr = std::find(m->begin(), m->end(), closest_other) != m->end();
  }
  return {Outcome::swap, lr};
}

TEST(Breakdown, MatchesRuleOracle) {
  const SubgroupSchema schema = quadruped_schema();
  CounterRng rng(26);
  BreakdownCounts counts;
  for (int c = 0; c < 200; ++c) {
    const KeypointSet gts = test::random_keypoints(17, {240, 180}, rng, 0.8);
    const auto idx = all_indices(gts);
    std::vector<ImagePoint> preds;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double r = rng.uniform();
      if (r < 0.3) {
        const ImagePoint g = gts.points[idx[i]].position;
        preds.push_back({g.x + 4 * rng.normal(), g.y + 4 * rng.normal()});
      } else {
        preds.push_back({rng.uniform() * 239, rng.uniform() * 179});
      }
    }
    const PckConfig cfg{0.05, PckReference::bbox};
    const Foreground fg{nullptr, gts.bbox};
    const auto got = breakdown(preds, gts, idx, schema, fg, cfg);
    ASSERT_EQ(got.size(), idx.size());
    const double thr = pck_threshold(gts, cfg);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto want = oracle_outcome(preds[i], idx[i], gts, schema, *gts.bbox, thr);
      EXPECT_EQ(got[i].outcome, want.outcome) << "case " << c << " kp " << idx[i];
      EXPECT_EQ(got[i].swap_lr, want.swap_lr) << "case " << c << " kp " << idx[i];
      counts.add(got[i]);
    }
  }
  EXPECT_GT(counts.correct, 0u);
  EXPECT_GT(counts.jitter, 0u);
  EXPECT_GT(counts.miss, 0u);
  EXPECT_GT(counts.swap, 0u);
  EXPECT_GT(counts.swap_lr, 0u);
  EXPECT_LE(counts.swap_lr, counts.swap);
  const auto f = fractions(counts);
  EXPECT_NEAR(f.correct + f.jitter + f.miss + f.swap, 1.0, 1e-9);
}

TEST(Breakdown, PartnerConfusionIsLeftRightSwap) {
  const SubgroupSchema schema("c", {{"paw", {0, 1}}}, {1, 0, 2});
  KeypointSet gts;
  gts.image = {100, 100};
  gts.bbox = BoundingBox{0, 0, 99, 99};
  gts.points = {{{20, 50}, true}, {{80, 50}, true}, {{50, 10}, true}};
  const std::vector<int> idx{0, 2};
  const std::vector<ImagePoint> preds{{80, 50}, {50, 10}};
  const auto out = breakdown(preds, gts, idx, schema, {nullptr, gts.bbox}, {0.1});
  EXPECT_EQ(out[0].outcome, Outcome::swap);
  EXPECT_TRUE(out[0].swap_lr);
  EXPECT_EQ(out[1].outcome, Outcome::correct);
}

TEST(Breakdown, MaskTakesPrecedenceOverBox) {
  const SubgroupSchema schema("c", {{"paw", {0, 1}}}, {1, 0});
  KeypointSet gts;
  gts.image = {80, 80};
  gts.bbox = BoundingBox{0, 0, 79, 79};
  gts.points = {{{10, 10}, true}, {{70, 70}, true}};
  InstanceMask mask(8, 8);
  mask.set(0, 0, true);
  const std::vector<int> idx{0};
  const std::vector<ImagePoint> preds{{30, 10}};
  const auto with_mask = breakdown(preds, gts, idx, schema, {&mask, std::nullopt}, {0.1});
  EXPECT_EQ(with_mask[0].outcome, Outcome::miss);
  const auto with_box = breakdown(preds, gts, idx, schema, {nullptr, gts.bbox}, {0.1});
  EXPECT_EQ(with_box[0].outcome, Outcome::jitter);
  EXPECT_THROW(breakdown(preds, gts, idx, schema, {}, {0.1}), ArgumentError);
}

TEST(Breakdown, FractionsOfEmptyCountsAreZero) {
  const auto f = fractions(BreakdownCounts{});
  EXPECT_EQ(f.correct + f.jitter + f.miss + f.swap + f.swap_lr, 0.0);
}

}  // namespace
}  // namespace geomatch
