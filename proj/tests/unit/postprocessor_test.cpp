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

#include "geomatch/error.hpp"
#include "geomatch/gradcheck.hpp"
#include "geomatch/postprocessor.hpp"
#include "support.hpp"

namespace geomatch {
namespace {

double& at(DenseMap& m, int y, int x, int c) {
  return m.values[(static_cast<std::size_t>(y) * m.width + x) * m.channels + c];
}
double at(const DenseMap& m, int y, int x, int c) {
  return m.values[(static_cast<std::size_t>(y) * m.width + x) * m.channels + c];
}

// Straight nested-loop evaluation of the documented parameter layout.
DenseMap oracle_forward(const PostProcessor& net, const DenseMap& input) {
  std::vector<DenseMap> acts{input};
  const auto params = net.params();
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const LayerSpec& l = net.layers()[k];
    const DenseMap& x = acts.back();
    DenseMap y(x.height, x.width, l.out_channels);
    const double* p = params.data() + net.param_offset(k);
    for (int r = 0; r < x.height; ++r) {
      for (int c = 0; c < x.width; ++c) {
        for (int o = 0; o < l.out_channels; ++o) {
          double v = 0;
          switch (l.kind) {
            case LayerKind::conv1x1: {
              v = p[l.out_channels * l.in_channels + o];
              for (int i = 0; i < l.in_channels; ++i) v += p[o * l.in_channels + i] * at(x, r, c, i);
              break;
            }
            case LayerKind::conv3x3: {
              v = p[9 * l.out_channels * l.in_channels + o];
              for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                  const int sy = r + dy, sx = c + dx;
                  if (sy < 0 || sx < 0 || sy >= x.height || sx >= x.width) continue;
                  const int tap = (dy + 1) * 3 + (dx + 1);
                  for (int i = 0; i < l.in_channels; ++i) {
                    v += p[(tap * l.out_channels + o) * l.in_channels + i] * at(x, sy, sx, i);
                  }
                }
              }
              break;
            }
            case LayerKind::relu:
              v = std::max(0.0, at(x, r, c, o));
              break;
            case LayerKind::residual_add:
              v = at(x, r, c, o) + at(acts[l.skip], r, c, o);
              break;
          }
          at(y, r, c, o) = v;
        }
      }
    }
    acts.push_back(y);
  }
  DenseMap out = acts.back();
  for (int q = 0; q < out.cells(); ++q) {
    double n = 0;
    for (double v : out.cell(q)) n += v * v;
    n = std::sqrt(n);
    for (double& v : out.cell(q)) v /= n;
  }
  return out;
}

void randomize(PostProcessor& net, CounterRng& rng, double scale = 0.3) {
  for (double& p : net.params()) p = scale * rng.normal();
}

TEST(PostProcessor, IdentityNormalizesInput) {
  CounterRng rng(41);
  const FeatureMap f = test::random_features(4, 5, 6, rng, false);
  const FeatureMap out = postprocess(PostProcessor::identity(6), f);
  const FeatureMap want = l2_normalize(f);
  ASSERT_EQ(out.data().size(), want.data().size());
  for (std::size_t i = 0; i < want.data().size(); ++i) {
    EXPECT_NEAR(out.data()[i], want.data()[i], 1e-6);
  }
}

TEST(PostProcessor, ZeroWeightsAreDegenerate) {
  PostProcessor net = PostProcessor::identity(4);
  for (double& p : net.params()) p = 0.0;
  CounterRng rng(42);
  EXPECT_THROW(net.forward(test::random_dense(3, 3, 4, rng)), NumericalError);
}

TEST(PostProcessor, BottleneckMatchesLayerOracle) {
  CounterRng rng(43);
  for (int kernel : {1, 3}) {
    PostProcessor net = PostProcessor::bottleneck_stack(8, 4, 2, kernel);
    randomize(net, rng);
    const DenseMap in = test::random_dense(6, 6, 8, rng);
    const DenseMap got = net.forward(in);
    const DenseMap want = oracle_forward(net, in);
    for (std::size_t i = 0; i < want.values.size(); ++i) {
      EXPECT_NEAR(got.values[i], want.values[i], 1e-6);
    }
  }
}

TEST(PostProcessor, ZeroExpandStartsAsIdentity) {
  CounterRng rng(44);
  PostProcessor net = PostProcessor::bottleneck_stack(8, 4, 2);
  net.initialize(rng);
  const DenseMap in = test::random_dense(5, 5, 8, rng);
  const DenseMap out = net.forward(in);
  const DenseMap want = normalize_cells(in);
  for (std::size_t i = 0; i < want.values.size(); ++i) {
    EXPECT_NEAR(out.values[i], want.values[i], 1e-12);
  }
}

TEST(PostProcessor, RejectsShapeMismatch) {
  EXPECT_THROW(PostProcessor({{LayerKind::conv1x1, 4, 3}, {LayerKind::conv1x1, 4, 4}}),
               ArgumentError);
  EXPECT_THROW(PostProcessor({{LayerKind::conv1x1, 4, 3}, {LayerKind::residual_add, 3, 3, 0}}),
               ArgumentError);
  EXPECT_THROW(PostProcessor::bottleneck_stack(8, 4, 1, 5), ArgumentError);
  CounterRng rng(45);
  EXPECT_THROW(PostProcessor::identity(4).forward(test::random_dense(2, 2, 5, rng)),
               ArgumentError);
}

TEST(PostProcessor, BackwardMatchesFiniteDifferences) {
  // No rectification, so the objective is smooth in every parameter.
  PostProcessor net({{LayerKind::conv3x3, 4, 3},
                     {LayerKind::conv1x1, 3, 4},
                     {LayerKind::residual_add, 4, 4, 0},
                     {LayerKind::conv1x1, 4, 4}});
  CounterRng rng(46);
  randomize(net, rng);
  const DenseMap in = test::random_dense(5, 4, 4, rng);
  const DenseMap probe = test::random_dense(5, 4, 4, rng);
  auto loss = [&](const PostProcessor& n) {
    const DenseMap out = n.forward(in);
    double s = 0;
    for (std::size_t i = 0; i < out.values.size(); ++i) s += out.values[i] * probe.values[i];
    return s;
  };
  PostProcessor::Tape tape;
  net.forward(in, &tape);
  net.zero_grad();
  net.backward(tape, probe);
  const std::vector<double> analytic(net.grads().begin(), net.grads().end());
  PostProcessor scratch = net;
  auto f = [&](std::span<const double> p) {
    std::copy(p.begin(), p.end(), scratch.params().begin());
    return loss(scratch);
  };
  const GradCheckResult r = finite_diff_check(f, net.params(), analytic, 1e-6, 1000, rng);
  EXPECT_EQ(r.checked, net.param_count());
  EXPECT_LE(r.max_relative_error, 1e-6);
}

TEST(NormalizeCells, BackwardMatchesFiniteDifferences) {
  CounterRng rng(47);
  DenseMap in = test::random_dense(3, 3, 5, rng);
  const DenseMap probe = test::random_dense(3, 3, 5, rng);
  std::vector<double> norms;
  const DenseMap out = normalize_cells(in, &norms);
  const DenseMap g = normalize_cells_backward(out, norms, probe);
  auto f = [&](std::span<const double> v) {
    DenseMap m = in;
    std::copy(v.begin(), v.end(), m.values.begin());
    const DenseMap o = normalize_cells(m);
    double s = 0;
    for (std::size_t i = 0; i < o.values.size(); ++i) s += o.values[i] * probe.values[i];
    return s;
  };
  std::vector<double> values = in.values;
  const GradCheckResult r = finite_diff_check(f, values, g.values, 1e-6, 1000, rng);
  EXPECT_LE(r.max_relative_error, 1e-7);
}

}  // namespace
}  // namespace geomatch
