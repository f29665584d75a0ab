// Copyright 2026 The gnnaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <numbers>

#include "gnnaudit/analysis.hpp"
#include "test_util.hpp"

namespace gnnaudit {
namespace {

using V = std::vector<double>;

TEST(DivergenceTest, KnownKlValues) {
  EXPECT_NEAR(KlDivergence(V{0.9, 0.1}, V{0.5, 0.5}), 0.3681, 5e-5);
  EXPECT_NEAR(KlDivergence(V{0.5, 0.5}, V{0.9, 0.1}), 0.5108, 5e-5);
  EXPECT_DOUBLE_EQ(KlDivergence(V{0.2, 0.3, 0.5}, V{0.2, 0.3, 0.5}), 0.0);
}

TEST(DivergenceTest, KlIsFiniteOnZeros) {
  const double kl = KlDivergence(V{1.0, 0.0}, V{0.0, 1.0});
  EXPECT_TRUE(std::isfinite(kl));
  EXPECT_GT(kl, 20.0);
  EXPECT_THROW(KlDivergence(V{1.0}, V{0.5, 0.5}), InvalidArgument);
}

V RandomSimplex(std::size_t n, Rng& rng) {
  V p(n);
  double s = 0.0;
  for (double& x : p) {
    x = rng.Uniform() < 0.2 ? 0.0 : rng.Uniform();
    s += x;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (double& x : p) x /= s;
  return p;
}

TEST(DivergenceTest, RandomizedProperties) {
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 2 + rng.UniformIndex(6);
    const V p = RandomSimplex(n, rng), q = RandomSimplex(n, rng);
    const double kl = KlDivergence(p, q);
    EXPECT_GE(kl, 0.0);
    EXPECT_EQ(KlDivergence(p, p), 0.0);
    if (p != q) {
      EXPECT_GT(kl, 0.0);
    }
    const double js = JsDivergence(p, q);
    EXPECT_EQ(js, JsDivergence(q, p));
    EXPECT_GE(js, 0.0);
    EXPECT_LE(js, std::numbers::ln2);
  }
  EXPECT_NEAR(JsDivergence(V{1.0, 0.0}, V{0.0, 1.0}), std::numbers::ln2, 1e-15);
}

TEST(LogitTest, FixedPointsAndClamping) {
  EXPECT_DOUBLE_EQ(LogitTransform(0.5), 0.0);
  EXPECT_NEAR(LogitTransform(1.0), 13.8155, 1e-4);
  EXPECT_NEAR(LogitTransform(0.0), -13.8155, 1e-4);
  for (double z = -12.0; z <= 12.0; z += 0.37) EXPECT_NEAR(LogitTransform(Sigmoid(z)), z, 1e-9) << z;
}

TEST(GapTest, KnownValueAndRationalRecomputation) {
  EXPECT_NEAR(PerformanceGap(0.9889, 0.7716), 21.97, 5e-3);
  EXPECT_THROW(PerformanceGap(0.0, 0.5), InvalidArgument);
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const long long n = 1 + static_cast<long long>(rng.UniformIndex(3000));
    const long long m = 1 + static_cast<long long>(rng.UniformIndex(3000));
    const long long a = 1 + static_cast<long long>(rng.UniformIndex(static_cast<std::uint64_t>(n)));
    const long long b = static_cast<long long>(rng.UniformIndex(static_cast<std::uint64_t>(m) + 1));
    const double train = static_cast<double>(a) / static_cast<double>(n);
    const double test = static_cast<double>(b) / static_cast<double>(m);
    // 100 (a/n - b/m) / (a/n) = 100 (a m - b n) / (a m), exact in integers
    const long double exact = 100.0L * static_cast<long double>(a * m - b * n) / static_cast<long double>(a * m);
    EXPECT_NEAR(PerformanceGap(train, test), static_cast<double>(exact), 1e-10 * (1.0 + std::abs(static_cast<double>(exact))));
  }
}

TEST(SummaryTest, MeanAndSampleStd) {
  const auto s = Summarize(V{1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_EQ(s.n, 3u);
  EXPECT_DOUBLE_EQ(Summarize(V{0.7}).std, 0.0);
  EXPECT_THROW(Summarize(V{}), InvalidArgument);
}

TEST(HistogramTest, BinsCoverRange) {
  const V values{0.0, 0.5, 1.0, 1.0, 0.99};
  const auto h = MakeHistogram(values, 0.0, 1.0);
  ASSERT_EQ(h.counts.size(), 50u);
  ASSERT_EQ(h.edges.size(), 51u);
  std::size_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, values.size());
  EXPECT_EQ(h.counts.back(), 3u);  // 0.99 and both 1.0 in the closed last bin
  const auto d = MakeHistogram(V{2.0, 2.0}, 2.0, 2.0, 4);
  EXPECT_EQ(d.counts[0], 2u);
}

TEST(EcdfTest, MonotoneToOne) {
  const auto e = MakeEcdf(V{0.3, 0.1, 0.2, 0.2});
  EXPECT_DOUBLE_EQ(e.At(0.0), 0.0);
  EXPECT_DOUBLE_EQ(e.At(0.1), 0.25);
  EXPECT_DOUBLE_EQ(e.At(0.2), 0.75);
  EXPECT_DOUBLE_EQ(e.At(5.0), 1.0);
}

PosteriorTable TableOf(const std::vector<V>& rows, std::vector<int> labels) {
  PosteriorTable t;
  t.probs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      t.probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    t.losses.push_back(-std::log(rows[i][static_cast<std::size_t>(labels[i])]));
  }
  t.labels = std::move(labels);
  return t;
}

TEST(NeighborJsTest, PathWithKnownPosteriors) {
  const auto t = TableOf({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}}, {0, 0, 1, 1});
  const EdgeList edges{{0, 1}, {1, 2}};
  const auto prof = NeighborJsProfileOf(t, edges);
  ASSERT_EQ(prof.records.size(), 3u);  // node 3 is isolated
  EXPECT_DOUBLE_EQ(prof.records[0].mean_js, 0.0);
  EXPECT_NEAR(prof.records[1].mean_js, std::numbers::ln2 / 2.0, 1e-15);
  EXPECT_NEAR(prof.records[2].mean_js, std::numbers::ln2, 1e-15);
  EXPECT_DOUBLE_EQ(prof.ecdf.At(prof.records[2].mean_js), 1.0);
}

TEST(KlProfileTest, IdenticalTablesGiveZero) {
  const auto t = TableOf({{0.7, 0.3}, {0.2, 0.8}, {0.5, 0.5}}, {0, 1, 0});
  const auto prof = KlProfileOf(t, t, {1, 0, 0});
  for (const auto& r : prof.records) EXPECT_EQ(r.kl, 0.0);
  EXPECT_EQ(prof.members.counts[0] + prof.nonmembers.counts[0], 3u);
}

TEST(LogitProfileTest, SeparatesConfidentMembers) {
  const auto t = TableOf({{0.99, 0.01}, {0.02, 0.98}, {0.6, 0.4}, {0.45, 0.55}}, {0, 1, 0, 1});
  const auto prof = LogitProfileOf(t, {1, 1, 0, 0});
  EXPECT_NEAR(prof.records[0].logit, std::log(0.99 / 0.01), 1e-12);
  EXPECT_DOUBLE_EQ(prof.separability, 1.0);
}

}  // namespace
}  // namespace gnnaudit
