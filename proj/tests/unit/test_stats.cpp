// Copyright 2026 The etaudit Authors.
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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "etaudit/data.hpp"
#include "etaudit/stats.hpp"
#include "etaudit/synthetic.hpp"

using namespace etaudit;

namespace {

double brute_force_auc(const Vector& s, const Vector& y) {
  double wins = 0, pairs = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return wins / pairs;
}

double brute_force_ks(std::vector<double> a, std::vector<double> b) {
  std::vector<double> grid(a);
  grid.insert(grid.end(), b.begin(), b.end());
  double d = 0;
  for (double t : grid) {
    const double fa = std::count_if(a.begin(), a.end(), [&](double v) { return v <= t; }) / double(a.size());
    const double fb = std::count_if(b.begin(), b.end(), [&](double v) { return v <= t; }) / double(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

struct Sample {
  Vector scores;
  Vector labels;
};

Sample random_sample(std::mt19937_64& rng, std::size_t n, double shift, int levels = 0) {
  Sample s{Vector(n), Vector(n)};
  for (std::size_t i = 0; i < n; ++i) {
    s.labels[i] = i % 2;
    double v = standard_normal(rng) + shift * s.labels[i];
    if (levels > 0) v = std::round(v * levels) / levels;
    s.scores[i] = v;
  }
  return s;
}

}  // namespace

TEST(Auc, WorkedExample) {
  EXPECT_DOUBLE_EQ(auc(vec({0.1, 0.4, 0.35, 0.8}), vec({0, 0, 1, 1})), 0.75);
  EXPECT_DOUBLE_EQ(auc(vec({1, 1, 1, 1}), vec({0, 1, 0, 1})), 0.5);
  EXPECT_DOUBLE_EQ(auc(vec({0, 1, 2, 3}), vec({0, 0, 1, 1})), 1.0);
  EXPECT_THROW(auc(vec({1, 2}), vec({1, 1})), DataError);
}

TEST(Auc, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    Vector s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 7));
      y[i] = static_cast<double>(i < 1 ? 0 : i < 2 ? 1 : uniform_index(rng, 2));
    }
    EXPECT_EQ(auc(s, y), brute_force_auc(s, y));
    EXPECT_EQ(auc(s, y) + auc(-s, y), 1.0);
  }
}

TEST(Auc, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(2);
  const Sample s = random_sample(rng, 300, 0.5);
  const double base = auc(s.scores, s.labels);
  EXPECT_EQ(auc(s.scores.array().exp().matrix(), s.labels), base);
  EXPECT_EQ(auc((3.0 * s.scores.array() + 7.0).matrix(), s.labels), base);
}

TEST(Midranks, TiesShareAverage) {
  const std::vector<double> v{3, 1, 3, 2};
  EXPECT_EQ(midranks(v), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(BrunnerMunzel, ScipyReferenceValues) {
  // x = negatives, y = positives; scipy.stats.brunnermunzel(x, y) two-sided
  // gives statistic 3.1374674823029505, p = 0.0057862086661514675.
  const Vector x = vec({1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 2, 4, 1, 1});
  const Vector y = vec({3, 3, 4, 3, 1, 2, 3, 1, 1, 5, 4});
  Vector scores(x.size() + y.size()), labels(x.size() + y.size());
  scores << x, y;
  labels << Vector::Zero(x.size()), Vector::Ones(y.size());
  const auto r = brunner_munzel_auc_test(scores, labels, Alternative::two_sided);
  EXPECT_NEAR(r.statistic, 3.1374674823029505, 1e-10);
  EXPECT_NEAR(r.p_value, 0.0057862086661514675, 1e-9);
  EXPECT_NEAR(r.df, 17.682841979481548, 1e-9);
  EXPECT_LE(r.ci_low, r.auc);
  EXPECT_GE(r.ci_high, r.auc);
  const auto g = brunner_munzel_auc_test(scores, labels, Alternative::greater);
  EXPECT_NEAR(g.p_value, 0.0057862086661514675 / 2, 1e-9);
}

TEST(BrunnerMunzel, SwappedLabelsMirror) {
  std::mt19937_64 rng(3);
  const Sample s = random_sample(rng, 120, 0.3, 4);
  const Vector flipped = (1.0 - s.labels.array()).matrix();
  const auto a = brunner_munzel_auc_test(s.scores, s.labels, Alternative::two_sided);
  const auto b = brunner_munzel_auc_test(s.scores, flipped, Alternative::two_sided);
  EXPECT_NEAR(a.p_value, b.p_value, 1e-12);
  EXPECT_NEAR(a.auc, 1.0 - b.auc, 1e-12);
}

TEST(BrunnerMunzel, StrongSeparationAgreesWithPermutationOracle) {
  std::mt19937_64 rng(4);
  // AUC about 0.9: shift of sqrt(2) * 1.2816.
  const Sample s = random_sample(rng, 400, 1.8125);
  const auto r = brunner_munzel_auc_test(s.scores, s.labels);
  EXPECT_NEAR(r.auc, 0.9, 0.04);
  EXPECT_LT(r.p_value, 1e-6);
  // Permutation oracle: no permuted AUC reaches the observed one.
  const double observed = auc(s.scores, s.labels);
  int exceed = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto perm = shuffled_range(400, derive_seed(99, k));
    Vector y(400);
    for (int i = 0; i < 400; ++i) y[i] = s.labels[perm[i]];
    exceed += auc(s.scores, y) >= observed;
  }
  EXPECT_EQ(exceed, 0);
}

TEST(BrunnerMunzel, DegenerateCases) {
  const auto ties = brunner_munzel_auc_test(vec({1, 1, 1, 1}), vec({0, 1, 0, 1}));
  EXPECT_TRUE(ties.degenerate);
  EXPECT_EQ(ties.p_value, 1.0);
  const auto sep = brunner_munzel_auc_test(vec({0, 0, 1, 1}), vec({0, 0, 1, 1}));
  EXPECT_TRUE(sep.degenerate);
  EXPECT_EQ(sep.auc, 1.0);
  EXPECT_EQ(sep.p_value, 0.0);
  const auto wrong_way = brunner_munzel_auc_test(vec({1, 1, 0, 0}), vec({0, 0, 1, 1}));
  EXPECT_EQ(wrong_way.p_value, 1.0);
  EXPECT_THROW(brunner_munzel_auc_test(vec({1, 2, 3}), vec({0, 0, 1})), DataError);
}

TEST(BrunnerMunzel, TypeIErrorCalibrated) {
  std::mt19937_64 rng(5);
  int rejections = 0;
  for (int k = 0; k < 1000; ++k) {
    const Sample s = random_sample(rng, 100, 0.0);
    rejections += brunner_munzel_auc_test(s.scores, s.labels).p_value < 0.05;
  }
  EXPECT_NEAR(rejections / 1000.0, 0.05, 0.02);
}

TEST(AccuracyC2st, Behaviour) {
  Vector sep(200), lab(200);
  for (int i = 0; i < 200; ++i) {
    lab[i] = i % 2;
    sep[i] = lab[i];
  }
  const auto perfect = accuracy_c2st(sep, lab);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_LT(perfect.p_value, 1e-6);
  EXPECT_NEAR(perfect.p_value, std::pow(0.5, 200), 1e-70);

  Vector imb(200), junk(200);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    imb[i] = i < 20 ? 1 : 0;
    junk[i] = uniform01(rng) * 0.4;
  }
  const auto r = accuracy_c2st(junk, imb);
  EXPECT_DOUBLE_EQ(r.baseline, 0.9);
  EXPECT_GE(r.p_value, 0.05);
}

TEST(Ks, Basics) {
  const std::vector<double> a{1, 2, 3, 4};
  const auto same = ks_two_sample(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  const std::vector<double> lo{-3, -2, -1}, hi{1, 2, 3, 4};
  EXPECT_EQ(ks_two_sample(lo, hi).statistic, 1.0);
  EXPECT_THROW(ks_two_sample(std::vector<double>{}, a), DataError);
}

TEST(Ks, ExactPValueMatchesScipy) {
  // scipy.stats.ks_2samp([1,2,3,4,5], [3.5,6,7,8,9,10], method="exact")
  // -> statistic 5/6, pvalue 0.025974025974025972.
  const std::vector<double> a{1, 2, 3, 4, 5}, b{3.5, 6, 7, 8, 9, 10};
  const auto r = ks_two_sample(a, b);
  EXPECT_DOUBLE_EQ(r.statistic, 5.0 / 6.0);
  EXPECT_NEAR(r.p_value, 0.025974025974025976, 1e-12);
}

TEST(Ks, StatisticMatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> a(1 + uniform_index(rng, 40)), b(1 + uniform_index(rng, 40));
    for (auto& v : a) v = static_cast<double>(uniform_index(rng, 9));
    for (auto& v : b) v = static_cast<double>(uniform_index(rng, 9));
    EXPECT_NEAR(ks_two_sample(a, b).statistic, brute_force_ks(a, b), 1e-12);
  }
}

TEST(Ks, PowerAgainstShift) {
  std::mt19937_64 rng(8);
  int hits = 0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(500), b(500);
    for (auto& v : a) v = standard_normal(rng);
    for (auto& v : b) v = 0.5 + standard_normal(rng);
    hits += ks_two_sample(a, b).p_value < 0.01;
  }
  EXPECT_GE(hits, 190);
}

TEST(Wasserstein, Examples) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(wasserstein_1d(a, a), 0.0);
  EXPECT_EQ(wasserstein_1d(std::vector<double>{0}, std::vector<double>{1}), 1.0);
  EXPECT_EQ(wasserstein_1d(std::vector<double>{0, 1}, std::vector<double>{1, 2}), 1.0);
  // scipy.stats.wasserstein_distance([0, 1, 3], [5, 6, 8, 9]) = 5.666666666666667
  EXPECT_NEAR(wasserstein_1d(std::vector<double>{0, 1, 3}, std::vector<double>{5, 6, 8, 9}), 5.666666666666666,
              1e-12);
  EXPECT_THROW(wasserstein_1d(std::vector<double>{}, a), DataError);
}

TEST(Wasserstein, SymmetryAndTriangle) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(1 + uniform_index(rng, 20)), b(1 + uniform_index(rng, 20)), c(1 + uniform_index(rng, 20));
    for (auto* v : {&a, &b, &c})
      for (auto& x : *v) x = standard_normal(rng);
    EXPECT_NEAR(wasserstein_1d(a, b), wasserstein_1d(b, a), 1e-12);
    EXPECT_LE(wasserstein_1d(a, c), wasserstein_1d(a, b) + wasserstein_1d(b, c) + 1e-12);
    EXPECT_GE(wasserstein_1d(a, b), 0.0);
  }
}

TEST(Spearman, Monotone) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 8, 16, 32}, c{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(spearman(a, b), 1.0);
  EXPECT_DOUBLE_EQ(spearman(a, c), -1.0);
}

TEST(PowerStudy, ShapeAndNull) {
  const auto pts = power_study({0.0, 0.3}, 200, 100, 1);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].runs, 100u);
  EXPECT_LE(pts[0].power_auc, 0.15);
  EXPECT_GT(pts[1].power_auc, 0.8);
  EXPECT_GE(pts[1].power_auc, pts[1].power_accuracy);
  EXPECT_THROW(power_study({0.1}, 200, 10, 1), UsageError);
  EXPECT_EQ(default_power_grid().size(), 20u);
  EXPECT_DOUBLE_EQ(default_power_grid().front(), 0.005);
}

TEST(PowerStudy, WorkerCountInvariant) {
  setenv("ETAUDIT_THREADS", "1", 1);
  const auto one = power_study({0.1}, 100, 100, 3);
  setenv("ETAUDIT_THREADS", "3", 1);
  const auto three = power_study({0.1}, 100, 100, 3);
  unsetenv("ETAUDIT_THREADS");
  EXPECT_EQ(one[0].power_auc, three[0].power_auc);
  EXPECT_EQ(one[0].power_accuracy, three[0].power_accuracy);
}

TEST(StatsJson, RoundTrip) {
  AucTestResult r;
  r.auc = 0.61;
  r.p_value = 1e-5;
  r.n_pos = 10;
  r.degenerate = true;
  const auto back = auc_test_from_json(to_json(r));
  EXPECT_EQ(back.auc, r.auc);
  EXPECT_EQ(back.n_pos, r.n_pos);
  EXPECT_TRUE(back.degenerate);
}
