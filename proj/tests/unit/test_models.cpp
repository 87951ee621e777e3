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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "etaudit/models.hpp"
#include "etaudit/stats.hpp"
#include "etaudit/synthetic.hpp"

using namespace etaudit;

namespace {

Matrix gaussian(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x(n, p);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = standard_normal(rng);
  return x;
}

double accuracy(const Vector& p, const Vector& y) {
  double ok = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ok += ((p[i] > 0.5) == (y[i] == 1.0));
  return ok / static_cast<double>(y.size());
}

}  // namespace

TEST(FitLinear, ExactInterpolation) {
  const Matrix x = gaussian(50, 2, 1);
  const Vector y = (2.0 * x.col(0) - 3.0 * x.col(1)).array() + 1.0;
  const LinearModel m = fit_linear(x, y, Link::identity, 0.0);
  EXPECT_NEAR(m.coefficients[0], 2.0, 1e-8);
  EXPECT_NEAR(m.coefficients[1], -3.0, 1e-8);
  EXPECT_NEAR(m.intercept, 1.0, 1e-8);
}

TEST(FitLinear, SingularWithoutRidge) {
  Matrix x(10, 2);
  for (int i = 0; i < 10; ++i) x.row(i) << i, 2 * i;
  Vector y = x.col(0);
  EXPECT_THROW(fit_linear(x, y, Link::identity, 0.0), DataError);
  EXPECT_NO_THROW(fit_linear(x, y, Link::identity, 1e-3));
}

TEST(FitLinear, SeparableToy) {
  Matrix x(8, 1);
  Vector y(8);
  for (int i = 0; i < 8; ++i) {
    x(i, 0) = i < 4 ? -1.0 - i : 1.0 + i;
    y[i] = i < 4 ? 0 : 1;
  }
  const LinearModel m = fit_linear(x, y, Link::logistic, 1e-2);
  EXPECT_EQ(accuracy(predict(Model(m), x), y), 1.0);
}

TEST(FitLinear, LogisticConsistency) {
  const Matrix x = gaussian(5000, 2, 3);
  std::mt19937_64 rng(4);
  Vector y(5000);
  for (int i = 0; i < 5000; ++i) y[i] = uniform01(rng) < sigmoid(x(i, 0) + x(i, 1)) ? 1 : 0;
  const LinearModel m = fit_linear(x, y, Link::logistic, 1e-6);
  EXPECT_NEAR(m.coefficients[0], 1.0, 0.15);
  EXPECT_NEAR(m.coefficients[1], 1.0, 0.15);
}

TEST(FitLinear, RejectsNonBinaryLogisticTarget) {
  const Matrix x = gaussian(10, 1, 0);
  Vector y = Vector::Constant(10, 2.0);
  EXPECT_THROW(fit_linear(x, y, Link::logistic, 1e-6), DataError);
}

TEST(Predict, LinearBasics) {
  LinearModel m;
  m.coefficients = Vector::Ones(1);
  Matrix x(1, 1);
  x << 2.0;
  EXPECT_DOUBLE_EQ(predict(Model(m), x)[0], 2.0);
  m.link = Link::logistic;
  x << 0.0;
  EXPECT_DOUBLE_EQ(predict(Model(m), x)[0], 0.5);
  EXPECT_THROW(predict(Model(m), Matrix(1, 3)), UsageError);
}

TEST(Predict, LinearIsExactlyAffine) {
  LinearModel m;
  m.intercept = 0.25;
  m.coefficients = Vector(3);
  m.coefficients << 1.5, -2.0, 0.5;
  const Matrix x = gaussian(20, 3, 9);
  const Model model(m);
  for (double delta : {0.5, 1.0, 2.0, 4.0}) {
    Matrix shifted = x;
    shifted.col(1).array() += delta;
    const Vector diff = predict(model, shifted) - predict(model, x);
    for (Eigen::Index i = 0; i < diff.size(); ++i) EXPECT_NEAR(diff[i], -2.0 * delta, 1e-12);
  }
}

TEST(FitTree, AxisAlignedStump) {
  const Matrix x = gaussian(200, 2, 5);
  Vector y(200);
  for (int i = 0; i < 200; ++i) y[i] = x(i, 0) > 0 ? 1 : 0;
  const DecisionTree t = fit_tree(x, y, 1, 1, TreeTask::classification);
  ASSERT_EQ(t.nodes[0].feature, 0);
  EXPECT_LT(std::abs(t.nodes[0].threshold), 0.2);
  EXPECT_EQ(accuracy(predict(Model(t), x), y), 1.0);
}

TEST(FitTree, ConstantTargetIsSingleLeaf) {
  const Matrix x = gaussian(30, 2, 6);
  const Vector y = Vector::Constant(30, 0.7);
  const DecisionTree t = fit_tree(x, y, 3, 1);
  EXPECT_EQ(t.depth(), 0);
  EXPECT_EQ(t.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(t.nodes[0].value, 0.7);
}

TEST(FitTree, XorNeedsDepthTwo) {
  Matrix x(1000, 2);
  Vector y(1000);
  for (int r = 0; r < 250; ++r) {
    for (int k = 0; k < 4; ++k) {
      const int i = 4 * r + k;
      x(i, 0) = k & 1;
      x(i, 1) = (k >> 1) & 1;
      y[i] = ((k & 1) ^ ((k >> 1) & 1));
    }
  }
  const DecisionTree deep = fit_tree(x, y, 2, 1, TreeTask::classification);
  EXPECT_EQ(accuracy(predict(Model(deep), x), y), 1.0);
  const DecisionTree stump = fit_tree(x, y, 1, 1, TreeTask::classification);
  EXPECT_LE(accuracy(predict(Model(stump), x), y), 0.75);
}

TEST(FitTree, DepthBoundAndFiniteLeaves) {
  const Matrix x = gaussian(300, 4, 8);
  const Vector y = x.col(0).array().square() + x.col(1).array();
  for (int d = 1; d <= 5; ++d) {
    const DecisionTree t = fit_tree(x, y, d, 2);
    EXPECT_LE(t.depth(), d);
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        EXPECT_TRUE(std::isfinite(n.value));
      } else {
        EXPECT_GE(n.left, 0);
        EXPECT_GE(n.right, 0);
      }
    }
  }
}

TEST(FitGbt, StumpPlusBase) {
  const Matrix x = gaussian(100, 2, 10);
  const Vector y = x.col(0);
  GbtOptions o;
  o.n_trees = 1;
  o.max_depth = 1;
  o.loss = Loss::squared;
  const auto g = fit_gbt(x, y, o);
  ASSERT_EQ(g.trees.size(), 1u);
  EXPECT_NEAR(g.base_score, y.mean(), 1e-12);
  EXPECT_EQ(g.trees[0].depth(), 1);
  o.n_trees = 0;
  EXPECT_THROW(fit_gbt(x, y, o), UsageError);
}

TEST(FitGbt, SquaredLossConverges) {
  Matrix x(201, 1);
  Vector y(201);
  for (int i = 0; i <= 200; ++i) {
    x(i, 0) = -1.0 + i / 100.0;
    y[i] = x(i, 0) * x(i, 0);
  }
  GbtOptions o;
  o.n_trees = 200;
  o.max_depth = 1;
  o.learning_rate = 0.1;
  o.loss = Loss::squared;
  const auto g = fit_gbt(x, y, o);
  const Vector pred = predict(Model(g), x);
  const double rmse = std::sqrt((pred - y).squaredNorm() / 201.0);
  EXPECT_LT(rmse, 0.1);
  for (std::size_t s = 1; s < g.train_loss.size(); ++s) EXPECT_LE(g.train_loss[s], g.train_loss[s - 1]);
}

TEST(FitGbt, LogisticOnScenarioData) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::indirect;
  spec.n = 6000;
  spec.gamma = 0.5;
  const auto data = generate(spec);
  const Matrix x = data.features();
  const Vector y = data.target_values();
  const Matrix xtr = x.topRows(3000), xte = x.bottomRows(3000);
  const auto g = fit_gbt(xtr, y.head(3000), GbtOptions{});
  EXPECT_GT(auc(predict(Model(g), xte), y.tail(3000)), 0.75);
  for (std::size_t s = 1; s < g.train_loss.size(); ++s) EXPECT_LE(g.train_loss[s], g.train_loss[s - 1] + 1e-15);
}

TEST(FitGbt, ZeroLeavesGiveBaseScore) {
  GradientBoostedTrees g;
  g.base_score = 0.3;
  g.loss = Loss::squared;
  g.n_features = 2;
  DecisionTree t;
  t.nodes.push_back(TreeNode{});
  t.n_features = 2;
  g.trees.push_back(t);
  const Vector p = predict(Model(g), gaussian(5, 2, 1));
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], 0.3);
}

TEST(ModelJson, RoundTripAllKinds) {
  const Matrix x = gaussian(200, 3, 12);
  Vector y(200);
  for (int i = 0; i < 200; ++i) y[i] = x(i, 0) + x(i, 2) > 0 ? 1 : 0;
  for (const auto& spec : {LearnerSpec::logistic(), LearnerSpec::tree(3), LearnerSpec::gbt(20, 2)}) {
    const Model m = fit_model(spec, x, y);
    const auto j = model_to_json(m);
    EXPECT_EQ(j.at("format_version"), kModelFormatVersion);
    const Model back = model_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(predict(back, x), predict(m, x)) << spec.name();
  }
  auto bad = model_to_json(fit_model(LearnerSpec::tree(2), x, y));
  bad["parameters"]["nodes"][0]["left"] = 999;
  EXPECT_THROW(model_from_json(bad), DataError);
}

TEST(LearnerSpec, ParseNames) {
  EXPECT_EQ(LearnerSpec::parse("logistic").name(), "logistic");
  EXPECT_EQ(LearnerSpec::parse("ols").name(), "linear");
  EXPECT_EQ(LearnerSpec::parse("gbt-squared").name(), "gbt-squared");
  EXPECT_THROW(LearnerSpec::parse("svm"), UsageError);
}
