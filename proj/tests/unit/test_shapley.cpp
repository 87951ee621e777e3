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
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "etaudit/shapley.hpp"
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

LinearModel linear(std::initializer_list<double> beta, double intercept = 0.0) {
  LinearModel m;
  m.coefficients = Vector(static_cast<Eigen::Index>(beta.size()));
  std::copy(beta.begin(), beta.end(), m.coefficients.data());
  m.intercept = intercept;
  return m;
}

void expect_efficient(const ExplanationMatrix& e, double tol) {
  const Vector gap = e.efficiency_gap();
  for (Eigen::Index i = 0; i < gap.size(); ++i) EXPECT_LT(gap[i], tol) << "row " << i;
}

}  // namespace

TEST(LinearClosedForm, WorkedExample) {
  const LinearModel m = linear({2.0, 0.0});
  Matrix x(1, 2);
  x << 1.0, 3.0;
  const auto e = shap_linear_interventional(m, x, Vector::Zero(2));
  EXPECT_DOUBLE_EQ(e.values(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(e.values(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(e.base_value, 0.0);
}

TEST(LinearClosedForm, UninformativeFeatureAndEfficiency) {
  const LinearModel m = linear({1.5, 0.0, -0.7}, 0.3);
  const Matrix x = gaussian(100, 3, 1);
  const Matrix bg = gaussian(200, 3, 2);
  const auto e = shap_linear_interventional(m, x, bg.colwise().mean().transpose());
  for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_LT(std::abs(e.values(i, 1)), 1e-12);
  expect_efficient(e, 1e-9);
}

TEST(Enumeration, MatchesClosedForm) {
  const LinearModel m = linear({1.0, -2.0, 0.5, 3.0}, 1.0);
  const Matrix x = gaussian(20, 4, 3);
  const Matrix bg = gaussian(40, 4, 4);
  const auto closed = shap_linear_interventional(m, x, bg.colwise().mean().transpose());
  const auto enumerated = shap_exact_enumeration(Model(m), x, bg);
  EXPECT_LT((closed.values - enumerated.values).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(closed.base_value, enumerated.base_value, 1e-12);
}

TEST(Enumeration, ProductGameByHand) {
  const RowFunction f = [](const double* r) { return r[0] * r[1]; };
  Matrix bg(2, 2);
  bg << 0, 0, 1, 1;
  Matrix x(1, 2);
  x << 1, 1;
  const auto e = shap_exact_enumeration(f, x, bg);
  EXPECT_DOUBLE_EQ(e.values(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(e.values(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(e.base_value, 0.5);
}

TEST(Enumeration, SymmetryAndLinearityOfGame) {
  const RowFunction f = [](const double* r) { return r[0] * r[1] + r[2]; };
  const RowFunction g = [](const double* r) { return std::sin(r[0]) - r[2] * r[2]; };
  const RowFunction h = [&](const double* r) { return 2.0 * f(r) - 3.0 * g(r); };
  const Matrix x = gaussian(10, 3, 5);
  const Matrix bg = gaussian(15, 3, 6);
  const auto ef = shap_exact_enumeration(f, x, bg);
  const auto eg = shap_exact_enumeration(g, x, bg);
  const auto eh = shap_exact_enumeration(h, x, bg);
  EXPECT_LT((eh.values - (2.0 * ef.values - 3.0 * eg.values)).cwiseAbs().maxCoeff(), 1e-10);

  const RowFunction sym = [](const double* r) { return r[0] * r[1]; };
  Matrix xs(1, 2), bs(1, 2);
  xs << 2, 2;
  bs << 1, 1;
  const auto es = shap_exact_enumeration(sym, xs, bs);
  EXPECT_DOUBLE_EQ(es.values(0, 0), es.values(0, 1));
}

TEST(Enumeration, RejectsTooManyFeatures) {
  const RowFunction f = [](const double*) { return 0.0; };
  EXPECT_THROW(shap_exact_enumeration(f, Matrix::Zero(1, 21), Matrix::Zero(1, 21)), UsageError);
}

TEST(TreeAlgorithm, MatchesEnumerationForTreeAndGbt) {
  const Matrix x = gaussian(300, 4, 7);
  Vector y(300);
  for (int i = 0; i < 300; ++i) y[i] = x(i, 0) * x(i, 1) + x(i, 2) > 0 ? 1 : 0;
  const DecisionTree t = fit_tree(x, y, 4, 2);
  GbtOptions o;
  o.n_trees = 15;
  o.max_depth = 3;
  const auto g = fit_gbt(x, y, o);
  const Matrix xs = x.topRows(25), bg = x.bottomRows(30);
  const auto et = shap_tree_interventional(t, xs, bg);
  const auto en = shap_exact_enumeration(Model(t), xs, bg);
  EXPECT_LT((et.values - en.values).cwiseAbs().maxCoeff(), 1e-9);
  expect_efficient(et, 1e-9);
  const auto gt = shap_tree_interventional(g, xs, bg);
  const auto gn = shap_exact_enumeration(Model(g), xs, bg);
  EXPECT_LT((gt.values - gn.values).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(gt.base_value, gn.base_value, 1e-12);
}

TEST(MonteCarlo, SingleFeatureIsExact) {
  const RowFunction f = [](const double* r) { return r[0] * r[0]; };
  const Matrix x = gaussian(5, 1, 8), bg = gaussian(10, 1, 9);
  const auto mc = shap_montecarlo(f, x, bg, 3, 0);
  const auto ex = shap_exact_enumeration(f, x, bg);
  EXPECT_LT((mc.values - ex.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MonteCarlo, DeterministicAndEfficient) {
  const Matrix x = gaussian(300, 4, 10);
  Vector y(300);
  for (int i = 0; i < 300; ++i) y[i] = x(i, 0) - x(i, 3) > 0 ? 1 : 0;
  const DecisionTree t = fit_tree(x, y, 4, 2);
  const Matrix xs = x.topRows(50), bg = x.bottomRows(40);
  const auto a = shap_montecarlo(Model(t), xs, bg, 200, 11);
  const auto b = shap_montecarlo(Model(t), xs, bg, 200, 11);
  EXPECT_EQ(a.values, b.values);
  expect_efficient(a, 1e-9);
}

TEST(MonteCarlo, WithinThreeStandardErrorsOfExact) {
  const Matrix x = gaussian(400, 4, 12);
  Vector y(400);
  for (int i = 0; i < 400; ++i) y[i] = x(i, 0) * x(i, 1) + x(i, 2) - x(i, 3) > 0 ? 1 : 0;
  const DecisionTree t = fit_tree(x, y, 4, 2);
  const Matrix xs = x.topRows(50), bg = x.bottomRows(30);
  const auto mc = shap_montecarlo(Model(t), xs, bg, 5000, 13);
  const auto ex = shap_exact_enumeration(Model(t), xs, bg);
  int outside = 0, cells = 0;
  for (Eigen::Index i = 0; i < mc.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < mc.values.cols(); ++j) {
      ++cells;
      const double err = std::abs(mc.values(i, j) - ex.values(i, j));
      outside += err > 3.0 * mc.standard_errors(i, j) + 1e-12;
    }
  }
  EXPECT_LE(outside, cells / 50 + 1);
}

TEST(Observational, SquaredDependenceZerosSecondFeature) {
  ScenarioSpec spec;
  spec.kind = ScenarioKind::squared_dependence;
  spec.n = 2000;
  const auto data = generate(spec);
  const Matrix x = data.features();
  const LinearModel m = linear({1.0, 0.0});
  const auto t12 = ConditionalMeanTable::estimate(x.col(1), x.col(0));
  const auto t21 = ConditionalMeanTable::estimate(x.col(0), x.col(1));
  ASSERT_TRUE(t12.is_exact());
  const auto e = shap_linear_observational_bivariate(m, x, t12, t21);
  for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_EQ(e.values(i, 1), 0.0);
  expect_efficient(e, 1e-12);
}

TEST(Observational, IndependentReducesToInterventional) {
  const LinearModel m = linear({1.5, -0.5}, 0.2);
  const Matrix x = gaussian(30, 2, 14);
  const Vector mu(Vector::Zero(2));
  const auto obs = shap_linear_observational_bivariate(m, x, ConditionalMeanTable::constant(0.0),
                                                       ConditionalMeanTable::constant(0.0));
  const auto inter = shap_linear_interventional(m, x, mu);
  EXPECT_LT((obs.values - inter.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Observational, PerfectlyDependentPair) {
  const LinearModel m = linear({1.0, 1.0});
  Matrix x(1, 2);
  x << 1.0, 1.0;
  Vector c(3), t(3);
  c << -1, 0, 1;
  t << -1, 0, 1;
  const auto table = ConditionalMeanTable::exact(c, t);
  const auto e = shap_linear_observational_bivariate(m, x, table, table);
  EXPECT_DOUBLE_EQ(e.values(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e.values(0, 1), 1.0);
  EXPECT_THROW(table.lookup(7.0), DataError);
}

TEST(Explain, DispatchAgreesAcrossRoutes) {
  const Matrix x = gaussian(200, 3, 15);
  Vector y(200);
  for (int i = 0; i < 200; ++i) y[i] = x(i, 0) + x(i, 1) > 0 ? 1 : 0;
  const Model m = fit_model(LearnerSpec::gbt(10, 2), x, y);
  const Matrix xs = x.topRows(10), bg = x.bottomRows(20);
  ExplainOptions o;
  const auto fast = explain(m, xs, bg, o);
  const auto slow = shap_exact_enumeration(m, xs, bg);
  EXPECT_LT((fast.values - slow.values).cwiseAbs().maxCoeff(), 1e-9);
  o.probability = true;
  const auto prob = explain(m, xs, bg, o);
  expect_efficient(prob, 1e-9);
  EXPECT_LE(prob.outputs.maxCoeff(), 1.0);
}

TEST(CompareVariants, SelfIsZeroDependentIsNot) {
  const Matrix x = gaussian(600, 2, 16);
  Vector z(600);
  for (int i = 0; i < 600; ++i) z[i] = x(i, 0) > 0 ? 1 : 0;
  const LinearModel m = linear({1.0, 1.0});
  const auto e = shap_linear_interventional(m, x, Vector::Zero(2));
  const auto same = compare_explanations(e, e, e, e, z, z, LearnerSpec::logistic());
  EXPECT_EQ(same.max_abs_cell_difference, 0.0);
  EXPECT_EQ(same.auc_abs_difference, 0.0);

  ScenarioSpec spec;
  spec.kind = ScenarioKind::squared_dependence;
  spec.n = 1200;
  const auto data = generate(spec);
  const Matrix xd = data.features();
  const Vector zd = data.protected_codes(GroupPair("0", "1"));
  const auto cmp = compare_variants(linear({1.0, 0.5}), xd.topRows(600), zd.head(600), xd.bottomRows(600),
                                    zd.tail(600), xd.topRows(600));
  EXPECT_GT(cmp.max_abs_cell_difference, 0.1);
}

TEST(ExplanationIo, JsonAndCsv) {
  const auto e = shap_linear_interventional(linear({1.0, 2.0}, 0.5), gaussian(5, 2, 17), Vector::Zero(2));
  const auto back = explanations_from_json(nlohmann::json::parse(explanations_to_json(e).dump()));
  EXPECT_EQ(back.values, e.values);
  EXPECT_EQ(back.base_value, e.base_value);
  const auto path = (std::filesystem::temp_directory_path() / "etaudit_shap.csv").string();
  save_explanations_csv(e, path);
  EXPECT_GT(std::filesystem::file_size(path), 0u);
  EXPECT_EQ(parse_shap_variant(to_string(ShapVariant::montecarlo)), ShapVariant::montecarlo);
}
