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

#include "etaudit/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "etaudit/data.hpp"
#include "etaudit/parallel.hpp"
#include "etaudit/stats.hpp"

namespace etaudit {

std::string to_string(ShapVariant v) {
  switch (v) {
    case ShapVariant::interventional: return "interventional";
    case ShapVariant::observational_linear: return "observational-linear";
    case ShapVariant::montecarlo: return "montecarlo";
  }
  return "unknown";
}

ShapVariant parse_shap_variant(std::string_view name) {
  if (name == "exact" || name == "interventional") return ShapVariant::interventional;
  if (name == "observational" || name == "observational-linear") return ShapVariant::observational_linear;
  if (name == "montecarlo" || name == "mc") return ShapVariant::montecarlo;
  throw UsageError("unknown Shapley variant '" + std::string(name) +
                   "' (expected exact, observational, montecarlo)");
}

Vector ExplanationMatrix::efficiency_gap() const {
  Vector gap(values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    gap[i] = std::abs(values.row(i).sum() - (outputs[i] - base_value));
  }
  return gap;
}

RowFunction explained_function(const Model& model, bool probability) {
  if (probability && has_logistic_output(model)) {
    return [&model](const double* row) { return sigmoid(margin_row(model, row)); };
  }
  return [&model](const double* row) { return margin_row(model, row); };
}

Matrix sample_background(const Matrix& pool, std::size_t cap, std::uint64_t seed) {
  if (pool.rows() == 0) throw DataError("background pool is empty");
  if (cap == 0 || static_cast<std::size_t>(pool.rows()) <= cap) return pool;
  auto order = shuffled_range(static_cast<std::size_t>(pool.rows()), seed);
  order.resize(cap);
  std::sort(order.begin(), order.end());
  return take_rows(pool, order);
}

namespace {

void check_background(const Matrix& x, const Matrix& background) {
  if (background.rows() < 1) throw UsageError("background sample must have at least one row");
  if (background.cols() != x.cols()) {
    throw UsageError("background has " + std::to_string(background.cols()) + " features, data has " +
                     std::to_string(x.cols()));
  }
}

double background_mean(const RowFunction& f, const Matrix& background) {
  double s = 0.0;
  for (Eigen::Index b = 0; b < background.rows(); ++b) s += f(background.row(b).data());
  return s / static_cast<double>(background.rows());
}

Vector evaluate(const RowFunction& f, const Matrix& x) {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = f(x.row(i).data());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear closed forms

ExplanationMatrix shap_linear_interventional(const LinearModel& model, const Matrix& x,
                                             const Vector& means) {
  const Eigen::Index p = model.coefficients.size();
  if (x.cols() != p || means.size() != p) {
    throw UsageError("linear explainer: model has " + std::to_string(p) + " coefficients, data has " +
                     std::to_string(x.cols()) + " columns and means has " + std::to_string(means.size()));
  }
  ExplanationMatrix e;
  e.variant = ShapVariant::interventional;
  e.values = (x.rowwise() - means.transpose()).array().rowwise() * model.coefficients.transpose().array();
  e.base_value = model.intercept + model.coefficients.dot(means);
  e.outputs.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) e.outputs[i] = model.margin_row(x.row(i).data());
  return e;
}

ConditionalMeanTable ConditionalMeanTable::exact(const Vector& conditioning, const Vector& target) {
  if (conditioning.size() != target.size() || conditioning.size() == 0) {
    throw UsageError("conditional mean table needs equal-length nonempty columns");
  }
  std::map<double, std::pair<double, std::size_t>> acc;
  for (Eigen::Index i = 0; i < conditioning.size(); ++i) {
    auto& slot = acc[conditioning[i]];
    slot.first += target[i];
    slot.second += 1;
  }
  ConditionalMeanTable t;
  t.mode_ = Mode::exact;
  for (const auto& [v, s] : acc) t.levels_[v] = s.first / static_cast<double>(s.second);
  return t;
}

ConditionalMeanTable ConditionalMeanTable::binned(const Vector& conditioning, const Vector& target,
                                                  std::size_t bins) {
  if (conditioning.size() != target.size() || conditioning.size() == 0) {
    throw UsageError("conditional mean table needs equal-length nonempty columns");
  }
  bins = std::max<std::size_t>(1, std::min<std::size_t>(bins, static_cast<std::size_t>(conditioning.size())));
  std::vector<std::size_t> order(static_cast<std::size_t>(conditioning.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return conditioning[static_cast<Eigen::Index>(a)] < conditioning[static_cast<Eigen::Index>(b)];
  });
  ConditionalMeanTable t;
  t.mode_ = Mode::binned;
  const std::size_t n = order.size();
  std::size_t start = 0;
  for (std::size_t k = 0; k < bins && start < n; ++k) {
    std::size_t stop = (k + 1) * n / bins;
    if (stop <= start) continue;
    // Keep ties inside one bin.
    const double edge = conditioning[static_cast<Eigen::Index>(order[stop - 1])];
    while (stop < n && conditioning[static_cast<Eigen::Index>(order[stop])] == edge) ++stop;
    double sum = 0.0;
    for (std::size_t r = start; r < stop; ++r) sum += target[static_cast<Eigen::Index>(order[r])];
    t.upper_edges_.push_back(edge);
    t.bin_means_.push_back(sum / static_cast<double>(stop - start));
    start = stop;
  }
  return t;
}

ConditionalMeanTable ConditionalMeanTable::estimate(const Vector& conditioning, const Vector& target,
                                                    std::size_t max_levels, std::size_t bins) {
  std::vector<double> sorted(conditioning.data(), conditioning.data() + conditioning.size());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  return distinct <= max_levels ? exact(conditioning, target) : binned(conditioning, target, bins);
}

ConditionalMeanTable ConditionalMeanTable::constant(double value) {
  ConditionalMeanTable t;
  t.mode_ = Mode::constant;
  t.constant_ = value;
  return t;
}

double ConditionalMeanTable::lookup(double v) const {
  switch (mode_) {
    case Mode::constant:
      return constant_;
    case Mode::exact: {
      const auto it = levels_.find(v);
      if (it == levels_.end()) {
        throw DataError("conditioning value " + std::to_string(v) + " absent from conditional mean table");
      }
      return it->second;
    }
    case Mode::binned: {
      const auto it = std::lower_bound(upper_edges_.begin(), upper_edges_.end(), v);
      const std::size_t k = it == upper_edges_.end() ? upper_edges_.size() - 1
                                                     : static_cast<std::size_t>(it - upper_edges_.begin());
      return bin_means_[k];
    }
  }
  return 0.0;
}

ExplanationMatrix shap_linear_observational_bivariate(const LinearModel& model, const Matrix& x,
                                                      const ConditionalMeanTable& x1_given_x2,
                                                      const ConditionalMeanTable& x2_given_x1) {
  if (model.coefficients.size() != 2 || x.cols() != 2) {
    throw UsageError("observational linear explainer supports exactly two features");
  }
  const double b1 = model.coefficients[0];
  const double b2 = model.coefficients[1];
  ExplanationMatrix e;
  e.variant = ShapVariant::observational_linear;
  e.values.resize(x.rows(), 2);
  e.outputs.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double x1 = x(i, 0);
    const double x2 = x(i, 1);
    const double m1 = x1_given_x2.lookup(x2);  // E[X1 | X2 = x2]
    const double m2 = x2_given_x1.lookup(x1);  // E[X2 | X1 = x1]
    e.values(i, 0) = b2 / 2.0 * m2 + b1 * x1 - b1 / 2.0 * m1;
    e.values(i, 1) = b1 / 2.0 * m1 + b2 * x2 - b2 / 2.0 * m2;
    e.outputs[i] = model.margin_row(x.row(i).data());
  }
  e.base_value = model.intercept;
  return e;
}

// ---------------------------------------------------------------------------
// Exact enumeration

ExplanationMatrix shap_exact_enumeration(const RowFunction& f, const Matrix& x,
                                         const Matrix& background) {
  check_background(x, background);
  const auto p = static_cast<std::size_t>(x.cols());
  if (p > kMaxEnumerationFeatures) {
    throw UsageError("exact enumeration supports at most " + std::to_string(kMaxEnumerationFeatures) +
                     " features, got " + std::to_string(p) + "; use the Monte Carlo variant");
  }
  const std::size_t subsets = std::size_t{1} << p;

  // |T|! (p - |T| - 1)! / p!, computed in log space.
  std::vector<double> weight(p, 0.0);
  for (std::size_t s = 0; s < p; ++s) {
    weight[s] = std::exp(std::lgamma(static_cast<double>(s) + 1.0) +
                         std::lgamma(static_cast<double>(p - s)) -
                         std::lgamma(static_cast<double>(p) + 1.0));
  }

  ExplanationMatrix e;
  e.variant = ShapVariant::interventional;
  e.base_value = background_mean(f, background);
  e.values = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(p));
  e.outputs = evaluate(f, x);

  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    std::vector<double> val(subsets);
    std::vector<double> hybrid(p);
    val[0] = e.base_value;
    for (std::size_t mask = 1; mask < subsets; ++mask) {
      if (mask == subsets - 1) {
        val[mask] = e.outputs[i];
        continue;
      }
      double sum = 0.0;
      for (Eigen::Index b = 0; b < background.rows(); ++b) {
        for (std::size_t j = 0; j < p; ++j) {
          hybrid[j] = (mask >> j) & 1U ? x(i, static_cast<Eigen::Index>(j))
                                       : background(b, static_cast<Eigen::Index>(j));
        }
        sum += f(hybrid.data());
      }
      val[mask] = sum / static_cast<double>(background.rows());
    }
    for (std::size_t j = 0; j < p; ++j) {
      const std::size_t bit = std::size_t{1} << j;
      double phi = 0.0;
      for (std::size_t mask = 0; mask < subsets; ++mask) {
        if (mask & bit) continue;
        phi += weight[static_cast<std::size_t>(std::popcount(mask))] * (val[mask | bit] - val[mask]);
      }
      e.values(i, static_cast<Eigen::Index>(j)) = phi;
    }
  });
  return e;
}

ExplanationMatrix shap_exact_enumeration(const Model& model, const Matrix& x,
                                         const Matrix& background, bool probability) {
  if (static_cast<std::size_t>(x.cols()) != feature_count(model)) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, got " +
                     std::to_string(x.cols()));
  }
  return shap_exact_enumeration(explained_function(model, probability), x, background);
}

// ---------------------------------------------------------------------------
// Tree algorithm

namespace {

// Shapley value of the game v * 1[I subset of T, O disjoint from T] with
// |I| = a, |O| = c: members of I get v (a-1)! c! / (a+c)!, members of O get
// -v a! (c-1)! / (a+c)!.
class GuardWeights {
 public:
  explicit GuardWeights(int max_size) : n_(max_size + 1), in_(n_ * n_, 0.0), out_(n_ * n_, 0.0) {
    for (int a = 0; a < n_; ++a) {
      for (int c = 0; a + c < n_; ++c) {
        const double denom = std::lgamma(a + c + 1.0);
        if (a > 0) in_[a * n_ + c] = std::exp(std::lgamma(a) + std::lgamma(c + 1.0) - denom);
        if (c > 0) out_[a * n_ + c] = std::exp(std::lgamma(a + 1.0) + std::lgamma(c) - denom);
      }
    }
  }
  double in(int a, int c) const { return in_[a * n_ + c]; }
  double out(int a, int c) const { return out_[a * n_ + c]; }

 private:
  int n_;
  std::vector<double> in_;
  std::vector<double> out_;
};

struct TreeWalk {
  const DecisionTree& tree;
  const double* x;
  const double* b;
  double scale;
  const GuardWeights& weights;
  double* phi;

  void visit(int node, std::uint64_t in_mask, std::uint64_t out_mask, int a, int c) const {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.feature < 0) {
      if (a == 0 && c == 0) return;
      const double v = scale * n.value;
      const double w_in = v * weights.in(a, c);
      const double w_out = v * weights.out(a, c);
      for (std::uint64_t m = in_mask; m; m &= m - 1) phi[std::countr_zero(m)] += w_in;
      for (std::uint64_t m = out_mask; m; m &= m - 1) phi[std::countr_zero(m)] -= w_out;
      return;
    }
    const int f = n.feature;
    const int x_child = x[f] <= n.threshold ? n.left : n.right;
    const int b_child = b[f] <= n.threshold ? n.left : n.right;
    const std::uint64_t bit = std::uint64_t{1} << f;
    if (x_child == b_child) {
      visit(x_child, in_mask, out_mask, a, c);
    } else if (in_mask & bit) {
      visit(x_child, in_mask, out_mask, a, c);
    } else if (out_mask & bit) {
      visit(b_child, in_mask, out_mask, a, c);
    } else {
      visit(x_child, in_mask | bit, out_mask, a + 1, c);
      visit(b_child, in_mask, out_mask | bit, a, c + 1);
    }
  }
};

ExplanationMatrix tree_ensemble_shap(const std::vector<const DecisionTree*>& trees, double scale,
                                     double offset, const Matrix& x, const Matrix& background) {
  check_background(x, background);
  const auto p = static_cast<std::size_t>(x.cols());
  if (p > 64) throw UsageError("tree explainer supports at most 64 features");
  int depth = 1;
  for (const auto* t : trees) {
    if (t->n_features != p) {
      throw UsageError("tree expects " + std::to_string(t->n_features) + " features, got " +
                       std::to_string(p));
    }
    depth = std::max(depth, t->depth());
  }
  const GuardWeights weights(std::min<int>(depth, static_cast<int>(p)));

  auto raw = [&](const double* row) {
    double s = 0.0;
    for (const auto* t : trees) s += t->predict_row(row);
    return offset + scale * s;
  };

  ExplanationMatrix e;
  e.variant = ShapVariant::interventional;
  e.values = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(p));
  e.outputs.resize(x.rows());
  double base = 0.0;
  for (Eigen::Index b = 0; b < background.rows(); ++b) base += raw(background.row(b).data());
  e.base_value = base / static_cast<double>(background.rows());
  const double inv_m = 1.0 / static_cast<double>(background.rows());

  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    std::vector<double> phi(p, 0.0);
    for (Eigen::Index b = 0; b < background.rows(); ++b) {
      for (const auto* t : trees) {
        TreeWalk{*t, x.row(i).data(), background.row(b).data(), scale, weights, phi.data()}.visit(0, 0, 0, 0, 0);
      }
    }
    for (std::size_t j = 0; j < p; ++j) e.values(i, static_cast<Eigen::Index>(j)) = phi[j] * inv_m;
    e.outputs[i] = raw(x.row(i).data());
  });
  return e;
}

}  // namespace

ExplanationMatrix shap_tree_interventional(const DecisionTree& tree, const Matrix& x,
                                           const Matrix& background) {
  return tree_ensemble_shap({&tree}, 1.0, 0.0, x, background);
}

ExplanationMatrix shap_tree_interventional(const GradientBoostedTrees& model, const Matrix& x,
                                           const Matrix& background) {
  std::vector<const DecisionTree*> trees;
  trees.reserve(model.trees.size());
  for (const auto& t : model.trees) trees.push_back(&t);
  if (trees.empty()) {
    ExplanationMatrix e;
    e.values = Matrix::Zero(x.rows(), x.cols());
    e.base_value = model.base_score;
    e.outputs = Vector::Constant(x.rows(), model.base_score);
    return e;
  }
  return tree_ensemble_shap(trees, model.learning_rate, model.base_score, x, background);
}

// ---------------------------------------------------------------------------
// Monte Carlo

ExplanationMatrix shap_montecarlo(const RowFunction& f, const Matrix& x, const Matrix& background,
                                  std::size_t n_permutations, std::uint64_t seed) {
  check_background(x, background);
  if (n_permutations < 1) throw UsageError("n_permutations must be at least 1");
  const auto p = static_cast<std::size_t>(x.cols());
  const Eigen::Index m = background.rows();

  ExplanationMatrix e;
  e.variant = ShapVariant::montecarlo;
  e.base_value = background_mean(f, background);
  e.values = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(p));
  e.standard_errors = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(p));
  e.outputs = evaluate(f, x);
  const auto k = static_cast<double>(n_permutations);

  parallel_for(static_cast<std::size_t>(x.rows()), [&](std::size_t row) {
    const auto i = static_cast<Eigen::Index>(row);
    std::mt19937_64 rng(derive_seed(seed, row));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> sum(p, 0.0), sum_sq(p, 0.0);
    Matrix hybrid(m, static_cast<Eigen::Index>(p));
    for (std::size_t perm = 0; perm < n_permutations; ++perm) {
      for (std::size_t s = p; s > 1; --s) std::swap(order[s - 1], order[uniform_index(rng, s)]);
      hybrid = background;
      double previous = e.base_value;
      for (std::size_t step = 0; step < p; ++step) {
        const auto j = static_cast<Eigen::Index>(order[step]);
        hybrid.col(j).setConstant(x(i, j));
        double current;
        if (step + 1 == p) {
          current = e.outputs[i];
        } else {
          current = 0.0;
          for (Eigen::Index b = 0; b < m; ++b) current += f(hybrid.row(b).data());
          current /= static_cast<double>(m);
        }
        const double delta = current - previous;
        sum[order[step]] += delta;
        sum_sq[order[step]] += delta * delta;
        previous = current;
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      const double mean = sum[j] / k;
      const double var = n_permutations > 1 ? std::max(0.0, (sum_sq[j] - k * mean * mean) / (k - 1.0)) : 0.0;
      e.values(i, static_cast<Eigen::Index>(j)) = mean;
      e.standard_errors(i, static_cast<Eigen::Index>(j)) = std::sqrt(var / k);
    }
  });
  return e;
}

ExplanationMatrix shap_montecarlo(const Model& model, const Matrix& x, const Matrix& background,
                                  std::size_t n_permutations, std::uint64_t seed, bool probability) {
  if (static_cast<std::size_t>(x.cols()) != feature_count(model)) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, got " +
                     std::to_string(x.cols()));
  }
  return shap_montecarlo(explained_function(model, probability), x, background, n_permutations, seed);
}

// ---------------------------------------------------------------------------
// Dispatch

ExplanationMatrix explain(const Model& model, const Matrix& x, const Matrix& background,
                          const ExplainOptions& options) {
  if (static_cast<std::size_t>(x.cols()) != feature_count(model)) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, got " +
                     std::to_string(x.cols()));
  }
  switch (options.variant) {
    case ShapVariant::montecarlo:
      return shap_montecarlo(model, x, background, options.n_permutations, options.seed,
                             options.probability);
    case ShapVariant::observational_linear: {
      const auto* lm = std::get_if<LinearModel>(&model);
      if (!lm || x.cols() != 2) {
        throw UsageError("observational variant is only available for two-feature linear models");
      }
      const Vector c0 = background.col(0);
      const Vector c1 = background.col(1);
      return shap_linear_observational_bivariate(*lm, x, ConditionalMeanTable::estimate(c1, c0),
                                                 ConditionalMeanTable::estimate(c0, c1));
    }
    case ShapVariant::interventional:
      break;
  }
  if (options.probability && has_logistic_output(model)) {
    if (static_cast<std::size_t>(x.cols()) <= kMaxEnumerationFeatures) {
      return shap_exact_enumeration(model, x, background, true);
    }
    return shap_montecarlo(model, x, background, options.n_permutations, options.seed, true);
  }
  if (const auto* lm = std::get_if<LinearModel>(&model)) {
    check_background(x, background);
    return shap_linear_interventional(*lm, x, background.colwise().mean().transpose());
  }
  if (const auto* t = std::get_if<DecisionTree>(&model)) return shap_tree_interventional(*t, x, background);
  return shap_tree_interventional(std::get<GradientBoostedTrees>(model), x, background);
}

// ---------------------------------------------------------------------------
// Variant comparison

VariantComparison compare_explanations(const ExplanationMatrix& first_fit,
                                       const ExplanationMatrix& first_eval,
                                       const ExplanationMatrix& second_fit,
                                       const ExplanationMatrix& second_eval, const Vector& z_fit,
                                       const Vector& z_eval, const LearnerSpec& inspector) {
  if (first_fit.values.rows() != second_fit.values.rows() ||
      first_eval.values.rows() != second_eval.values.rows() ||
      first_fit.values.cols() != second_fit.values.cols()) {
    throw UsageError("compared explanation matrices must have matching shapes");
  }
  VariantComparison out;
  out.max_abs_cell_difference = std::max((first_fit.values - second_fit.values).cwiseAbs().maxCoeff(),
                                         (first_eval.values - second_eval.values).cwiseAbs().maxCoeff());
  const Model g1 = fit_model(inspector, first_fit.values, z_fit);
  const Model g2 = fit_model(inspector, second_fit.values, z_fit);
  out.auc_first = auc(predict(g1, first_eval.values), z_eval);
  out.auc_second = auc(predict(g2, second_eval.values), z_eval);
  out.auc_abs_difference = std::abs(out.auc_first - out.auc_second);
  out.auc_relative_difference = out.auc_abs_difference / out.auc_first;
  return out;
}

VariantComparison compare_variants(const LinearModel& model, const Matrix& x_fit,
                                   const Vector& z_fit, const Matrix& x_eval, const Vector& z_eval,
                                   const Matrix& background, const LearnerSpec& inspector) {
  const Vector means = background.colwise().mean().transpose();
  const Vector c0 = background.col(0);
  const Vector c1 = background.col(1);
  const auto x1_given_x2 = ConditionalMeanTable::estimate(c1, c0);
  const auto x2_given_x1 = ConditionalMeanTable::estimate(c0, c1);
  return compare_explanations(
      shap_linear_interventional(model, x_fit, means), shap_linear_interventional(model, x_eval, means),
      shap_linear_observational_bivariate(model, x_fit, x1_given_x2, x2_given_x1),
      shap_linear_observational_bivariate(model, x_eval, x1_given_x2, x2_given_x1), z_fit, z_eval,
      inspector);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).data(), m.row(i).data() + m.cols()));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != cols) throw DataError("ragged explanation matrix");
    for (Eigen::Index j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = r[static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace

nlohmann::json explanations_to_json(const ExplanationMatrix& e) {
  nlohmann::json doc{{"format_version", 1},
                     {"variant", to_string(e.variant)},
                     {"base_value", e.base_value},
                     {"feature_names", e.feature_names},
                     {"values", matrix_to_json(e.values)},
                     {"outputs", std::vector<double>(e.outputs.data(), e.outputs.data() + e.outputs.size())}};
  if (e.standard_errors.size() > 0) doc["standard_errors"] = matrix_to_json(e.standard_errors);
  return doc;
}

ExplanationMatrix explanations_from_json(const nlohmann::json& doc) {
  ExplanationMatrix e;
  e.variant = parse_shap_variant(doc.at("variant").get<std::string>());
  e.base_value = doc.at("base_value").get<double>();
  e.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  const auto& rows = doc.at("values");
  const auto cols = static_cast<Eigen::Index>(
      !e.feature_names.empty() ? e.feature_names.size() : rows.empty() ? 0 : rows[0].size());
  e.values = matrix_from_json(doc.at("values"), cols);
  const auto outputs = doc.at("outputs").get<std::vector<double>>();
  e.outputs = Eigen::Map<const Vector>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
  if (doc.contains("standard_errors")) e.standard_errors = matrix_from_json(doc.at("standard_errors"), cols);
  return e;
}

void save_explanations_csv(const ExplanationMatrix& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write explanations to '" + path + "'");
  out.precision(17);
  for (Eigen::Index j = 0; j < e.values.cols(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    out << (idx < e.feature_names.size() ? e.feature_names[idx] : "f" + std::to_string(j)) << ',';
  }
  out << "base_value\n";
  for (Eigen::Index i = 0; i < e.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < e.values.cols(); ++j) out << e.values(i, j) << ',';
    out << e.base_value << '\n';
  }
}

}  // namespace etaudit
