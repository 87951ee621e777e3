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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "etaudit/common.hpp"
#include "etaudit/models.hpp"

namespace etaudit {

enum class ShapVariant { interventional, observational_linear, montecarlo };

std::string to_string(ShapVariant v);
ShapVariant parse_shap_variant(std::string_view name);

// Per-instance, per-feature Shapley attributions.
//
// Rows sum to output - base_value: exactly (up to rounding) for the
// interventional and observational variants, and within the reported
// standard errors for Monte Carlo.
struct ExplanationMatrix {
  Matrix values;
  double base_value = 0.0;
  std::vector<std::string> feature_names;
  ShapVariant variant = ShapVariant::interventional;
  // Explained model output per row.
  Vector outputs;
  // Per-cell standard errors (Monte Carlo only; empty otherwise).
  Matrix standard_errors;

  // |sum_j values(i, j) - (outputs(i) - base_value)| per row.
  Vector efficiency_gap() const;
};

// A scalar function of one feature row; the game being explained.
using RowFunction = std::function<double(const double*)>;

// Explained scale of a model: its margin, or the probability when
// `probability` is set.
RowFunction explained_function(const Model& model, bool probability = false);

// Uniform subsample (without replacement) of at most `cap` rows.
Matrix sample_background(const Matrix& pool, std::size_t cap, std::uint64_t seed);

// beta_j * (x_ij - mu_j); base = intercept + beta . mu. Logistic-linked models
// are explained on the linear score.
ExplanationMatrix shap_linear_interventional(const LinearModel& model, const Matrix& x,
                                             const Vector& means);

// Empirical E[target | conditioning = v]. Exact tables group identical
// conditioning values and reject unseen ones; binned tables use quantile bins
// and clamp to the outer bins.
class ConditionalMeanTable {
 public:
  static ConditionalMeanTable exact(const Vector& conditioning, const Vector& target);
  static ConditionalMeanTable binned(const Vector& conditioning, const Vector& target,
                                     std::size_t bins);
  // Exact when the conditioning column has at most `max_levels` distinct
  // values, binned otherwise.
  static ConditionalMeanTable estimate(const Vector& conditioning, const Vector& target,
                                       std::size_t max_levels = 64, std::size_t bins = 10);
  // Table returning the given constant everywhere (e.g. independent features).
  static ConditionalMeanTable constant(double value);

  double lookup(double v) const;
  bool is_exact() const { return mode_ == Mode::exact; }

 private:
  enum class Mode { exact, binned, constant };
  Mode mode_ = Mode::constant;
  std::map<double, double> levels_;
  std::vector<double> upper_edges_;
  std::vector<double> bin_means_;
  double constant_ = 0.0;
};

// Observational Shapley values of a two-feature linear model from
// conditional-mean tables:
//   phi_1 = b2/2 E[X2|x1] + b1 x1 - b1/2 E[X1|x2]
//   phi_2 = b1/2 E[X1|x2] + b2 x2 - b2/2 E[X2|x1]
// The cross terms cancel in the row sum, so rows sum to f(x) - intercept and
// base_value is the intercept.
ExplanationMatrix shap_linear_observational_bivariate(const LinearModel& model, const Matrix& x,
                                                      const ConditionalMeanTable& x1_given_x2,
                                                      const ConditionalMeanTable& x2_given_x1);

inline constexpr std::size_t kMaxEnumerationFeatures = 20;

// Interventional Shapley values by enumerating all 2^p coalitions; val(T) is
// the background mean of f with the features in T fixed to the instance.
ExplanationMatrix shap_exact_enumeration(const RowFunction& f, const Matrix& x,
                                         const Matrix& background);
ExplanationMatrix shap_exact_enumeration(const Model& model, const Matrix& x,
                                         const Matrix& background, bool probability = false);

// Exact interventional Shapley values for tree models. Each (instance,
// background row) pair reduces every tree to leaves guarded by "features that
// must come from the instance" and "features that must come from the
// background"; such a leaf's game has a closed-form Shapley value. Agrees with
// shap_exact_enumeration; cost is linear in p instead of exponential.
ExplanationMatrix shap_tree_interventional(const DecisionTree& tree, const Matrix& x,
                                           const Matrix& background);
ExplanationMatrix shap_tree_interventional(const GradientBoostedTrees& model, const Matrix& x,
                                           const Matrix& background);

// Permutation-sampling estimate of the interventional values. Each sampled
// permutation adds features one at a time and averages over the whole
// background, so every permutation's contributions telescope to
// f(x) - base exactly. Row i uses a stream derived from (seed, i).
ExplanationMatrix shap_montecarlo(const RowFunction& f, const Matrix& x, const Matrix& background,
                                  std::size_t n_permutations, std::uint64_t seed);
ExplanationMatrix shap_montecarlo(const Model& model, const Matrix& x, const Matrix& background,
                                  std::size_t n_permutations, std::uint64_t seed,
                                  bool probability = false);

// Interventional explanations for any model, choosing the fastest exact route
// (closed form for linear, tree algorithm for trees). Monte Carlo when
// requested.
struct ExplainOptions {
  ShapVariant variant = ShapVariant::interventional;
  bool probability = false;
  std::size_t n_permutations = 200;
  std::uint64_t seed = 0;
};
ExplanationMatrix explain(const Model& model, const Matrix& x, const Matrix& background,
                          const ExplainOptions& options);

struct VariantComparison {
  double max_abs_cell_difference = 0.0;
  double auc_first = 0.5;
  double auc_second = 0.5;
  // |auc_first - auc_second| / auc_first
  double auc_relative_difference = 0.0;
  double auc_abs_difference = 0.0;
};

// Compares two explanation pipelines cell by cell and through the AUC of an
// inspector fit on the *_fit rows and scored on the *_eval rows.
VariantComparison compare_explanations(const ExplanationMatrix& first_fit,
                                       const ExplanationMatrix& first_eval,
                                       const ExplanationMatrix& second_fit,
                                       const ExplanationMatrix& second_eval, const Vector& z_fit,
                                       const Vector& z_eval, const LearnerSpec& inspector);

// Interventional closed form vs observational bivariate (conditional means
// estimated on the background) for a two-feature linear model.
VariantComparison compare_variants(const LinearModel& model, const Matrix& x_fit,
                                   const Vector& z_fit, const Matrix& x_eval, const Vector& z_eval,
                                   const Matrix& background,
                                   const LearnerSpec& inspector = LearnerSpec::logistic());

nlohmann::json explanations_to_json(const ExplanationMatrix& e);
ExplanationMatrix explanations_from_json(const nlohmann::json& doc);
void save_explanations_csv(const ExplanationMatrix& e, const std::string& path);

}  // namespace etaudit
