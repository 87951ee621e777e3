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

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "etaudit/common.hpp"

namespace etaudit {

enum class Link { identity, logistic };
enum class Loss { squared, logistic };
enum class TreeTask { regression, classification };

// score(x) = link(intercept + coefficients . x)
struct LinearModel {
  double intercept = 0.0;
  Vector coefficients;
  Link link = Link::identity;
  // Per-feature standard deviation of the training inputs; coefficient times
  // scale is the coefficient on standardized inputs. Empty means unit scale.
  Vector feature_scale;
  double l2 = 0.0;

  double margin_row(const double* x) const;
  Vector standardized_coefficients() const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Binary decision tree. Rows with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  int max_depth = 1;
  std::size_t n_features = 0;
  TreeTask task = TreeTask::regression;

  double predict_row(const double* x) const;
  // Longest root-to-leaf path, counted in edges.
  int depth() const;
  std::size_t leaf_count() const;
};

// raw(x) = base_score + learning_rate * sum_t tree_t(x)
struct GradientBoostedTrees {
  std::vector<DecisionTree> trees;
  double learning_rate = 0.1;
  double base_score = 0.0;
  Loss loss = Loss::logistic;
  std::size_t n_features = 0;
  int max_depth = 3;
  double l2_leaf = 1.0;
  // Mean training loss after the base score (entry 0) and after each stage.
  std::vector<double> train_loss;

  double raw_row(const double* x) const;
};

using Model = std::variant<LinearModel, DecisionTree, GradientBoostedTrees>;

// Output on the prediction scale: probabilities for logistic links/losses and
// classification trees, raw values otherwise.
Vector predict(const Model& model, const Matrix& x);
// Output on the scale that explanations decompose: the linear score for
// logistic-linked linear models, the margin for logistic GBT, the model
// output otherwise.
Vector margin(const Model& model, const Matrix& x);
double margin_row(const Model& model, const double* x);
// True when predict() squashes the margin through the logistic function.
bool has_logistic_output(const Model& model);
std::size_t feature_count(const Model& model);
std::string model_kind(const Model& model);

LinearModel fit_linear(const Matrix& x, const Vector& y, Link link, double l2,
                       int max_iter = 500, double tol = 1e-8);
DecisionTree fit_tree(const Matrix& x, const Vector& y, int max_depth, std::size_t min_leaf,
                      TreeTask task = TreeTask::regression);

struct GbtOptions {
  std::size_t n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  Loss loss = Loss::logistic;
  std::size_t min_leaf = 1;
  double l2_leaf = 1.0;
  // Minimum hessian sum per child.
  double min_child_weight = 1.0;
};
GradientBoostedTrees fit_gbt(const Matrix& x, const Vector& y, const GbtOptions& options);

// A learner and its hyperparameters; used for both audited models and
// inspectors.
struct LearnerSpec {
  enum class Kind { linear, tree, gbt };
  Kind kind = Kind::gbt;
  Link link = Link::logistic;
  double l2 = 1e-6;
  int max_depth = 3;
  std::size_t min_leaf = 1;
  std::size_t n_trees = 100;
  double learning_rate = 0.1;

  // "logistic", "linear"/"ols", "tree", "gbt".
  static LearnerSpec parse(std::string_view name);
  static LearnerSpec logistic();
  static LearnerSpec ols();
  static LearnerSpec tree(int depth);
  static LearnerSpec gbt(std::size_t n_trees = 100, int depth = 3);

  bool linear() const { return kind == Kind::linear; }
  std::string name() const;
  nlohmann::json to_json() const;
};

// Fits the learner; classification learners require 0/1 targets.
Model fit_model(const LearnerSpec& spec, const Matrix& x, const Vector& y);

inline constexpr int kModelFormatVersion = 1;
nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& doc);

}  // namespace etaudit
