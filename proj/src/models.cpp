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

#include "etaudit/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etaudit {

namespace {

void require_binary(const Vector& y, const char* who) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw DataError(std::string(who) + " requires a 0/1 target, found " + std::to_string(y[i]) +
                      " at row " + std::to_string(i));
    }
  }
}

void require_finite(const Matrix& x, const Vector& y) {
  if (!x.allFinite() || !y.allFinite()) throw DataError("training data contains NaN or infinite values");
  if (x.rows() != y.size()) {
    throw UsageError("feature matrix has " + std::to_string(x.rows()) + " rows but target has " +
                     std::to_string(y.size()));
  }
  if (x.rows() == 0) throw DataError("cannot fit a model on zero rows");
}

}  // namespace

// ---------------------------------------------------------------------------
// Linear models

double LinearModel::margin_row(const double* x) const {
  double s = intercept;
  for (Eigen::Index j = 0; j < coefficients.size(); ++j) s += coefficients[j] * x[j];
  return s;
}

Vector LinearModel::standardized_coefficients() const {
  if (feature_scale.size() != coefficients.size()) return coefficients;
  return coefficients.cwiseProduct(feature_scale);
}

namespace {

LinearModel fit_least_squares(const Matrix& x, const Vector& y, double l2) {
  const Eigen::Index p = x.cols();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean;
  const Vector yc = y.array() - y_mean;

  Vector beta(p);
  if (p > 0) {
    if (l2 > 0.0) {
      Eigen::MatrixXd gram = xc.transpose() * xc;
      gram.diagonal().array() += l2;
      Eigen::LLT<Eigen::MatrixXd> llt(gram);
      if (llt.info() != Eigen::Success) throw DataError("ridge normal equations are not positive definite");
      beta = llt.solve(xc.transpose() * yc);
    } else {
      if (x.rows() < p + 1) {
        throw DataError("least squares needs at least p+1 rows without ridge penalty");
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
      qr.setThreshold(1e-12);
      if (qr.rank() < p) throw DataError("singular normal equations; set l2 > 0");
      beta = qr.solve(yc);
    }
  }

  LinearModel m;
  m.coefficients = beta;
  m.intercept = y_mean - mean.dot(beta);
  m.link = Link::identity;
  m.l2 = l2;
  m.feature_scale = ((xc.array().square().colwise().sum()) / std::max<double>(1.0, static_cast<double>(x.rows())))
                        .sqrt()
                        .transpose();
  return m;
}

// Penalized logistic regression by Newton-Raphson on standardized inputs.
// The intercept is unpenalized.
LinearModel fit_logistic(const Matrix& x, const Vector& y, double l2, int max_iter, double tol) {
  require_binary(y, "logistic regression");
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale =
      ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = (x.rowwise() - mean).array().rowwise() / scale.array();

  auto objective = [&](const Vector& w) {
    const Vector eta = design * w;
    double nll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      // log(1 + e^eta) - y*eta, evaluated stably
      const double e = eta[i];
      nll += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
    }
    return nll + 0.5 * l2 * w.tail(p).squaredNorm();
  };

  Vector w = Vector::Zero(p + 1);
  const double prior = std::clamp(y.mean(), 1e-12, 1.0 - 1e-12);
  w[0] = std::log(prior / (1.0 - prior));
  double current = objective(w);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Vector eta = design * w;
    Vector prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob[i] = sigmoid(eta[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    Vector grad = design.transpose() * (prob - y);
    grad.tail(p) += l2 * w.tail(p);
    if (grad.lpNorm<Eigen::Infinity>() < tol) break;

    Eigen::MatrixXd hess = design.transpose() * weight.asDiagonal() * design;
    hess.diagonal().tail(p).array() += l2;
    hess.diagonal().array() += 1e-12;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Vector step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = grad;

    // Backtracking keeps the penalized likelihood monotone on separable data.
    double t = 1.0;
    Vector candidate = w - step;
    double value = objective(candidate);
    while (!(value <= current) && t > 1e-10) {
      t *= 0.5;
      candidate = w - t * step;
      value = objective(candidate);
    }
    if (!(value <= current)) break;
    const bool stalled = current - value <= 1e-15 * std::max(1.0, std::abs(current)) && t < 1.0;
    w = candidate;
    current = value;
    if (stalled) break;
  }

  LinearModel m;
  m.link = Link::logistic;
  m.l2 = l2;
  m.coefficients = w.tail(p).array() / scale.transpose().array();
  m.intercept = w[0] - mean.dot(m.coefficients);
  m.feature_scale = scale.transpose();
  return m;
}

}  // namespace

LinearModel fit_linear(const Matrix& x, const Vector& y, Link link, double l2, int max_iter,
                       double tol) {
  require_finite(x, y);
  if (l2 < 0.0) throw UsageError("l2 penalty must be non-negative");
  return link == Link::identity ? fit_least_squares(x, y, l2) : fit_logistic(x, y, l2, max_iter, tol);
}

// ---------------------------------------------------------------------------
// Trees

double DecisionTree::predict_row(const double* x) const {
  int k = 0;
  while (nodes[k].feature >= 0) {
    const TreeNode& n = nodes[k];
    k = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[k].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [k, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[k].feature >= 0) {
      stack.emplace_back(nodes[k].left, d + 1);
      stack.emplace_back(nodes[k].right, d + 1);
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

// Greedy second-order tree growth. With grad = -y, hess = 1 and lambda = 0 the
// gain is the squared-error (variance) reduction; for 0/1 targets that is
// exactly half the Gini impurity decrease, so the same search serves CART
// regression and classification.
class TreeGrower {
 public:
  TreeGrower(const Matrix& x, const Vector& grad, const Vector& hess, double lambda,
             int max_depth, std::size_t min_leaf, bool allow_zero_gain, double min_child_weight = 0.0)
      : x_(x), grad_(grad), hess_(hess), lambda_(lambda), max_depth_(max_depth),
        min_leaf_(std::max<std::size_t>(1, min_leaf)), allow_zero_gain_(allow_zero_gain),
        min_child_weight_(min_child_weight) {}

  DecisionTree grow() {
    std::vector<std::size_t> rows(static_cast<std::size_t>(x_.rows()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    tree_.max_depth = max_depth_;
    tree_.n_features = static_cast<std::size_t>(x_.cols());
    build(rows, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double score(double g, double h) const { return g * g / (h + lambda_); }

  bool pure(const std::vector<std::size_t>& rows) const {
    const double first = grad_[static_cast<Eigen::Index>(rows.front())];
    return std::all_of(rows.begin(), rows.end(),
                       [&](std::size_t r) { return grad_[static_cast<Eigen::Index>(r)] == first; });
  }

  Split best_split(const std::vector<std::size_t>& rows, double g_total, double h_total) const {
    Split best;
    best.gain = -std::numeric_limits<double>::infinity();
    const double parent = score(g_total, h_total);
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(static_cast<Eigen::Index>(a), f);
        const double vb = x_(static_cast<Eigen::Index>(b), f);
        return va < vb || (va == vb && a < b);
      });
      double g_left = 0.0;
      double h_left = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(order[k]);
        g_left += grad_[r];
        h_left += hess_[r];
        const double v = x_(r, f);
        const double next = x_(static_cast<Eigen::Index>(order[k + 1]), f);
        if (!(next > v)) continue;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = order.size() - n_left;
        if (n_left < min_leaf_ || n_right < min_leaf_) continue;
        if (h_left < min_child_weight_ || h_total - h_left < min_child_weight_) continue;
        const double gain =
            score(g_left, h_left) + score(g_total - g_left, h_total - h_left) - parent;
        // Strict improvement keeps the lowest feature, then lowest threshold.
        if (gain > best.gain + 1e-12 * std::max(1.0, std::abs(best.gain)) ||
            best.feature < 0) {
          best.feature = static_cast<int>(f);
          best.threshold = v + 0.5 * (next - v);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  int build(const std::vector<std::size_t>& rows, int depth) {
    double g = 0.0;
    double h = 0.0;
    for (auto r : rows) {
      g += grad_[static_cast<Eigen::Index>(r)];
      h += hess_[static_cast<Eigen::Index>(r)];
    }
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(TreeNode{});
    tree_.nodes[index].value = -g / (h + lambda_);

    if (depth >= max_depth_ || rows.size() < 2 * min_leaf_ || pure(rows)) return index;
    const Split split = best_split(rows, g, h);
    if (split.feature < 0) return index;
    const double floor = allow_zero_gain_ ? -1e-9 * std::max(1.0, score(g, h)) : 1e-12;
    if (!(split.gain > floor)) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows) {
      (x_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    }
    tree_.nodes[index].feature = split.feature;
    tree_.nodes[index].threshold = split.threshold;
    const int l = build(left, depth + 1);
    const int rgt = build(right, depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = rgt;
    return index;
  }

  const Matrix& x_;
  const Vector& grad_;
  const Vector& hess_;
  double lambda_;
  int max_depth_;
  std::size_t min_leaf_;
  bool allow_zero_gain_;
  double min_child_weight_;
  DecisionTree tree_;
};

}  // namespace

DecisionTree fit_tree(const Matrix& x, const Vector& y, int max_depth, std::size_t min_leaf,
                      TreeTask task) {
  require_finite(x, y);
  if (max_depth < 1) throw UsageError("max_depth must be at least 1");
  if (min_leaf < 1) throw UsageError("min_leaf must be at least 1");
  if (task == TreeTask::classification) require_binary(y, "classification tree");
  const Vector grad = -y;
  const Vector hess = Vector::Ones(y.size());
  DecisionTree tree = TreeGrower(x, grad, hess, 0.0, max_depth, min_leaf, true).grow();
  tree.task = task;
  return tree;
}

// ---------------------------------------------------------------------------
// Gradient boosting

double GradientBoostedTrees::raw_row(const double* x) const {
  double s = 0.0;
  for (const auto& t : trees) s += t.predict_row(x);
  return base_score + learning_rate * s;
}

namespace {

double mean_loss(Loss loss, const Vector& y, const Vector& raw) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (loss == Loss::squared) {
      const double d = y[i] - raw[i];
      total += 0.5 * d * d;
    } else {
      const double e = raw[i];
      total += (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e))) - y[i] * e;
    }
  }
  return total / static_cast<double>(y.size());
}

}  // namespace

GradientBoostedTrees fit_gbt(const Matrix& x, const Vector& y, const GbtOptions& options) {
  require_finite(x, y);
  if (options.n_trees < 1) throw UsageError("n_trees must be at least 1");
  if (options.max_depth < 1) throw UsageError("max_depth must be at least 1");
  if (!(options.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (options.loss == Loss::logistic) require_binary(y, "logistic boosting");

  GradientBoostedTrees model;
  model.learning_rate = options.learning_rate;
  model.loss = options.loss;
  model.n_features = static_cast<std::size_t>(x.cols());
  model.max_depth = options.max_depth;
  model.l2_leaf = options.l2_leaf;
  if (options.loss == Loss::squared) {
    model.base_score = y.mean();
  } else {
    const double prior = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    model.base_score = std::log(prior / (1.0 - prior));
  }

  const Eigen::Index n = x.rows();
  Vector raw = Vector::Constant(n, model.base_score);
  double loss = mean_loss(options.loss, y, raw);
  model.train_loss.push_back(loss);
  Vector grad(n), hess(n), step(n);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (options.loss == Loss::squared) {
        grad[i] = raw[i] - y[i];
        hess[i] = 1.0;
      } else {
        const double p = sigmoid(raw[i]);
        grad[i] = p - y[i];
        hess[i] = std::max(p * (1.0 - p), 1e-16);
      }
    }
    DecisionTree tree =
        TreeGrower(x, grad, hess, options.l2_leaf, options.max_depth, options.min_leaf, false,
                   options.min_child_weight)
            .grow();
    tree.task = TreeTask::regression;

    // Halve the stage until it does not increase the training loss.
    double next = loss;
    for (int attempt = 0; attempt < 40; ++attempt) {
      for (Eigen::Index i = 0; i < n; ++i) step[i] = tree.predict_row(x.row(i).data());
      const Vector candidate = raw + options.learning_rate * step;
      next = mean_loss(options.loss, y, candidate);
      if (next <= loss) {
        raw = candidate;
        break;
      }
      for (auto& node : tree.nodes) node.value *= 0.5;
      if (attempt == 39) {
        for (auto& node : tree.nodes) node.value = 0.0;
        next = loss;
      }
    }
    loss = next;
    model.train_loss.push_back(loss);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Uniform model interface

double margin_row(const Model& model, const double* x) {
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return m.margin_row(x);
        else if constexpr (std::is_same_v<T, DecisionTree>) return m.predict_row(x);
        else return m.raw_row(x);
      },
      model);
}

std::size_t feature_count(const Model& model) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return static_cast<std::size_t>(m.coefficients.size());
        else return m.n_features;
      },
      model);
}

std::string model_kind(const Model& model) {
  switch (model.index()) {
    case 0: return "linear";
    case 1: return "tree";
    default: return "gbt";
  }
}

Vector margin(const Model& model, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != feature_count(model)) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, got " +
                     std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = margin_row(model, x.row(i).data());
  return out;
}

bool has_logistic_output(const Model& model) {
  if (const auto* lm = std::get_if<LinearModel>(&model)) return lm->link == Link::logistic;
  if (const auto* gbt = std::get_if<GradientBoostedTrees>(&model)) return gbt->loss == Loss::logistic;
  return false;
}

Vector predict(const Model& model, const Matrix& x) {
  Vector out = margin(model, x);
  if (has_logistic_output(model)) out = out.unaryExpr([](double t) { return sigmoid(t); });
  return out;
}

// ---------------------------------------------------------------------------
// Learner specs

LearnerSpec LearnerSpec::logistic() {
  LearnerSpec s;
  s.kind = Kind::linear;
  s.link = Link::logistic;
  s.l2 = 1e-6;
  return s;
}

LearnerSpec LearnerSpec::ols() {
  LearnerSpec s;
  s.kind = Kind::linear;
  s.link = Link::identity;
  s.l2 = 0.0;
  return s;
}

LearnerSpec LearnerSpec::tree(int depth) {
  LearnerSpec s;
  s.kind = Kind::tree;
  s.max_depth = depth;
  return s;
}

LearnerSpec LearnerSpec::gbt(std::size_t n_trees, int depth) {
  LearnerSpec s;
  s.kind = Kind::gbt;
  s.n_trees = n_trees;
  s.max_depth = depth;
  return s;
}

LearnerSpec LearnerSpec::parse(std::string_view name) {
  if (name == "logistic") return logistic();
  if (name == "linear" || name == "ols") return ols();
  if (name == "tree") return tree(3);
  if (name == "gbt") return gbt();
  if (name == "tree-regression" || name == "gbt-squared") {
    LearnerSpec s = name == "gbt-squared" ? gbt() : tree(3);
    s.link = Link::identity;
    return s;
  }
  throw UsageError("unknown learner '" + std::string(name) +
                   "' (expected logistic, linear, tree, tree-regression, gbt, gbt-squared)");
}

std::string LearnerSpec::name() const {
  switch (kind) {
    case Kind::linear: return link == Link::logistic ? "logistic" : "linear";
    case Kind::tree: return link == Link::logistic ? "tree" : "tree-regression";
    case Kind::gbt: return link == Link::logistic ? "gbt" : "gbt-squared";
  }
  return "unknown";
}

nlohmann::json LearnerSpec::to_json() const {
  nlohmann::json j{{"learner", name()}};
  switch (kind) {
    case Kind::linear:
      j["l2"] = l2;
      j["link"] = link == Link::logistic ? "logistic" : "identity";
      break;
    case Kind::tree:
      j["max_depth"] = max_depth;
      j["min_leaf"] = min_leaf;
      break;
    case Kind::gbt:
      j["n_trees"] = n_trees;
      j["max_depth"] = max_depth;
      j["learning_rate"] = learning_rate;
      j["min_leaf"] = min_leaf;
      j["loss"] = link == Link::logistic ? "logistic" : "squared";
      break;
  }
  return j;
}

Model fit_model(const LearnerSpec& spec, const Matrix& x, const Vector& y) {
  switch (spec.kind) {
    case LearnerSpec::Kind::linear:
      return fit_linear(x, y, spec.link, spec.l2);
    case LearnerSpec::Kind::tree:
      return fit_tree(x, y, spec.max_depth, spec.min_leaf,
                      spec.link == Link::logistic ? TreeTask::classification : TreeTask::regression);
    case LearnerSpec::Kind::gbt: {
      GbtOptions o;
      o.n_trees = spec.n_trees;
      o.max_depth = spec.max_depth;
      o.learning_rate = spec.learning_rate;
      o.min_leaf = spec.min_leaf;
      o.loss = spec.link == Link::logistic ? Loss::logistic : Loss::squared;
      return fit_gbt(x, y, o);
    }
  }
  throw UsageError("unknown learner kind");
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json tree_to_json(const DecisionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
                     {"right", n.right}, {"value", n.value}});
  }
  return {{"max_depth", t.max_depth},
          {"n_features", t.n_features},
          {"task", t.task == TreeTask::classification ? "classification" : "regression"},
          {"nodes", nodes}};
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  DecisionTree t;
  t.max_depth = j.at("max_depth").get<int>();
  t.n_features = j.at("n_features").get<std::size_t>();
  t.task = j.at("task").get<std::string>() == "classification" ? TreeTask::classification
                                                                  : TreeTask::regression;
  for (const auto& n : j.at("nodes")) {
    t.nodes.push_back(TreeNode{n.at("feature").get<int>(), n.at("threshold").get<double>(),
                               n.at("left").get<int>(), n.at("right").get<int>(),
                               n.at("value").get<double>()});
  }
  const int count = static_cast<int>(t.nodes.size());
  if (count == 0) throw DataError("tree document has no nodes");
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw DataError("tree document has dangling child index");
    }
  }
  return t;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json doc{{"format_version", kModelFormatVersion}, {"type", model_kind(model)}};
  if (const auto* lm = std::get_if<LinearModel>(&model)) {
    doc["hyperparameters"] = {{"link", lm->link == Link::logistic ? "logistic" : "identity"},
                              {"l2", lm->l2}};
    doc["parameters"] = {{"intercept", lm->intercept},
                         {"coefficients", to_std(lm->coefficients)},
                         {"feature_scale", to_std(lm->feature_scale)}};
  } else if (const auto* t = std::get_if<DecisionTree>(&model)) {
    doc["hyperparameters"] = {{"max_depth", t->max_depth}};
    doc["parameters"] = tree_to_json(*t);
  } else {
    const auto& g = std::get<GradientBoostedTrees>(model);
    doc["hyperparameters"] = {{"n_trees", g.trees.size()},
                              {"max_depth", g.max_depth},
                              {"learning_rate", g.learning_rate},
                              {"l2_leaf", g.l2_leaf},
                              {"loss", g.loss == Loss::logistic ? "logistic" : "squared"}};
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : g.trees) trees.push_back(tree_to_json(t));
    doc["parameters"] = {{"base_score", g.base_score},
                         {"n_features", g.n_features},
                         {"train_loss", g.train_loss},
                         {"trees", trees}};
  }
  return doc;
}

Model model_from_json(const nlohmann::json& doc) {
  if (doc.value("format_version", 0) != kModelFormatVersion) {
    throw DataError("unsupported model format version");
  }
  const std::string type = doc.at("type").get<std::string>();
  const auto& hp = doc.at("hyperparameters");
  const auto& params = doc.at("parameters");
  if (type == "linear") {
    LinearModel m;
    m.link = hp.at("link").get<std::string>() == "logistic" ? Link::logistic : Link::identity;
    m.l2 = hp.at("l2").get<double>();
    m.intercept = params.at("intercept").get<double>();
    m.coefficients = from_std(params.at("coefficients").get<std::vector<double>>());
    m.feature_scale = from_std(params.at("feature_scale").get<std::vector<double>>());
    return m;
  }
  if (type == "tree") return tree_from_json(params);
  if (type == "gbt") {
    GradientBoostedTrees g;
    g.max_depth = hp.at("max_depth").get<int>();
    g.learning_rate = hp.at("learning_rate").get<double>();
    g.l2_leaf = hp.at("l2_leaf").get<double>();
    g.loss = hp.at("loss").get<std::string>() == "logistic" ? Loss::logistic : Loss::squared;
    g.base_score = params.at("base_score").get<double>();
    g.n_features = params.at("n_features").get<std::size_t>();
    g.train_loss = params.at("train_loss").get<std::vector<double>>();
    for (const auto& t : params.at("trees")) g.trees.push_back(tree_from_json(t));
    return g;
  }
  throw DataError("unknown model type '" + type + "'");
}

}  // namespace etaudit
