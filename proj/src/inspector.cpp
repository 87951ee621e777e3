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

#include "etaudit/inspector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "etaudit/parallel.hpp"
#include "etaudit/synthetic.hpp"

namespace etaudit {

namespace {

constexpr double kFlagKsPvalue = 0.05;
constexpr double kFlagAuc = 0.55;
constexpr double kFlagWasserstein = 0.05;

enum InspectorSlot { kEt = 0, kDp = 1, kInput = 2, kCombined = 3 };
constexpr const char* kSlotNames[] = {"et", "dp", "input", "combined"};

struct Prepared {
  TabularDataset filtered;
  Vector z;
  Vector y;
  bool has_target = false;
  Matrix x;
  std::vector<std::string> names;
  std::array<std::vector<std::size_t>, 3> parts;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

Prepared prepare(const TabularDataset& data, const GroupPair& pair, const AuditConfig& config) {
  config.validate();
  if (!data.protected_column()) throw UsageError("dataset has no protected column");
  Prepared p;
  p.filtered = filter_by_pair(data, pair);
  p.z = p.filtered.protected_codes(pair);
  p.n_b = static_cast<std::size_t>(p.z.sum());
  p.n_a = static_cast<std::size_t>(p.z.size()) - p.n_b;
  if (p.n_a < config.min_group_rows || p.n_b < config.min_group_rows) {
    throw DataError("group pair " + pair.str() + " needs at least " + std::to_string(config.min_group_rows) +
                    " rows per group, found " + std::to_string(p.n_a) + " ('" + pair.group_a + "') and " +
                    std::to_string(p.n_b) + " ('" + pair.group_b + "')");
  }
  p.names = p.filtered.feature_names();
  if (p.names.empty()) throw DataError("dataset has no feature columns");
  p.x = p.filtered.features(p.names);
  if (config.include_protected) {
    Matrix widened(p.x.rows(), p.x.cols() + 1);
    widened << p.x, p.z;
    p.x = std::move(widened);
    p.names.push_back(*p.filtered.protected_column());
  }
  if (p.filtered.target()) {
    p.y = p.filtered.target_values();
    p.has_target = true;
  }
  p.parts = split_indices(static_cast<std::size_t>(p.x.rows()), config.split);
  return p;
}

void require_both_groups(const Vector& z, const char* part) {
  const double ones = z.sum();
  if (ones < 2.0 || ones > static_cast<double>(z.size()) - 2.0) {
    throw DataError(std::string("the ") + part + " part holds fewer than two rows of one group; use more data");
  }
}

Model fit_audited_model(const Prepared& p, const AuditConfig& config) {
  if (!p.has_target) throw UsageError("dataset has no target column; pass --target or a fitted model");
  const auto& tr = p.parts[0];
  return fit_model(config.model_spec, take_rows(p.x, tr), take(p.y, tr));
}

// Inspector inputs for the val and test rows, stacked val first.
struct Pool {
  std::array<Matrix, 4> features;
  Vector z;
  std::size_t n_fit = 0;
  ExplanationMatrix explanations;
  Vector predictions;  // prediction scale, test rows only
  Vector z_test;
};

Pool build_pool(const Prepared& p, const Model& model, const AuditConfig& config) {
  const auto& val = p.parts[1];
  const auto& te = p.parts[2];
  std::vector<std::size_t> rows(val);
  rows.insert(rows.end(), te.begin(), te.end());

  const Matrix x_val = take_rows(p.x, val);
  const Matrix background = sample_background(x_val, config.background_cap, derive_seed(config.split.seed, 1001));
  const Matrix x_pool = take_rows(p.x, rows);

  Pool pool;
  pool.n_fit = val.size();
  pool.z = take(p.z, rows);
  pool.explanations = explain(model, x_pool, background, config.shap);
  pool.explanations.feature_names = p.names;
  const Vector& out = pool.explanations.outputs;

  pool.features[kEt] = pool.explanations.values;
  pool.features[kDp] = Matrix(out.size(), 1);
  pool.features[kDp].col(0) = out;
  pool.features[kInput] = x_pool;
  pool.features[kCombined] = Matrix(x_pool.rows(), x_pool.cols() + 1);
  pool.features[kCombined] << out, x_pool;

  const Matrix x_te = take_rows(p.x, te);
  pool.predictions = predict(model, x_te);
  pool.z_test = take(p.z, te);
  return pool;
}

struct FitScore {
  Model inspector;
  Vector scores;
};

FitScore fit_and_score(const LearnerSpec& spec, const Matrix& f, const Vector& z,
                       const std::vector<std::size_t>& fit_rows, const std::vector<std::size_t>& eval_rows,
                       const char* slot) {
  try {
    FitScore out{fit_model(spec, take_rows(f, fit_rows), take(z, fit_rows)), Vector()};
    out.scores = predict(out.inspector, take_rows(f, eval_rows));
    return out;
  } catch (const UsageError& e) {
    throw UsageError(std::string(slot) + " inspector: " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(slot) + " inspector: " + e.what());
  }
}

std::vector<std::size_t> iota_range(std::size_t from, std::size_t to) {
  std::vector<std::size_t> v(to - from);
  for (std::size_t i = from; i < to; ++i) v[i - from] = i;
  return v;
}

bool has_both(const Vector& z, const std::vector<std::size_t>& rows) {
  double ones = 0.0;
  for (auto r : rows) ones += z[static_cast<Eigen::Index>(r)];
  return ones >= 1.0 && ones <= static_cast<double>(rows.size()) - 1.0;
}

// Coefficient vectors of the ET inspector refit on reshuffled val/test
// splits of the pool, with z optionally permuted first.
std::vector<Vector> coefficient_runs(const Pool& pool, const AuditConfig& config, std::size_t runs,
                                     std::uint64_t seed, bool permute) {
  std::vector<Vector> coefs(runs);
  const std::size_t n = static_cast<std::size_t>(pool.z.size());
  parallel_for(runs, [&](std::size_t r) {
    Vector z = pool.z;
    if (permute) {
      const auto perm = shuffled_range(n, derive_seed(seed, 2 * r + 1));
      for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = pool.z[static_cast<Eigen::Index>(perm[i])];
    }
    const auto order = shuffled_range(n, derive_seed(seed, 2 * r));
    const std::vector<std::size_t> fit(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool.n_fit));
    if (!has_both(z, fit)) return;
    const Model g = fit_model(config.inspector_spec, take_rows(pool.features[kEt], fit), take(z, fit));
    coefs[r] = std::get<LinearModel>(g).standardized_coefficients();
  });
  std::erase_if(coefs, [](const Vector& v) { return v.size() == 0; });
  return coefs;
}

std::vector<double> column_of(const std::vector<Vector>& runs, Eigen::Index j) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& v : runs) out.push_back(v[j]);
  return out;
}

std::vector<DriverAttribution> compute_drivers(const Pool& pool, const Model& et_inspector,
                                               const std::vector<std::string>& names,
                                               const AuditConfig& config, std::size_t n_baseline_runs) {
  if (!config.inspector_spec.linear()) {
    throw UsageError("driver attribution needs a linear inspector (--inspector logistic); inspector '" +
                     config.inspector_spec.name() + "' has no coefficients");
  }
  if (n_baseline_runs < 1) throw UsageError("driver attribution needs at least one baseline run");
  const std::uint64_t seed = derive_seed(config.split.seed, 3001);
  const auto truth = coefficient_runs(pool, config, config.bootstrap_runs, seed, false);
  const auto random = coefficient_runs(pool, config, n_baseline_runs, derive_seed(seed, 1), true);
  const auto reference = coefficient_runs(pool, config, n_baseline_runs, derive_seed(seed, 2), true);
  const Vector coef = std::get<LinearModel>(et_inspector).standardized_coefficients();

  std::vector<DriverAttribution> out;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    DriverAttribution d;
    d.feature = names[static_cast<std::size_t>(j)];
    d.coefficient = coef[j];
    const auto t = column_of(truth, j);
    const auto a = column_of(random, j);
    const auto b = column_of(reference, j);
    if (!t.empty()) {
      double m = 0.0, s = 0.0;
      for (double v : t) m += v;
      m /= static_cast<double>(t.size());
      for (double v : t) s += (v - m) * (v - m);
      d.bootstrap_mean = m;
      d.bootstrap_sd = t.size() > 1 ? std::sqrt(s / static_cast<double>(t.size() - 1)) : 0.0;
    }
    if (!t.empty() && !a.empty()) d.wasserstein_vs_random = wasserstein_1d(t, a);
    if (!a.empty() && !b.empty()) d.wasserstein_null = wasserstein_1d(a, b);
    out.push_back(std::move(d));
  }
  return out;
}

AuditReport run_audit(const Prepared& p, const Model& model, const GroupPair& pair, const AuditConfig& config) {
  require_both_groups(take(p.z, p.parts[1]), "validation");
  require_both_groups(take(p.z, p.parts[2]), "test");

  AuditReport report;
  report.pair = pair;
  report.model_kind = model_kind(model);
  report.feature_names = p.names;
  report.n_rows = static_cast<std::size_t>(p.x.rows());
  report.n_group_a = p.n_a;
  report.n_group_b = p.n_b;
  for (int k = 0; k < 3; ++k) report.split_sizes[k] = p.parts[k].size();
  report.seed = config.split.seed;
  report.config = config.to_json();

  const Pool pool = build_pool(p, model, config);
  report.base_value = pool.explanations.base_value;

  const auto n = static_cast<std::size_t>(pool.z.size());
  const auto fit_rows = iota_range(0, pool.n_fit);
  const auto test_rows = iota_range(pool.n_fit, n);
  const Vector z_test = take(pool.z, test_rows);

  std::array<AucTestResult*, 4> slots{&report.et, &report.dp, &report.input, &report.combined};
  Model et_inspector;
  for (int s = 0; s < 4; ++s) {
    FitScore fs = fit_and_score(config.inspector_spec, pool.features[s], pool.z, fit_rows, test_rows, kSlotNames[s]);
    *slots[s] = brunner_munzel_auc_test(fs.scores, z_test, Alternative::greater, config.confidence);
    if (s == kEt) et_inspector = std::move(fs.inspector);
  }

  report.dp_distances = distance_report(pool.predictions, pool.z_test, report.dp.auc);

  const ExplanationMatrix& e = pool.explanations;
  double gap = 0.0;
  for (auto r : test_rows) {
    const auto i = static_cast<Eigen::Index>(r);
    gap = std::max(gap, std::abs(pool.features[kDp](i, 0) - (e.values.row(i).sum() + e.base_value)));
  }
  report.efficiency_bridge_gap = gap;

  const std::size_t runs = config.bootstrap_runs;
  std::vector<std::array<double, 4>> boot(runs);
  const std::uint64_t boot_seed = derive_seed(config.split.seed, 2001);
  parallel_for(runs, [&](std::size_t r) {
    boot[r].fill(std::numeric_limits<double>::quiet_NaN());
    const auto order = shuffled_range(n, derive_seed(boot_seed, r));
    const std::vector<std::size_t> fit(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool.n_fit));
    const std::vector<std::size_t> eval(order.begin() + static_cast<std::ptrdiff_t>(pool.n_fit), order.end());
    if (!has_both(pool.z, fit) || !has_both(pool.z, eval)) return;
    const Vector z_eval = take(pool.z, eval);
    for (int s = 0; s < 4; ++s) {
      const FitScore fs = fit_and_score(config.inspector_spec, pool.features[s], pool.z, fit, eval, kSlotNames[s]);
      boot[r][s] = auc(fs.scores, z_eval);
    }
  });
  for (const auto& b : boot) {
    if (std::isnan(b[0])) continue;
    report.bootstrap.et.push_back(b[kEt]);
    report.bootstrap.dp.push_back(b[kDp]);
    report.bootstrap.input.push_back(b[kInput]);
    report.bootstrap.combined.push_back(b[kCombined]);
  }

  if (config.drivers && config.inspector_spec.linear()) {
    report.drivers = compute_drivers(pool, et_inspector, p.names, config, config.n_baseline_runs);
  }
  return report;
}

}  // namespace

void AuditConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw UsageError("confidence must lie in (0, 1), got " + std::to_string(confidence));
  }
  if (bootstrap_runs < 1) throw UsageError("bootstrap_runs must be >= 1");
  if (background_cap < 1) throw UsageError("background_cap must be >= 1");
  if (inspector_spec.link != Link::logistic) {
    throw UsageError("inspector '" + inspector_spec.name() + "' is not a classifier");
  }
  split.validate();
}

nlohmann::json AuditConfig::to_json() const {
  return {{"model", model_spec.to_json()},
          {"inspector", inspector_spec.to_json()},
          {"inspector_inputs_standardized", inspector_spec.linear()},
          {"shap",
           {{"variant", to_string(shap.variant)},
            {"explain_probability", shap.probability},
            {"n_permutations", shap.n_permutations},
            {"seed", shap.seed}}},
          {"split", {{"fractions", split.fractions}, {"seed", split.seed}}},
          {"alpha", alpha},
          {"confidence", confidence},
          {"bootstrap_runs", bootstrap_runs},
          {"background_cap", background_cap},
          {"n_baseline_runs", n_baseline_runs},
          {"include_protected", include_protected},
          {"drivers", drivers},
          {"min_group_rows", min_group_rows}};
}

AuditReport equal_treatment_audit(const TabularDataset& data, const GroupPair& pair, const AuditConfig& config) {
  const Prepared p = prepare(data, pair, config);
  const Model model = fit_audited_model(p, config);
  return run_audit(p, model, pair, config);
}

AuditReport equal_treatment_audit(const TabularDataset& data, const GroupPair& pair, const AuditConfig& config,
                                  const Model& model) {
  const Prepared p = prepare(data, pair, config);
  if (feature_count(model) != static_cast<std::size_t>(p.x.cols())) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, dataset provides " +
                     std::to_string(p.x.cols()));
  }
  return run_audit(p, model, pair, config);
}

namespace {

DemographicParityResult dp_only(const Prepared& p, const Model& model, const AuditConfig& config) {
  const auto& val = p.parts[1];
  const auto& te = p.parts[2];
  const Vector z_val = take(p.z, val);
  const Vector z_te = take(p.z, te);
  require_both_groups(z_val, "validation");
  require_both_groups(z_te, "test");
  const RowFunction f = explained_function(model, config.shap.probability);
  auto column = [&](const std::vector<std::size_t>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      m(static_cast<Eigen::Index>(i), 0) = f(p.x.row(static_cast<Eigen::Index>(rows[i])).data());
    }
    return m;
  };
  const Model g = fit_model(config.inspector_spec, column(val), z_val);
  DemographicParityResult out;
  out.test = brunner_munzel_auc_test(predict(g, column(te)), z_te, Alternative::greater, config.confidence);
  out.distances = distance_report(predict(model, take_rows(p.x, te)), z_te, out.test.auc);
  return out;
}

}  // namespace

DemographicParityResult demographic_parity_audit(const TabularDataset& data, const GroupPair& pair,
                                                 const AuditConfig& config) {
  const Prepared p = prepare(data, pair, config);
  return dp_only(p, fit_audited_model(p, config), config);
}

DemographicParityResult demographic_parity_audit(const TabularDataset& data, const GroupPair& pair,
                                                 const AuditConfig& config, const Model& model) {
  const Prepared p = prepare(data, pair, config);
  if (feature_count(model) != static_cast<std::size_t>(p.x.cols())) {
    throw UsageError("model expects " + std::to_string(feature_count(model)) + " features, dataset provides " +
                     std::to_string(p.x.cols()));
  }
  return dp_only(p, model, config);
}

std::vector<DriverAttribution> explain_drivers(const TabularDataset& data, const GroupPair& pair,
                                               const AuditConfig& config, std::size_t n_baseline_runs) {
  if (!config.inspector_spec.linear()) {
    throw UsageError("driver attribution needs a linear inspector (--inspector logistic); inspector '" +
                     config.inspector_spec.name() + "' has no coefficients");
  }
  const Prepared p = prepare(data, pair, config);
  const Model model = fit_audited_model(p, config);
  const Pool pool = build_pool(p, model, config);
  const auto fit_rows = iota_range(0, pool.n_fit);
  const Model g = fit_model(config.inspector_spec, take_rows(pool.features[kEt], fit_rows), take(pool.z, fit_rows));
  return compute_drivers(pool, g, p.names, config, n_baseline_runs);
}

namespace {

std::string check_line(bool ok, const std::string& what) { return std::string(ok ? "PASS" : "FAIL") + ": " + what; }

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

// Marginal C2ST of one explanation column against z: logistic inspector fit
// on one half, Brunner-Munzel on the other.
AucTestResult marginal_c2st(const Vector& column, const Vector& z, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(z.size());
  const auto order = shuffled_range(n, seed);
  const std::vector<std::size_t> fit(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n / 2));
  const std::vector<std::size_t> eval(order.begin() + static_cast<std::ptrdiff_t>(n / 2), order.end());
  Matrix m(column.size(), 1);
  m.col(0) = column;
  const Model g = fit_model(LearnerSpec::logistic(), take_rows(m, fit), take(z, fit));
  return brunner_munzel_auc_test(predict(g, take_rows(m, eval)), take(z, eval));
}

AuditConfig suite_config(std::uint64_t seed, const LearnerSpec& inspector) {
  AuditConfig c;
  c.inspector_spec = inspector;
  c.split.seed = seed;
  c.bootstrap_runs = 1;
  c.drivers = false;
  return c;
}

}  // namespace

std::vector<CounterexampleResult> counterexample_suite(std::uint64_t seed, std::size_t n) {
  std::vector<CounterexampleResult> results;
  const GroupPair pair("0", "1");
  const double alpha = 0.05;

  {
    CounterexampleResult r;
    r.name = "lundberg";
    ScenarioSpec spec;
    spec.kind = ScenarioKind::lundberg;
    spec.n = n;
    spec.seed = seed;
    const TabularDataset data = generate(spec);
    LinearModel f;
    f.coefficients = Vector::Zero(2);
    f.coefficients << 1.0, -1.0;
    const Matrix x = data.features({"x1", "x2"});
    const Vector z = data.protected_codes(pair);
    const ExplanationMatrix e = shap_linear_interventional(f, x, x.colwise().mean().transpose());
    const AucTestResult s1 = marginal_c2st(e.values.col(0), z, derive_seed(seed, 11));
    const AucTestResult s2 = marginal_c2st(e.values.col(1), z, derive_seed(seed, 12));
    std::size_t f_zero = 0, f_zero_z1 = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (f.margin_row(x.row(i).data()) == 0.0) {
        ++f_zero;
        if (z[i] == 1.0) ++f_zero_z1;
      }
    }
    const double p_z1 = f_zero ? static_cast<double>(f_zero_z1) / static_cast<double>(f_zero) : 0.0;
    const AuditReport et = equal_treatment_audit(data, pair, suite_config(seed, LearnerSpec::gbt()), Model(f));
    r.checks.push_back(check_line(!s1.rejects(alpha), "S1 vs Z marginal C2ST p=" + fmt(s1.p_value)));
    r.checks.push_back(check_line(!s2.rejects(alpha), "S2 vs Z marginal C2ST p=" + fmt(s2.p_value)));
    r.checks.push_back(check_line(f_zero > 0 && f_zero_z1 == f_zero,
                                  "P(Z=1 | f=0) = " + fmt(p_z1) + ", P(Z=0 | f=0) = " + fmt(1.0 - p_z1)));
    r.checks.push_back(check_line(et.et.rejects(alpha), "joint ET audit (gbt inspector) auc=" + fmt(et.et.auc) +
                                                            " p=" + fmt(et.et.p_value)));
    r.details = {{"s1", to_json(s1)}, {"s2", to_json(s2)}, {"p_z1_given_f0", p_z1},
                 {"p_z0_given_f0", 1.0 - p_z1}, {"et", to_json(et.et)}};
    results.push_back(std::move(r));
  }

  {
    CounterexampleResult r;
    r.name = "ex42";
    ScenarioSpec spec;
    spec.kind = ScenarioKind::ex42;
    spec.n = n;
    spec.seed = seed;
    const TabularDataset data = generate(spec);
    LinearModel f;
    f.coefficients = Vector::Ones(2);
    const DemographicParityResult dp =
        demographic_parity_audit(data, pair, suite_config(seed, LearnerSpec::logistic()), Model(f));
    const AuditReport et = equal_treatment_audit(data, pair, suite_config(seed, LearnerSpec::gbt()), Model(f));
    const Matrix x = data.features({"x1", "x2"});
    const Vector z = data.protected_codes(pair);
    const ExplanationMatrix e = shap_linear_interventional(f, x, x.colwise().mean().transpose());
    std::vector<double> s1_z0, s1_z1;
    for (Eigen::Index i = 0; i < x.rows(); ++i) (z[i] == 0.0 ? s1_z0 : s1_z1).push_back(e.values(i, 0));
    double m0 = 0.0, v0 = 0.0;
    for (double v : s1_z0) m0 += v;
    m0 /= static_cast<double>(s1_z0.size());
    for (double v : s1_z0) v0 += (v - m0) * (v - m0);
    v0 /= static_cast<double>(s1_z0.size() - 1);
    const auto [lo, hi] = std::minmax_element(s1_z1.begin(), s1_z1.end());
    const double half_width = (*hi - *lo) / 2.0;
    r.checks.push_back(check_line(!dp.test.rejects(alpha), "DP audit auc=" + fmt(dp.test.auc) + " p=" +
                                                               fmt(dp.test.p_value) + " (f(X) independent of Z)"));
    r.checks.push_back(check_line(et.et.rejects(alpha) && et.et.auc >= 0.6,
                                  "ET audit (gbt inspector) auc=" + fmt(et.et.auc) + " p=" + fmt(et.et.p_value)));
    r.checks.push_back(check_line(std::abs(v0 - 1.0) < 0.1, "var(S1 | Z=0) = " + fmt(v0)));
    r.checks.push_back(check_line(half_width <= 1.0, "S1 | Z=1 support is a shifted [-1, 1] (half range " +
                                                         fmt(half_width) + ")"));
    r.details = {{"dp", to_json(dp.test)}, {"et", to_json(et.et)}, {"var_s1_z0", v0},
                 {"s1_z1_half_range", half_width}};
    results.push_back(std::move(r));
  }

  {
    CounterexampleResult r;
    r.name = "squared_dependence";
    ScenarioSpec spec;
    spec.kind = ScenarioKind::squared_dependence;
    spec.n = n + (n % 2);
    spec.seed = seed;
    const TabularDataset data = generate(spec);
    LinearModel f;
    f.coefficients = Vector::Zero(2);
    f.coefficients[0] = 1.0;
    const Matrix x = data.features({"x1", "x2"});
    const Vector c0 = x.col(0);
    const Vector c1 = x.col(1);
    const ExplanationMatrix e = shap_linear_observational_bivariate(
        f, x, ConditionalMeanTable::exact(c1, c0), ConditionalMeanTable::exact(c0, c1));
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < e.values.rows(); ++i) nonzero += e.values(i, 1) != 0.0;
    std::vector<double> f_low, f_high;
    for (Eigen::Index i = 0; i < x.rows(); ++i) (x(i, 1) == 4.0 ? f_high : f_low).push_back(f.margin_row(x.row(i).data()));
    const KsResult ks = ks_two_sample(f_low, f_high);
    r.checks.push_back(check_line(nonzero == 0, "observational phi_2 nonzero on " + std::to_string(nonzero) + " of " +
                                                    std::to_string(e.values.rows()) + " rows"));
    r.checks.push_back(check_line(ks.p_value < 0.01, "KS of f(X) between X2 groups D=" + fmt(ks.statistic) +
                                                         " p=" + fmt(ks.p_value)));
    r.details = {{"phi2_nonzero_rows", nonzero}, {"ks_statistic", ks.statistic}, {"ks_pvalue", ks.p_value}};
    results.push_back(std::move(r));
  }

  for (auto& r : results) {
    r.passed = std::all_of(r.checks.begin(), r.checks.end(), [](const std::string& c) { return c.rfind("PASS", 0) == 0; });
  }
  return results;
}

std::vector<SweepCell> sweep(const TabularDataset& data, const GroupPair& pair, const std::vector<LearnerSpec>& models,
                             const std::vector<LearnerSpec>& inspectors, const AuditConfig& base) {
  if (models.empty() || inspectors.empty()) throw UsageError("sweep needs nonempty model and inspector grids");
  std::vector<SweepCell> cells;
  for (const auto& m : models) {
    for (const auto& g : inspectors) {
      SweepCell cell;
      cell.model = m.name() + (m.kind == LearnerSpec::Kind::gbt ? "(n=" + std::to_string(m.n_trees) + ",d=" +
                                                                      std::to_string(m.max_depth) + ")"
                               : m.kind == LearnerSpec::Kind::tree ? "(d=" + std::to_string(m.max_depth) + ")"
                                                                   : "");
      cell.inspector = g.name() + (g.kind == LearnerSpec::Kind::gbt ? "(n=" + std::to_string(g.n_trees) + ",d=" +
                                                                          std::to_string(g.max_depth) + ")"
                                   : g.kind == LearnerSpec::Kind::tree ? "(d=" + std::to_string(g.max_depth) + ")"
                                                                       : "");
      AuditConfig c = base;
      c.model_spec = m;
      c.inspector_spec = g;
      c.drivers = false;
      try {
        const AuditReport r = equal_treatment_audit(data, pair, c);
        cell.et_auc = r.et.auc;
        cell.et_p_value = r.et.p_value;
        cell.dp_auc = r.dp.auc;
        cell.input_auc = r.input.auc;
        cell.combined_auc = r.combined.auc;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep CSV '" + path + "'");
  out.precision(17);
  out << "model,inspector,et_auc,et_p_value,dp_auc,input_auc,combined_auc,error\n";
  for (const auto& c : cells) {
    out << csv_field(c.model) << ',' << csv_field(c.inspector) << ',' << c.et_auc << ',' << c.et_p_value << ','
        << c.dp_auc << ',' << c.input_auc << ',' << c.combined_auc << ',' << csv_field(c.error) << '\n';
  }
}

nlohmann::json report_to_json(const AuditReport& r) {
  nlohmann::json drivers = nlohmann::json::array();
  for (const auto& d : r.drivers) {
    drivers.push_back({{"feature", d.feature},
                       {"coefficient", d.coefficient},
                       {"bootstrap_mean", d.bootstrap_mean},
                       {"bootstrap_sd", d.bootstrap_sd},
                       {"wasserstein_vs_random", d.wasserstein_vs_random},
                       {"wasserstein_null", d.wasserstein_null}});
  }
  const double alpha = r.config.value("alpha", 0.05);
  return {{"schema_version", kReportSchemaVersion},
          {"tool", "etaudit"},
          {"version", kVersion},
          {"seed", r.seed},
          {"config", r.config},
          {"pair", {{"group_a", r.pair.group_a}, {"group_b", r.pair.group_b}}},
          {"orientation", "group_a coded 0, group_b coded 1; AUC > 0.5 means inspectors score group_b higher"},
          {"model_kind", r.model_kind},
          {"feature_names", r.feature_names},
          {"n_rows", r.n_rows},
          {"n_group_a", r.n_group_a},
          {"n_group_b", r.n_group_b},
          {"split_sizes", r.split_sizes},
          {"base_value", r.base_value},
          {"et", to_json(r.et)},
          {"dp", to_json(r.dp)},
          {"input", to_json(r.input)},
          {"combined", to_json(r.combined)},
          {"dp_distances", to_json(r.dp_distances)},
          {"drivers", drivers},
          {"bootstrap",
           {{"et", r.bootstrap.et}, {"dp", r.bootstrap.dp}, {"input", r.bootstrap.input},
            {"combined", r.bootstrap.combined}}},
          {"efficiency_bridge_gap", r.efficiency_bridge_gap},
          {"et_violation", r.et.rejects(alpha)}};
}

AuditReport report_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kReportSchemaVersion) {
    throw DataError("unsupported report schema_version " + j.value("schema_version", nlohmann::json()).dump());
  }
  AuditReport r;
  r.pair = GroupPair(j.at("pair").at("group_a").get<std::string>(), j.at("pair").at("group_b").get<std::string>());
  r.model_kind = j.at("model_kind").get<std::string>();
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  r.n_rows = j.at("n_rows").get<std::size_t>();
  r.n_group_a = j.at("n_group_a").get<std::size_t>();
  r.n_group_b = j.at("n_group_b").get<std::size_t>();
  r.split_sizes = j.at("split_sizes").get<std::array<std::size_t, 3>>();
  r.base_value = j.at("base_value").get<double>();
  r.et = auc_test_from_json(j.at("et"));
  r.dp = auc_test_from_json(j.at("dp"));
  r.input = auc_test_from_json(j.at("input"));
  r.combined = auc_test_from_json(j.at("combined"));
  r.dp_distances = distance_report_from_json(j.at("dp_distances"));
  for (const auto& d : j.at("drivers")) {
    DriverAttribution a;
    a.feature = d.at("feature").get<std::string>();
    a.coefficient = d.at("coefficient").get<double>();
    a.bootstrap_mean = d.value("bootstrap_mean", 0.0);
    a.bootstrap_sd = d.value("bootstrap_sd", 0.0);
    a.wasserstein_vs_random = d.at("wasserstein_vs_random").get<double>();
    a.wasserstein_null = d.value("wasserstein_null", 0.0);
    r.drivers.push_back(a);
  }
  const auto& b = j.at("bootstrap");
  r.bootstrap.et = b.at("et").get<std::vector<double>>();
  r.bootstrap.dp = b.at("dp").get<std::vector<double>>();
  r.bootstrap.input = b.at("input").get<std::vector<double>>();
  r.bootstrap.combined = b.at("combined").get<std::vector<double>>();
  r.efficiency_bridge_gap = j.value("efficiency_bridge_gap", 0.0);
  r.config = j.at("config");
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

std::string reports_to_csv(const std::vector<AuditReport>& reports) {
  std::ostringstream out;
  out.precision(17);
  out << "group_a,group_b,n_rows,et_auc,et_ci_low,et_ci_high,et_p_value,dp_auc,dp_p_value,input_auc,input_p_value,"
         "combined_auc,combined_p_value,ks_pvalue,wasserstein,et_violation\n";
  for (const auto& r : reports) {
    const double alpha = r.config.value("alpha", 0.05);
    out << csv_field(r.pair.group_a) << ',' << csv_field(r.pair.group_b) << ',' << r.n_rows << ',' << r.et.auc << ','
        << r.et.ci_low << ',' << r.et.ci_high << ',' << r.et.p_value << ',' << r.dp.auc << ',' << r.dp.p_value << ','
        << r.input.auc << ',' << r.input.p_value << ',' << r.combined.auc << ',' << r.combined.p_value << ','
        << r.dp_distances.ks_pvalue << ',' << r.dp_distances.wasserstein << ',' << (r.et.rejects(alpha) ? 1 : 0)
        << '\n';
  }
  return out.str();
}

namespace {

void render_one(std::ostringstream& md, const nlohmann::json& j) {
  const AuditReport r = report_from_json(j);
  const double alpha = r.config.value("alpha", 0.05);
  md << "## " << r.pair.group_a << " vs " << r.pair.group_b << "\n\n";
  md << "Rows: " << r.n_rows << " (" << r.pair.group_a << ": " << r.n_group_a << ", " << r.pair.group_b << ": "
     << r.n_group_b << "), split " << r.split_sizes[0] << "/" << r.split_sizes[1] << "/" << r.split_sizes[2]
     << ". Model: " << r.model_kind << ". Group " << r.pair.group_b << " is coded 1.\n\n";
  md << "**Equal treatment: " << (r.et.rejects(alpha) ? "VIOLATED" : "not rejected") << "** at alpha = " << fmt(alpha)
     << "\n\n";
  md << "| inspector | AUC | CI | p-value |\n|---|---|---|---|\n";
  const std::pair<const char*, const AucTestResult*> rows[] = {
      {"explanations (ET)", &r.et}, {"predictions (DP)", &r.dp}, {"inputs", &r.input}, {"predictions + inputs", &r.combined}};
  for (const auto& [name, t] : rows) {
    md << "| " << name << " | " << fmt(t->auc) << " | [" << fmt(t->ci_low) << ", " << fmt(t->ci_high) << "] | "
       << fmt(t->p_value) << (t->degenerate ? " (degenerate)" : "") << " |\n";
  }
  md << "\n| DP distance | value | flagged |\n|---|---|---|\n";
  md << "| C2ST AUC | " << fmt(r.dp_distances.auc_c2st) << " | " << (r.dp_distances.auc_c2st > kFlagAuc ? "yes" : "no")
     << " |\n";
  md << "| KS p-value | " << fmt(r.dp_distances.ks_pvalue) << " | "
     << (r.dp_distances.ks_pvalue < kFlagKsPvalue ? "yes" : "no") << " |\n";
  md << "| Wasserstein | " << fmt(r.dp_distances.wasserstein) << " | "
     << (r.dp_distances.wasserstein > kFlagWasserstein ? "yes" : "no") << " |\n";
  if (!r.drivers.empty()) {
    md << "\n| feature | coefficient | W vs random | W null |\n|---|---|---|---|\n";
    for (const auto& d : r.drivers) {
      md << "| " << d.feature << " | " << fmt(d.coefficient) << " | " << fmt(d.wasserstein_vs_random) << " | "
         << fmt(d.wasserstein_null) << " |\n";
    }
  }
  if (!r.bootstrap.et.empty()) {
    double m = 0.0;
    for (double v : r.bootstrap.et) m += v;
    md << "\nBootstrap ET AUC mean over " << r.bootstrap.et.size() << " runs: "
       << fmt(m / static_cast<double>(r.bootstrap.et.size())) << "\n";
  }
  md << "\n";
}

}  // namespace

std::string render_markdown(const nlohmann::json& doc) {
  std::ostringstream md;
  md << "# Equal treatment audit\n\n";
  md << "etaudit " << doc.value("version", std::string(kVersion)) << ", seed " << doc.value("seed", 0ULL) << "\n\n";
  if (doc.contains("reports")) {
    for (const auto& r : doc.at("reports")) render_one(md, r);
  } else {
    render_one(md, doc);
  }
  return md.str();
}

}  // namespace etaudit
