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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "etaudit/data.hpp"
#include "etaudit/models.hpp"
#include "etaudit/shapley.hpp"
#include "etaudit/stats.hpp"

namespace etaudit {

inline constexpr int kReportSchemaVersion = 1;

struct AuditConfig {
  LearnerSpec model_spec = LearnerSpec::gbt();
  LearnerSpec inspector_spec = LearnerSpec::logistic();
  ExplainOptions shap;
  SplitSpec split;
  double alpha = 0.05;
  double confidence = 0.95;
  std::size_t bootstrap_runs = 30;
  std::size_t background_cap = 512;
  std::size_t n_baseline_runs = 30;
  bool include_protected = false;
  bool drivers = true;
  std::size_t min_group_rows = 20;

  void validate() const;
  nlohmann::json to_json() const;
};

struct DriverAttribution {
  std::string feature;
  // Standardized coefficient of the ET inspector.
  double coefficient = 0.0;
  double bootstrap_mean = 0.0;
  double bootstrap_sd = 0.0;
  // Wasserstein distance between the bootstrap coefficient distribution under
  // the true groups and under randomly permuted groups.
  double wasserstein_vs_random = 0.0;
  // The same distance between two independent permuted-group distributions;
  // a reference scale for "no driver".
  double wasserstein_null = 0.0;
};

struct BootstrapAucs {
  std::vector<double> et;
  std::vector<double> dp;
  std::vector<double> input;
  std::vector<double> combined;
};

struct AuditReport {
  GroupPair pair;
  std::string model_kind;
  std::vector<std::string> feature_names;
  std::size_t n_rows = 0;
  std::size_t n_group_a = 0;
  std::size_t n_group_b = 0;
  std::array<std::size_t, 3> split_sizes{};
  double base_value = 0.0;

  AucTestResult et;
  AucTestResult dp;
  AucTestResult input;
  AucTestResult combined;
  DistanceReport dp_distances;
  std::vector<DriverAttribution> drivers;
  BootstrapAucs bootstrap;
  // max |DP inspector input - (row sum of explanations + base)| on the test rows.
  double efficiency_bridge_gap = 0.0;

  nlohmann::json config;
  std::uint64_t seed = 0;

  bool et_violation(double alpha) const { return et.rejects(alpha); }
};

// Fits f on the train part (features exclude the protected column unless
// configured), explains the val and test parts against a background drawn from
// val, trains the four inspectors on val and tests their AUC on test.
AuditReport equal_treatment_audit(const TabularDataset& data, const GroupPair& pair,
                                  const AuditConfig& config);
// Same pipeline with an already fitted model (the train part is left unused).
AuditReport equal_treatment_audit(const TabularDataset& data, const GroupPair& pair,
                                  const AuditConfig& config, const Model& model);

struct DemographicParityResult {
  AucTestResult test;
  DistanceReport distances;
};
DemographicParityResult demographic_parity_audit(const TabularDataset& data, const GroupPair& pair,
                                                 const AuditConfig& config);
DemographicParityResult demographic_parity_audit(const TabularDataset& data, const GroupPair& pair,
                                                 const AuditConfig& config, const Model& model);

// Per-feature driver table; requires a linear inspector.
std::vector<DriverAttribution> explain_drivers(const TabularDataset& data, const GroupPair& pair,
                                               const AuditConfig& config,
                                               std::size_t n_baseline_runs);

struct CounterexampleResult {
  std::string name;
  bool passed = false;
  std::vector<std::string> checks;  // one "PASS|FAIL: ..." line per check
  nlohmann::json details;
};

// lundberg, ex42 and squared_dependence constructions with their
// (in)dependence pattern checked.
std::vector<CounterexampleResult> counterexample_suite(std::uint64_t seed, std::size_t n = 10000);

struct SweepCell {
  std::string model;
  std::string inspector;
  double et_auc = 0.5;
  double et_p_value = 1.0;
  double dp_auc = 0.5;
  double input_auc = 0.5;
  double combined_auc = 0.5;
  std::string error;
};

// Audits the cross product of model and inspector learners on shared splits.
// Failing cells are recorded with their error and the sweep continues.
std::vector<SweepCell> sweep(const TabularDataset& data, const GroupPair& pair,
                             const std::vector<LearnerSpec>& models,
                             const std::vector<LearnerSpec>& inspectors, const AuditConfig& base);
void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

nlohmann::json report_to_json(const AuditReport& report);
AuditReport report_from_json(const nlohmann::json& doc);
// One header line plus one line per report.
std::string reports_to_csv(const std::vector<AuditReport>& reports);
// Renders a document holding {"reports": [...]} or a single report.
std::string render_markdown(const nlohmann::json& doc);

}  // namespace etaudit
