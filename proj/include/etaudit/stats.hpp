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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "etaudit/common.hpp"

namespace etaudit {

enum class Alternative { greater, two_sided };

// Result of testing H0: AUC = 1/2 for classifier scores against 0/1 labels.
struct AucTestResult {
  double auc = 0.5;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double p_value = 1.0;
  double statistic = 0.0;
  double df = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double confidence = 0.95;
  // Set when both groups have zero within-group placement variance. All-tied
  // scores then report p = 1; completely separated classes report p = 0 when
  // the separation points toward the alternative, p = 1 otherwise.
  bool degenerate = false;

  bool rejects(double alpha) const { return p_value < alpha; }
};

struct DistanceReport {
  double auc_c2st = 0.5;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  double wasserstein = 0.0;
};

// Midranks (1-based, ties share their average rank).
std::vector<double> midranks(std::span<const double> values);

// Mann-Whitney U of the positives: pairs won by a positive, ties counted 1/2.
double auc_u_statistic(const Vector& scores, const Vector& labels);
// Pairwise win fraction of positives over negatives, ties counted 1/2.
double auc(const Vector& scores, const Vector& labels);

// Brunner-Munzel test of stochastic equality between the scores of the
// negatives and positives, phrased as H0: AUC = 1/2. `greater` tests
// H1: AUC > 1/2. The confidence interval uses the same variance estimate and
// Satterthwaite degrees of freedom.
AucTestResult brunner_munzel_auc_test(const Vector& scores, const Vector& labels,
                                      Alternative alternative = Alternative::greater,
                                      double confidence = 0.95);

struct AccuracyTestResult {
  double accuracy = 0.0;
  double baseline = 0.5;  // majority-class rate
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t correct = 0;
};

// One-sided binomial test of thresholded accuracy against the majority-class
// rate of the evaluated labels.
AccuracyTestResult accuracy_c2st(const Vector& scores, const Vector& labels, double threshold = 0.5);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sided two-sample Kolmogorov-Smirnov test. The p-value is exact (lattice
// path count) when n_a * n_b <= 10000 and asymptotic otherwise.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// 1-Wasserstein distance between two empirical distributions: the integral of
// |Q_a(t) - Q_b(t)| over t in (0, 1), with step quantile functions evaluated
// on the merged grid of their breakpoints.
double wasserstein_1d(std::span<const double> a, std::span<const double> b);

// Prediction-distribution distances between groups z = 0 and z = 1.
DistanceReport distance_report(const Vector& predictions, const Vector& z, double auc_c2st);

double spearman(std::span<const double> a, std::span<const double> b);

struct PowerPoint {
  double mu = 0.0;
  double power_auc = 0.0;
  double power_accuracy = 0.0;
  std::size_t runs = 0;
  std::size_t n = 0;
};

// Default grid 0.005, 0.010, ..., 0.100.
std::vector<double> default_power_grid();

// Rejection rates of the AUC (Brunner-Munzel) and accuracy C2STs for a
// logistic-regression classifier on two shifted correlated Gaussians. Each
// run draws n points, fits on the first half and tests on the second.
std::vector<PowerPoint> power_study(const std::vector<double>& mu_grid, std::size_t n,
                                    std::size_t runs, std::uint64_t seed, double alpha = 0.05);
void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path);

nlohmann::json to_json(const AucTestResult& r);
AucTestResult auc_test_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistanceReport& r);
DistanceReport distance_report_from_json(const nlohmann::json& j);

}  // namespace etaudit
