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

#include "etaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "etaudit/models.hpp"
#include "etaudit/parallel.hpp"
#include "etaudit/synthetic.hpp"

namespace etaudit {

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank (i+1 + j)/2.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

namespace {

struct Groups {
  std::vector<double> neg;
  std::vector<double> pos;
};

Groups split_by_label(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size()) {
    throw UsageError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                     std::to_string(labels.size()) + ")");
  }
  Groups g;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1.0) g.pos.push_back(scores[i]);
    else if (labels[i] == 0.0) g.neg.push_back(scores[i]);
    else throw UsageError("labels must be 0 or 1, found " + std::to_string(labels[i]));
  }
  if (g.pos.empty() || g.neg.empty()) throw DataError("AUC needs both classes present");
  return g;
}

double sum_of_ranks(const std::vector<double>& ranks, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += ranks[i];
  return s;
}

double student_quantile(double df, double prob) {
  if (!std::isfinite(df) || df > 1e8) return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), prob);
}

double student_sf(double df, double t) {
  if (!std::isfinite(df) || df > 1e8) {
    return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), t));
  }
  return boost::math::cdf(boost::math::complement(boost::math::students_t_distribution<double>(df), t));
}

}  // namespace

double auc_u_statistic(const Vector& scores, const Vector& labels) {
  const Groups g = split_by_label(scores, labels);
  std::vector<double> pooled(g.neg);
  pooled.insert(pooled.end(), g.pos.begin(), g.pos.end());
  const auto ranks = midranks(pooled);
  const auto n_pos = static_cast<double>(g.pos.size());
  return sum_of_ranks(ranks, g.neg.size(), pooled.size()) - n_pos * (n_pos + 1.0) / 2.0;
}

double auc(const Vector& scores, const Vector& labels) {
  const double u = auc_u_statistic(scores, labels);
  double n_pos = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) n_pos += labels[i];
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  return u / (n_pos * n_neg);
}

AucTestResult brunner_munzel_auc_test(const Vector& scores, const Vector& labels,
                                      Alternative alternative, double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
  const Groups g = split_by_label(scores, labels);
  const std::size_t n0 = g.neg.size();
  const std::size_t n1 = g.pos.size();
  if (n0 < 2 || n1 < 2) throw DataError("Brunner-Munzel test needs at least two scores per class");

  std::vector<double> pooled(g.neg);
  pooled.insert(pooled.end(), g.pos.begin(), g.pos.end());
  const auto pooled_ranks = midranks(pooled);
  const auto within_neg = midranks(g.neg);
  const auto within_pos = midranks(g.pos);

  const double m0 = static_cast<double>(n0);
  const double m1 = static_cast<double>(n1);
  const double n = m0 + m1;
  const double mean_neg = sum_of_ranks(pooled_ranks, 0, n0) / m0;
  const double mean_pos = sum_of_ranks(pooled_ranks, n0, pooled.size()) / m1;

  double s0 = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    const double d = pooled_ranks[i] - within_neg[i] - mean_neg + (m0 + 1.0) / 2.0;
    s0 += d * d;
  }
  s0 /= m0 - 1.0;
  double s1 = 0.0;
  for (std::size_t i = 0; i < n1; ++i) {
    const double d = pooled_ranks[n0 + i] - within_pos[i] - mean_pos + (m1 + 1.0) / 2.0;
    s1 += d * d;
  }
  s1 /= m1 - 1.0;

  AucTestResult r;
  r.n_pos = n1;
  r.n_neg = n0;
  r.confidence = confidence;
  r.auc = (mean_pos - (m1 + 1.0) / 2.0) / m0;

  const double v0 = m0 * s0;
  const double v1 = m1 * s1;
  const double pooled_var = v0 + v1;
  if (!(pooled_var > 0.0)) {
    // Constant placements: either every score ties (AUC = 1/2) or the classes
    // are completely separated. Only the latter carries evidence.
    r.degenerate = true;
    r.statistic = 0.0;
    r.df = 0.0;
    if (r.auc == 0.5) {
      r.p_value = 1.0;
      r.ci_low = 0.0;
      r.ci_high = 1.0;
    } else {
      const bool toward_h1 = alternative == Alternative::two_sided || r.auc > 0.5;
      r.p_value = toward_h1 ? 0.0 : 1.0;
      r.ci_low = r.auc;
      r.ci_high = r.auc;
    }
    return r;
  }
  r.statistic = m0 * m1 * (mean_pos - mean_neg) / (n * std::sqrt(pooled_var));
  r.df = pooled_var * pooled_var / (v0 * v0 / (m0 - 1.0) + v1 * v1 / (m1 - 1.0));
  if (alternative == Alternative::greater) {
    r.p_value = student_sf(r.df, r.statistic);
  } else {
    r.p_value = std::min(1.0, 2.0 * student_sf(r.df, std::abs(r.statistic)));
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);

  const double se = std::sqrt(pooled_var) / (m0 * m1);
  const double q = student_quantile(r.df, 0.5 + confidence / 2.0);
  r.ci_low = std::clamp(r.auc - q * se, 0.0, 1.0);
  r.ci_high = std::clamp(r.auc + q * se, 0.0, 1.0);
  return r;
}

AccuracyTestResult accuracy_c2st(const Vector& scores, const Vector& labels, double threshold) {
  const Groups g = split_by_label(scores, labels);
  AccuracyTestResult r;
  r.n = static_cast<std::size_t>(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double predicted = scores[i] > threshold ? 1.0 : 0.0;
    if (predicted == labels[i]) ++r.correct;
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n);
  r.baseline = static_cast<double>(std::max(g.pos.size(), g.neg.size())) / static_cast<double>(r.n);
  // P(Binomial(n, baseline) >= correct)
  if (r.correct == 0) {
    r.p_value = 1.0;
  } else if (r.baseline >= 1.0) {
    r.p_value = 1.0;
  } else {
    r.p_value = boost::math::ibeta(static_cast<double>(r.correct),
                                   static_cast<double>(r.n - r.correct) + 1.0, r.baseline);
  }
  return r;
}

namespace {

// P(D >= d) for sample sizes m, n by counting lattice paths that stay within
// |i/m - j/n| < d (probability-normalized so nothing overflows).
double smirnov_exact_sf(double d, std::size_t m, std::size_t n) {
  if (m > n) std::swap(m, n);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double q = (0.5 + std::floor(d * md * nd - 1e-7)) / (md * nd);
  std::vector<double> u(n + 1);
  for (std::size_t j = 0; j <= n; ++j) u[j] = (static_cast<double>(j) / nd > q) ? 0.0 : 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(i + n);
    u[0] = (static_cast<double>(i) / md > q) ? 0.0 : w * u[0];
    for (std::size_t j = 1; j <= n; ++j) {
      u[j] = std::abs(static_cast<double>(i) / md - static_cast<double>(j) / nd) > q ? 0.0 : w * u[j] + u[j - 1];
    }
  }
  return std::clamp(1.0 - u[n], 0.0, 1.0);
}

// Kolmogorov limiting survival function Q(lambda).
double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    const double pi = 3.14159265358979323846;
    const double w = std::sqrt(2.0 * pi) / lambda;
    double s = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const double odd = 2.0 * k - 1.0;
      s += std::exp(-odd * odd * pi * pi / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - w * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("Kolmogorov-Smirnov test needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  if (d == 0.0) {
    r.p_value = 1.0;
  } else if (sa.size() * sb.size() <= 10000) {
    r.p_value = smirnov_exact_sf(d, sa.size(), sb.size());
  } else {
    r.p_value = kolmogorov_sf(d * std::sqrt(na * nb / (na + nb)));
  }
  return r;
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("Wasserstein distance needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  // Walk the merged quantile levels k/n_a and l/n_b; between consecutive
  // levels both quantile functions are constant.
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double level = 0.0;
  double total = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    total += (next - level) * std::abs(sa[i] - sb[j]);
    level = next;
    // Compare via integer cross-multiplication so equal levels advance together.
    const auto lhs = (i + 1) * sb.size();
    const auto rhs = (j + 1) * sa.size();
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return total;
}

DistanceReport distance_report(const Vector& predictions, const Vector& z, double auc_c2st) {
  const Groups g = split_by_label(predictions, z);
  DistanceReport r;
  r.auc_c2st = auc_c2st;
  const KsResult ks = ks_two_sample(g.neg, g.pos);
  r.ks_statistic = ks.statistic;
  r.ks_pvalue = ks.p_value;
  r.wasserstein = wasserstein_1d(g.neg, g.pos);
  return r;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw UsageError("spearman needs two equal-length samples (n >= 2)");
  const auto ra = midranks(a);
  const auto rb = midranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> default_power_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.005 * k);
  return grid;
}

std::vector<PowerPoint> power_study(const std::vector<double>& mu_grid, std::size_t n,
                                    std::size_t runs, std::uint64_t seed, double alpha) {
  if (mu_grid.empty()) throw UsageError("power study needs a nonempty mu grid");
  if (n < 8) throw UsageError("power study needs n >= 8");
  if (runs < 100) throw UsageError("power study needs runs >= 100, got " + std::to_string(runs));
  std::vector<PowerPoint> out;
  const LearnerSpec learner = LearnerSpec::logistic();
  for (std::size_t g = 0; g < mu_grid.size(); ++g) {
    std::vector<char> reject_auc(runs, 0), reject_acc(runs, 0);
    parallel_for(runs, [&](std::size_t r) {
      ScenarioSpec spec;
      spec.kind = ScenarioKind::power_gaussians;
      spec.n = n;
      spec.mu = mu_grid[g];
      spec.seed = derive_seed(derive_seed(seed, g), r);
      const TabularDataset data = generate(spec);
      const Matrix x = data.features();
      const Vector y = data.target_values();
      const auto half = static_cast<Eigen::Index>(n / 2);
      const Matrix x_fit = x.topRows(half);
      const Vector y_fit = y.head(half);
      const Matrix x_test = x.bottomRows(x.rows() - half);
      const Vector y_test = y.tail(y.size() - half);
      const double pos_fit = y_fit.sum();
      const double pos_test = y_test.sum();
      if (pos_fit < 1 || pos_fit > static_cast<double>(half) - 1 || pos_test < 2 ||
          pos_test > static_cast<double>(y_test.size()) - 2) {
        return;
      }
      const Model clf = fit_model(learner, x_fit, y_fit);
      const Vector scores = predict(clf, x_test);
      reject_auc[r] = brunner_munzel_auc_test(scores, y_test, Alternative::greater).p_value < alpha;
      reject_acc[r] = accuracy_c2st(scores, y_test).p_value < alpha;
    });
    PowerPoint point;
    point.mu = mu_grid[g];
    point.runs = runs;
    point.n = n;
    point.power_auc = static_cast<double>(std::count(reject_auc.begin(), reject_auc.end(), 1)) / static_cast<double>(runs);
    point.power_accuracy = static_cast<double>(std::count(reject_acc.begin(), reject_acc.end(), 1)) / static_cast<double>(runs);
    out.push_back(point);
  }
  return out;
}

void write_power_csv(const std::vector<PowerPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write power CSV '" + path + "'");
  out.precision(17);
  out << "mu,power_auc,power_accuracy,runs,n\n";
  for (const auto& p : points) {
    out << p.mu << ',' << p.power_auc << ',' << p.power_accuracy << ',' << p.runs << ',' << p.n << '\n';
  }
}

nlohmann::json to_json(const AucTestResult& r) {
  return {{"auc", r.auc},         {"ci_low", r.ci_low}, {"ci_high", r.ci_high},
          {"p_value", r.p_value}, {"statistic", r.statistic}, {"df", r.df},
          {"n_pos", r.n_pos},     {"n_neg", r.n_neg},   {"confidence", r.confidence},
          {"degenerate", r.degenerate}};
}

AucTestResult auc_test_from_json(const nlohmann::json& j) {
  AucTestResult r;
  r.auc = j.at("auc").get<double>();
  r.ci_low = j.at("ci_low").get<double>();
  r.ci_high = j.at("ci_high").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.statistic = j.at("statistic").get<double>();
  r.df = j.at("df").get<double>();
  r.n_pos = j.at("n_pos").get<std::size_t>();
  r.n_neg = j.at("n_neg").get<std::size_t>();
  r.confidence = j.value("confidence", 0.95);
  r.degenerate = j.value("degenerate", false);
  return r;
}

nlohmann::json to_json(const DistanceReport& r) {
  return {{"auc_c2st", r.auc_c2st},
          {"ks_statistic", r.ks_statistic},
          {"ks_pvalue", r.ks_pvalue},
          {"wasserstein", r.wasserstein}};
}

DistanceReport distance_report_from_json(const nlohmann::json& j) {
  DistanceReport r;
  r.auc_c2st = j.at("auc_c2st").get<double>();
  r.ks_statistic = j.value("ks_statistic", 0.0);
  r.ks_pvalue = j.at("ks_pvalue").get<double>();
  r.wasserstein = j.at("wasserstein").get<double>();
  return r;
}

}  // namespace etaudit
