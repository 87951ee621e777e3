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

#include <gtest/gtest.h>

#include "etaudit/synthetic.hpp"

using namespace etaudit;

namespace {

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TabularDataset make(ScenarioKind kind, std::size_t n, double gamma = 0.0, std::uint64_t seed = 0) {
  ScenarioSpec s;
  s.kind = kind;
  s.n = n;
  s.gamma = gamma;
  s.seed = seed;
  return generate(s);
}

}  // namespace

TEST(Generate, IndirectLatentCorrelationAndBalance) {
  const auto d = make(ScenarioKind::indirect, 100000, 0.6);
  const auto labels = d.protected_labels();
  double ones = 0;
  for (const auto& l : labels) ones += l == "1";
  EXPECT_NEAR(ones / 1e5, 0.5, 0.01);
  const auto side = scenario_sidecar(ScenarioSpec{ScenarioKind::indirect, 100000, 0.6, 0.0, 0}, d);
  // r(X3, 1[X4 > 0]) = gamma * sqrt(2 / pi) for jointly normal X3, X4.
  EXPECT_NEAR(side.at("realized").at("corr_x3_z").get<double>(), 0.6 * std::sqrt(2.0 / M_PI), 0.01);
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"x1", "x2", "x3"}));
}

TEST(Generate, IndirectLatentCorrelationMatchesGamma) {
  // Recover corr(X3, X4) from the probit relation of the point-biserial
  // correlation above.
  for (double g : {0.0, 0.3, 0.6, 0.9}) {
    const auto d = make(ScenarioKind::indirect, 100000, g, 3);
    const auto labels = d.protected_labels();
    std::vector<double> z(d.n_rows());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = labels[i] == "1";
    const double r = corr(d.column("x3").values, z);
    EXPECT_NEAR(r / std::sqrt(2.0 / M_PI), g, 0.01) << g;
  }
}

TEST(Generate, Ex42Moments) {
  const auto d = make(ScenarioKind::ex42, 100000);
  const auto labels = d.protected_labels();
  std::vector<double> a, b, f(d.n_rows()), z(d.n_rows());
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    z[i] = labels[i] == "1";
    f[i] = d.column("x1").values[i] + d.column("x2").values[i];
    (z[i] == 1 ? a : b).push_back(d.column("x1").values[i]);
    EXPECT_EQ(d.column("y").values[i], f[i]);
  }
  EXPECT_NEAR(mean(a), -2.0, 0.02);
  EXPECT_NEAR(mean(b), 2.0, 0.02);
  EXPECT_NEAR(corr(f, z), 0.0, 0.02);
}

TEST(Generate, LundbergIdentities) {
  const auto d = make(ScenarioKind::lundberg, 5000, 0.0, 4);
  const auto labels = d.protected_labels();
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    const double x1 = d.column("x1").values[i], x2 = d.column("x2").values[i];
    EXPECT_TRUE(x1 == 0 || x1 == 1);
    EXPECT_EQ(labels[i], x1 == x2 ? "1" : "0");
    EXPECT_EQ(d.column("y").values[i], x1 - x2);
  }
}

TEST(Generate, SquaredDependenceIdentities) {
  const auto d = make(ScenarioKind::squared_dependence, 1000);
  const auto labels = d.protected_labels();
  double s = 0;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    const double x1 = d.column("x1").values[i], x2 = d.column("x2").values[i];
    EXPECT_EQ(x2, x1 * x1);
    EXPECT_EQ(labels[i], x2 == 4 ? "1" : "0");
    s += x1;
  }
  EXPECT_EQ(s, 0.0);
}

TEST(Generate, Deterministic) {
  for (auto kind : {ScenarioKind::indirect, ScenarioKind::five_feature_uninformative, ScenarioKind::ex42,
                    ScenarioKind::power_gaussians}) {
    const double g = kind == ScenarioKind::ex42 || kind == ScenarioKind::power_gaussians ? 0.0 : 0.4;
    const auto a = make(kind, 500, g, 9), b = make(kind, 500, g, 9), c = make(kind, 500, g, 10);
    EXPECT_EQ(a.features(), b.features());
    EXPECT_NE(a.features(), c.features());
  }
}

TEST(ScenarioSpecs, Validation) {
  ScenarioSpec s;
  s.gamma = 1.0;
  EXPECT_THROW(s.validate(), UsageError);
  s.gamma = 0.5;
  EXPECT_NO_THROW(s.validate());
  s.kind = ScenarioKind::squared_dependence;
  s.gamma = 0.0;
  s.n = 1001;
  EXPECT_THROW(s.validate(), UsageError);
  s.n = 0;
  EXPECT_THROW(s.validate(), UsageError);
  EXPECT_EQ(parse_scenario_kind(to_string(ScenarioKind::ex42)), ScenarioKind::ex42);
  EXPECT_THROW(parse_scenario_kind("bogus"), UsageError);
  EXPECT_FALSE(auxiliary_columns(ScenarioKind::indirect).empty());
}

TEST(PortableDraws, Moments) {
  std::mt19937_64 rng(1);
  double s = 0, ss = 0, u = 0;
  for (int i = 0; i < 200000; ++i) {
    const double v = standard_normal(rng);
    s += v;
    ss += v * v;
    const double w = uniform01(rng);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, 1.0);
    u += w;
  }
  EXPECT_NEAR(s / 2e5, 0.0, 0.01);
  EXPECT_NEAR(ss / 2e5, 1.0, 0.01);
  EXPECT_NEAR(u / 2e5, 0.5, 0.005);
}
