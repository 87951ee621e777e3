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

#include "etaudit/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace etaudit {

namespace {

struct KindName {
  ScenarioKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ScenarioKind::indirect, "indirect"},
    {ScenarioKind::uninformative, "uninformative"},
    {ScenarioKind::five_feature_indirect, "five_feature_indirect"},
    {ScenarioKind::five_feature_uninformative, "five_feature_uninformative"},
    {ScenarioKind::ex42, "ex42"},
    {ScenarioKind::lundberg, "lundberg"},
    {ScenarioKind::squared_dependence, "squared_dependence"},
    {ScenarioKind::power_gaussians, "power_gaussians"},
};

bool uses_gamma(ScenarioKind k) {
  return k == ScenarioKind::indirect || k == ScenarioKind::uninformative ||
         k == ScenarioKind::five_feature_indirect || k == ScenarioKind::five_feature_uninformative;
}

Column numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.values = std::move(values);
  return c;
}

Column binary_labels(std::string name, std::vector<double> codes) {
  Column c;
  c.name = std::move(name);
  c.values = std::move(codes);
  c.categories = {"0", "1"};
  return c;
}

double bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p ? 1.0 : 0.0; }

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

TabularDataset scenario(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  const bool five = spec.kind == ScenarioKind::five_feature_indirect ||
                    spec.kind == ScenarioKind::five_feature_uninformative;
  const bool informative = spec.kind == ScenarioKind::indirect ||
                           spec.kind == ScenarioKind::five_feature_indirect;
  const std::size_t p = five ? 4 : 3;
  std::vector<std::vector<double>> x(p, std::vector<double>(n));
  std::vector<double> z(n), y(n), prob(n);
  const double g = spec.gamma;
  for (std::size_t i = 0; i < n; ++i) {
    x[0][i] = standard_normal(rng);
    x[1][i] = standard_normal(rng);
    double latent;
    if (five) {
      latent = standard_normal(rng);
      x[2][i] = g * latent + std::sqrt(1.0 - g * g) * standard_normal(rng);
      const double h = g / 2.0;
      x[3][i] = h * latent + std::sqrt(1.0 - h * h) * standard_normal(rng);
    } else {
      x[2][i] = standard_normal(rng);
      latent = g * x[2][i] + std::sqrt(1.0 - g * g) * standard_normal(rng);
    }
    z[i] = latent > 0.0 ? 1.0 : 0.0;
    double score = x[0][i] + x[1][i];
    if (informative) {
      for (std::size_t j = 2; j < p; ++j) score += x[j][i];
    }
    prob[i] = sigmoid(score);
    y[i] = bernoulli(rng, prob[i]);
  }
  TabularDataset d;
  for (std::size_t j = 0; j < p; ++j) d.add_column(numeric("x" + std::to_string(j + 1), std::move(x[j])));
  d.add_column(binary_labels("z", std::move(z)));
  d.add_column(numeric("y", std::move(y)));
  d.add_column(numeric("y_prob", std::move(prob)));
  d.set_protected("z");
  d.set_target("y");
  d.set_ignored("y_prob");
  return d;
}

TabularDataset ex42(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  std::vector<double> x1(n), x2(n), z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = -3.0 + 2.0 * uniform01(rng);
    const double b = 2.0 + standard_normal(rng);
    z[i] = bernoulli(rng, 0.5);
    x1[i] = a * z[i] + b * (1.0 - z[i]);
    x2[i] = b * z[i] + a * (1.0 - z[i]);
    y[i] = x1[i] + x2[i];
  }
  TabularDataset d;
  d.add_column(numeric("x1", std::move(x1)));
  d.add_column(numeric("x2", std::move(x2)));
  d.add_column(binary_labels("z", std::move(z)));
  d.add_column(numeric("y", std::move(y)));
  d.set_protected("z");
  d.set_target("y");
  return d;
}

TabularDataset lundberg(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  std::vector<double> x1(n), x2(n), z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = bernoulli(rng, 0.5);
    x2[i] = bernoulli(rng, 0.5);
    z[i] = x1[i] == x2[i] ? 1.0 : 0.0;
    y[i] = x1[i] - x2[i];
  }
  TabularDataset d;
  d.add_column(numeric("x1", std::move(x1)));
  d.add_column(numeric("x2", std::move(x2)));
  d.add_column(binary_labels("z", std::move(z)));
  d.add_column(numeric("y", std::move(y)));
  d.set_protected("z");
  d.set_target("y");
  return d;
}

// Balanced design: n/2 magnitudes from {1, 2}, each emitted once with each
// sign, then shuffled. Empirical E[X1 | X2] is then exactly zero.
TabularDataset squared_dependence(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  std::vector<double> values;
  values.reserve(n);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double v = uniform01(rng) < 0.5 ? 1.0 : 2.0;
    values.push_back(v);
    values.push_back(-v);
  }
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[uniform_index(rng, i)]);
  }
  std::vector<double> x2(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    x2[i] = values[i] * values[i];
    z[i] = x2[i] == 4.0 ? 1.0 : 0.0;
  }
  std::vector<double> y = values;
  TabularDataset d;
  d.add_column(numeric("x1", std::move(values)));
  d.add_column(numeric("x2", std::move(x2)));
  d.add_column(binary_labels("z", std::move(z)));
  d.add_column(numeric("y", std::move(y)));
  d.set_protected("z");
  d.set_target("y");
  return d;
}

TabularDataset power_gaussians(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::size_t n = spec.n;
  std::vector<double> x1(n), x2(n), y(n);
  const double c = std::sqrt(0.75);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = bernoulli(rng, 0.5);
    const double shift = y[i] == 1.0 ? spec.mu : -spec.mu;
    const double e1 = standard_normal(rng);
    const double e2 = standard_normal(rng);
    x1[i] = shift + e1;
    x2[i] = shift + 0.5 * e1 + c * e2;
  }
  TabularDataset d;
  d.add_column(numeric("x1", std::move(x1)));
  d.add_column(numeric("x2", std::move(x2)));
  d.add_column(numeric("y", std::move(y)));
  d.set_target("y");
  return d;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  std::string valid;
  for (const auto& k : kKindNames) valid += std::string(valid.empty() ? "" : ", ") + k.name;
  throw UsageError("unknown scenario kind '" + std::string(name) + "' (expected one of " + valid + ")");
}

void ScenarioSpec::validate() const {
  if (n < 1) throw UsageError("scenario needs n >= 1");
  if (uses_gamma(kind)) {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
      throw UsageError("gamma must lie in [0, 1), got " + std::to_string(gamma));
    }
  } else if (gamma != 0.0) {
    throw UsageError("scenario '" + to_string(kind) + "' takes no gamma");
  }
  if (kind == ScenarioKind::power_gaussians) {
    if (!std::isfinite(mu)) throw UsageError("mu must be finite");
  } else if (mu != 0.0) {
    throw UsageError("scenario '" + to_string(kind) + "' takes no mu");
  }
  if (kind == ScenarioKind::squared_dependence && n % 2 != 0) {
    throw UsageError("squared_dependence needs an even n, got " + std::to_string(n));
  }
}

nlohmann::json ScenarioSpec::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind)}, {"n", n}, {"seed", seed}};
  if (uses_gamma(kind)) j["gamma"] = gamma;
  if (kind == ScenarioKind::power_gaussians) j["mu"] = mu;
  return j;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

TabularDataset generate(const ScenarioSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(spec.kind)));
  switch (spec.kind) {
    case ScenarioKind::indirect:
    case ScenarioKind::uninformative:
    case ScenarioKind::five_feature_indirect:
    case ScenarioKind::five_feature_uninformative:
      return scenario(spec, rng);
    case ScenarioKind::ex42:
      return ex42(spec, rng);
    case ScenarioKind::lundberg:
      return lundberg(spec, rng);
    case ScenarioKind::squared_dependence:
      return squared_dependence(spec, rng);
    case ScenarioKind::power_gaussians:
      return power_gaussians(spec, rng);
  }
  throw UsageError("unhandled scenario kind");
}

std::vector<std::string> auxiliary_columns(ScenarioKind kind) {
  if (uses_gamma(kind)) return {"y_prob"};
  return {};
}

nlohmann::json scenario_sidecar(const ScenarioSpec& spec, const TabularDataset& data) {
  nlohmann::json j;
  j["tool"] = "etaudit";
  j["version"] = kVersion;
  j["spec"] = spec.to_json();
  j["n_rows"] = data.n_rows();
  j["target"] = data.target() ? *data.target() : "";
  j["protected"] = data.protected_column() ? *data.protected_column() : "";
  j["auxiliary_columns"] = auxiliary_columns(spec.kind);
  if (data.protected_column()) {
    const auto& zc = data.column(*data.protected_column()).values;
    double ones = 0.0;
    for (double v : zc) ones += v;
    j["realized"]["p_z1"] = ones / static_cast<double>(zc.size());
    if (uses_gamma(spec.kind)) {
      j["realized"]["corr_x3_z"] = correlation(data.column("x3").values, zc);
    }
  }
  return j;
}

std::vector<GammaPoint> gamma_sweep(ScenarioKind kind, const std::vector<double>& gammas,
                                    std::size_t n, std::uint64_t seed, const AuditConfig& config) {
  if (!uses_gamma(kind)) throw UsageError("gamma sweep needs a gamma scenario, got '" + to_string(kind) + "'");
  if (gammas.empty()) throw UsageError("gamma sweep needs at least one gamma");
  std::vector<GammaPoint> out;
  const GroupPair pair("0", "1");
  for (double g : gammas) {
    ScenarioSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.gamma = g;
    spec.seed = seed;
    const TabularDataset data = generate(spec);
    GammaPoint point;
    point.gamma = g;
    point.realized_corr_xz = correlation(data.column("x3").values, data.column("z").values);
    point.report = equal_treatment_audit(data, pair, config);
    out.push_back(std::move(point));
  }
  return out;
}

void write_gamma_csv(const std::vector<GammaPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep CSV '" + path + "'");
  out.precision(17);
  out << "gamma,corr_x3_z,et_auc,et_p_value,dp_auc,dp_p_value,input_auc,input_p_value,combined_auc,"
         "combined_p_value\n";
  for (const auto& p : points) {
    const auto& r = p.report;
    out << p.gamma << ',' << p.realized_corr_xz << ',' << r.et.auc << ',' << r.et.p_value << ','
        << r.dp.auc << ',' << r.dp.p_value << ',' << r.input.auc << ',' << r.input.p_value << ','
        << r.combined.auc << ',' << r.combined.p_value << '\n';
  }
}

}  // namespace etaudit
