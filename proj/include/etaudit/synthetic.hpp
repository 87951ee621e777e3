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
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "etaudit/data.hpp"
#include "etaudit/inspector.hpp"

namespace etaudit {

enum class ScenarioKind {
  indirect,
  uninformative,
  five_feature_indirect,
  five_feature_uninformative,
  ex42,
  lundberg,
  squared_dependence,
  power_gaussians
};

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

// Column layout per kind (z is the protected column, labels "0"/"1"):
//   indirect / uninformative        x1 x2 x3 z y y_prob   Z = 1[X4 > 0], X4 latent
//   five_feature_*                  x1 x2 x3 x4 z y y_prob Z = 1[X5 > 0], X5 latent
//   ex42                            x1 x2 z y             y = X1 + X2 = A + B
//   lundberg                        x1 x2 z y             Z = 1[X1 = X2], y = X1 - X2
//   squared_dependence              x1 x2 z y             X2 = X1^2, Z = 1[X2 = 4], y = X1
//   power_gaussians                 x1 x2 y
// y_prob is marked ignored; y is its Bernoulli draw.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::indirect;
  std::size_t n = 10000;
  double gamma = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

TabularDataset generate(const ScenarioSpec& spec);

// Spec plus realized summary statistics (e.g. r(X3, Z)) for the sidecar file.
nlohmann::json scenario_sidecar(const ScenarioSpec& spec, const TabularDataset& data);

// Columns the generator adds for diagnostics only.
std::vector<std::string> auxiliary_columns(ScenarioKind kind);

// Portable draws (independent of the standard library's distributions).
double uniform01(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

struct GammaPoint {
  double gamma = 0.0;
  double realized_corr_xz = 0.0;  // r(X3, Z) (indirect kinds) in the generated data
  AuditReport report;
};

// One full audit per gamma on freshly generated data (same seed for every
// point).
std::vector<GammaPoint> gamma_sweep(ScenarioKind kind, const std::vector<double>& gammas,
                                    std::size_t n, std::uint64_t seed, const AuditConfig& config);
void write_gamma_csv(const std::vector<GammaPoint>& points, const std::string& path);

}  // namespace etaudit
