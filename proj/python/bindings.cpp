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

#include <algorithm>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "etaudit/cli.hpp"
#include "etaudit/inspector.hpp"
#include "etaudit/shapley.hpp"
#include "etaudit/stats.hpp"
#include "etaudit/synthetic.hpp"

namespace py = pybind11;
using namespace etaudit;

namespace {

py::dict dataset_to_dict(const TabularDataset& d) {
  py::dict out;
  for (const auto& c : d.columns()) {
    if (c.categorical()) {
      std::vector<std::string> labels(d.n_rows());
      for (std::size_t i = 0; i < d.n_rows(); ++i) labels[i] = c.label(i);
      out[py::str(c.name)] = labels;
    } else {
      out[py::str(c.name)] =
          Vector(Eigen::Map<const Vector>(c.values.data(), static_cast<Eigen::Index>(c.values.size())));
    }
  }
  return out;
}

TabularDataset dataset_from_arrays(const Matrix& x, const Vector& y, const std::vector<std::string>& z,
                                   std::vector<std::string> names) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw UsageError("feature_names length must match x");
  if (y.size() != x.rows() || static_cast<Eigen::Index>(z.size()) != x.rows()) {
    throw UsageError("x, y and z must have the same number of rows");
  }
  TabularDataset d;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> col(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) col[static_cast<std::size_t>(i)] = x(i, j);
    d.add_column({names[static_cast<std::size_t>(j)], std::move(col), {}});
  }
  std::vector<std::string> cats(z);
  std::sort(cats.begin(), cats.end());
  cats.erase(std::unique(cats.begin(), cats.end()), cats.end());
  std::vector<double> codes(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    codes[i] = static_cast<double>(std::lower_bound(cats.begin(), cats.end(), z[i]) - cats.begin());
  }
  d.add_column({"__protected", std::move(codes), std::move(cats)});
  d.add_column({"__target", std::vector<double>(y.data(), y.data() + y.size()), {}});
  d.set_target("__target");
  d.set_protected("__protected");
  return d;
}

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_etaudit, m) {
  m.doc() = "Equal treatment auditing of predictive models";
  m.attr("__version__") = kVersion;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

  m.def("auc", &auc, py::arg("scores"), py::arg("labels"));

  m.def(
      "brunner_munzel",
      [](const Vector& scores, const Vector& labels, const std::string& alternative, double confidence) {
        if (alternative != "greater" && alternative != "two-sided") {
          throw UsageError("alternative must be 'greater' or 'two-sided'");
        }
        const auto alt = alternative == "greater" ? Alternative::greater : Alternative::two_sided;
        return to_python(to_json(brunner_munzel_auc_test(scores, labels, alt, confidence)));
      },
      py::arg("scores"), py::arg("labels"), py::arg("alternative") = "greater", py::arg("confidence") = 0.95);

  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = ks_two_sample(a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "wasserstein",
      [](const std::vector<double>& a, const std::vector<double>& b) { return wasserstein_1d(a, b); },
      py::arg("a"), py::arg("b"));

  m.def(
      "generate",
      [](const std::string& kind, std::size_t n, double gamma, double mu, std::uint64_t seed) {
        ScenarioSpec s;
        s.kind = parse_scenario_kind(kind);
        s.n = n;
        s.gamma = gamma;
        s.mu = mu;
        s.seed = seed;
        return dataset_to_dict(generate(s));
      },
      py::arg("kind") = "indirect", py::arg("n") = 10000, py::arg("gamma") = 0.0, py::arg("mu") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "explain",
      [](const Matrix& x, const Vector& y, const Matrix& rows, const Matrix& background, const std::string& model,
         const std::string& variant, bool probability, std::size_t n_permutations, std::uint64_t seed) {
        const Model fitted = fit_model(LearnerSpec::parse(model), x, y);
        ExplainOptions o;
        o.variant = parse_shap_variant(variant);
        o.probability = probability;
        o.n_permutations = n_permutations;
        o.seed = seed;
        const auto e = explain(fitted, rows, background, o);
        return py::make_tuple(e.values, e.base_value, e.outputs);
      },
      py::arg("x"), py::arg("y"), py::arg("rows"), py::arg("background"), py::arg("model") = "gbt",
      py::arg("variant") = "interventional", py::arg("probability") = false, py::arg("n_permutations") = 200,
      py::arg("seed") = 0);

  m.def(
      "audit",
      [](const Matrix& x, const Vector& y, const std::vector<std::string>& z, const std::string& group_a,
         const std::string& group_b, std::vector<std::string> feature_names, const std::string& model,
         const std::string& inspector, std::uint64_t seed, std::size_t bootstrap_runs, bool drivers) {
        AuditConfig c;
        c.model_spec = LearnerSpec::parse(model);
        c.inspector_spec = LearnerSpec::parse(inspector);
        c.split.seed = seed;
        c.shap.seed = seed;
        c.bootstrap_runs = bootstrap_runs;
        c.drivers = drivers;
        const auto d = dataset_from_arrays(x, y, z, std::move(feature_names));
        nlohmann::json j;
        {
          py::gil_scoped_release release;
          j = report_to_json(equal_treatment_audit(d, GroupPair(group_a, group_b), c));
        }
        return to_python(j);
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("group_a"), py::arg("group_b"),
      py::arg("feature_names") = std::vector<std::string>{}, py::arg("model") = "gbt",
      py::arg("inspector") = "logistic", py::arg("seed") = 0, py::arg("bootstrap_runs") = 30,
      py::arg("drivers") = true);

  m.def(
      "power",
      [](const std::vector<double>& mu, std::size_t n, std::size_t runs, std::uint64_t seed, double alpha) {
        std::vector<PowerPoint> pts;
        {
          py::gil_scoped_release release;
          pts = power_study(mu.empty() ? default_power_grid() : mu, n, runs, seed, alpha);
        }
        py::list out;
        for (const auto& p : pts) {
          py::dict row;
          row["mu"] = p.mu;
          row["power_auc"] = p.power_auc;
          row["power_accuracy"] = p.power_accuracy;
          row["runs"] = p.runs;
          row["n"] = p.n;
          out.append(row);
        }
        return out;
      },
      py::arg("mu") = std::vector<double>{}, py::arg("n") = 1000, py::arg("runs") = 500, py::arg("seed") = 0,
      py::arg("alpha") = 0.05);

  m.def(
      "counterexamples",
      [](std::uint64_t seed, std::size_t n) {
        py::list out;
        for (const auto& r : counterexample_suite(seed, n)) {
          py::dict row;
          row["name"] = r.name;
          row["passed"] = r.passed;
          row["checks"] = r.checks;
          row["details"] = to_python(r.details);
          out.append(row);
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("n") = 10000);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
