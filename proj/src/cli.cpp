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

#include "etaudit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "etaudit/data.hpp"
#include "etaudit/inspector.hpp"
#include "etaudit/stats.hpp"
#include "etaudit/synthetic.hpp"

namespace etaudit {

namespace {

struct DataFlags {
  std::string path;
  std::string target;
  std::string protected_column;
  std::vector<std::string> drop;
  std::vector<std::string> categorical;
  std::string pair = "all";
};

struct ConfigFlags {
  std::string model = "gbt";
  std::string inspector = "logistic";
  std::string shap = "exact";
  bool explain_probability = false;
  std::size_t permutations = 200;
  std::size_t n_trees = 100;
  int depth = 3;
  double learning_rate = 0.1;
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double confidence = 0.95;
  std::size_t bootstrap_runs = 30;
  std::size_t background_cap = 512;
  std::size_t baseline_runs = 30;
  bool include_protected = false;
  bool no_drivers = false;
  std::vector<double> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool need_target) {
  cmd->add_option("--data", f.path, "Input CSV")->required();
  auto* t = cmd->add_option("--target", f.target, "Target column");
  if (need_target) t->required();
  cmd->add_option("--protected", f.protected_column, "Protected-group column")->required();
  cmd->add_option("--drop", f.drop, "Columns to ignore")->delimiter(',');
  cmd->add_option("--categorical", f.categorical, "Label-encoded feature columns")->delimiter(',');
  cmd->add_option("--pair", f.pair, "Group pair A:B, or 'all'");
}

void add_config_flags(CLI::App* cmd, ConfigFlags& c) {
  cmd->add_option("--model", c.model, "Audited learner: logistic, linear, tree, tree-regression, gbt, gbt-squared");
  cmd->add_option("--inspector", c.inspector, "Inspector learner: logistic, tree, gbt");
  cmd->add_option("--shap", c.shap, "Explanation variant: exact, montecarlo, observational");
  cmd->add_flag("--explain-probability", c.explain_probability, "Explain probabilities instead of margins");
  cmd->add_option("--permutations", c.permutations, "Monte Carlo permutations per row")->check(CLI::PositiveNumber);
  cmd->add_option("--n-trees", c.n_trees, "Trees for gbt learners")->check(CLI::PositiveNumber);
  cmd->add_option("--depth", c.depth, "Depth for tree and gbt learners")->check(CLI::PositiveNumber);
  cmd->add_option("--learning-rate", c.learning_rate, "Learning rate for gbt learners");
  cmd->add_option("--l2", c.l2, "Ridge penalty for linear learners");
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--alpha", c.alpha, "Significance level");
  cmd->add_option("--confidence", c.confidence, "Confidence level of AUC intervals");
  cmd->add_option("--bootstrap-runs", c.bootstrap_runs, "Bootstrap re-splits of the inspector data")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--background-cap", c.background_cap, "Maximum background rows")->check(CLI::PositiveNumber);
  cmd->add_option("--baseline-runs", c.baseline_runs, "Random-group runs for driver attribution")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--split", c.fractions, "Train,val,test fractions")->delimiter(',')->expected(3);
  cmd->add_flag("--include-protected", c.include_protected, "Feed the protected column to the model");
  cmd->add_flag("--no-drivers", c.no_drivers, "Skip driver attribution");
}

LearnerSpec learner(const std::string& name, const ConfigFlags& c) {
  LearnerSpec s = LearnerSpec::parse(name);
  s.n_trees = c.n_trees;
  s.max_depth = c.depth;
  s.learning_rate = c.learning_rate;
  s.l2 = c.l2;
  return s;
}

AuditConfig make_config(const ConfigFlags& c) {
  AuditConfig cfg;
  cfg.model_spec = learner(c.model, c);
  cfg.inspector_spec = learner(c.inspector, c);
  cfg.inspector_spec.l2 = 1e-6;
  cfg.shap.variant = parse_shap_variant(c.shap);
  cfg.shap.probability = c.explain_probability;
  cfg.shap.n_permutations = c.permutations;
  cfg.shap.seed = c.seed;
  cfg.split.seed = c.seed;
  std::copy(c.fractions.begin(), c.fractions.end(), cfg.split.fractions.begin());
  cfg.alpha = c.alpha;
  cfg.confidence = c.confidence;
  cfg.bootstrap_runs = c.bootstrap_runs;
  cfg.background_cap = c.background_cap;
  cfg.n_baseline_runs = c.baseline_runs;
  cfg.include_protected = c.include_protected;
  cfg.drivers = !c.no_drivers;
  cfg.validate();
  return cfg;
}

TabularDataset load_data(const DataFlags& f, std::ostream& err) {
  CsvSchema schema;
  if (!f.target.empty()) schema.target = f.target;
  schema.protected_column = f.protected_column;
  schema.drop = f.drop;
  schema.categorical = f.categorical;
  const std::string sidecar = f.path + ".json";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("auxiliary_columns")) {
      for (const auto& c : j.at("auxiliary_columns")) {
        const auto name = c.get<std::string>();
        if (name != f.target && std::find(schema.drop.begin(), schema.drop.end(), name) == schema.drop.end()) {
          schema.drop.push_back(name);
          err << "[etaudit] dropping auxiliary column '" << name << "' listed in " << sidecar << "\n";
        }
      }
    }
  }
  return load_csv(f.path, schema);
}

std::vector<GroupPair> resolve_pairs(const TabularDataset& data, const std::string& pair) {
  if (pair == "all") {
    auto pairs = all_group_pairs(data);
    if (pairs.empty()) throw DataError("protected column has fewer than two groups");
    return pairs;
  }
  return {GroupPair::parse(pair)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

void write_sidecar(const std::string& path, const std::string& command, std::uint64_t seed,
                   const nlohmann::json& config) {
  const nlohmann::json j = {{"tool", "etaudit"}, {"version", kVersion}, {"command", command},
                            {"seed", seed}, {"config", config}};
  write_text(path + ".json", j.dump(2) + "\n");
}

void log_config(std::ostream& err, const std::string& command, const nlohmann::json& config) {
  err << "[etaudit " << kVersion << "] " << command << " resolved config: " << config.dump() << "\n";
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equal treatment auditing of predictive models", "etaudit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset");
  ScenarioSpec gspec;
  std::string gkind = "indirect", gout;
  gen->add_option("--kind", gkind, "Scenario kind");
  gen->add_option("--n", gspec.n, "Rows")->check(CLI::PositiveNumber);
  gen->add_option("--gamma", gspec.gamma, "Correlation parameter");
  gen->add_option("--mu", gspec.mu, "Mean shift (power_gaussians)");
  gen->add_option("--seed", gspec.seed, "Seed");
  gen->add_option("--out", gout, "Output CSV")->required();

  // audit
  auto* aud = app.add_subcommand("audit", "Equal treatment audit of a CSV dataset");
  DataFlags adata;
  ConfigFlags acfg;
  std::string aout, acsv;
  bool fail_on_violation = false;
  add_data_flags(aud, adata, true);
  add_config_flags(aud, acfg);
  aud->add_option("--out", aout, "Report JSON")->required();
  aud->add_option("--csv", acsv, "Flat CSV summary");
  aud->add_flag("--fail-on-violation", fail_on_violation, "Exit 3 when equal treatment is rejected");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Gamma sweep on a scenario, or learner grid on a dataset");
  DataFlags sdata;
  ConfigFlags scfg;
  std::string skind, sout;
  std::vector<double> gammas{0.0, 0.2, 0.4, 0.6, 0.8, 0.99};
  std::size_t sn = 10000;
  std::vector<std::string> smodels{"tree", "gbt"}, sinspectors{"logistic"};
  std::vector<int> sdepths;
  std::vector<std::size_t> sestimators;
  swp->add_option("--kind", skind, "Scenario kind for a gamma sweep");
  swp->add_option("--gammas", gammas, "Gamma grid")->delimiter(',');
  swp->add_option("--n", sn, "Rows per generated dataset")->check(CLI::PositiveNumber);
  swp->add_option("--data", sdata.path, "Input CSV for a learner grid");
  swp->add_option("--target", sdata.target, "Target column");
  swp->add_option("--protected", sdata.protected_column, "Protected-group column");
  swp->add_option("--drop", sdata.drop, "Columns to ignore")->delimiter(',');
  swp->add_option("--categorical", sdata.categorical, "Label-encoded feature columns")->delimiter(',');
  swp->add_option("--pair", sdata.pair, "Group pair A:B");
  swp->add_option("--models", smodels, "Model learners")->delimiter(',');
  swp->add_option("--inspectors", sinspectors, "Inspector learners")->delimiter(',');
  swp->add_option("--depths", sdepths, "Depth grid for tree and gbt models")->delimiter(',');
  swp->add_option("--estimators", sestimators, "Tree-count grid for gbt models")->delimiter(',');
  add_config_flags(swp, scfg);
  swp->add_option("--out", sout, "Output CSV")->required();

  // power
  auto* pow = app.add_subcommand("power", "Power of the AUC and accuracy two-sample tests");
  std::size_t pruns = 500, pn = 1000;
  std::uint64_t pseed = 0;
  double palpha = 0.05;
  std::vector<double> pmu;
  std::string pout;
  pow->add_option("--runs", pruns, "Runs per mu (>= 100)");
  pow->add_option("--n", pn, "Rows per run")->check(CLI::PositiveNumber);
  pow->add_option("--seed", pseed, "Seed");
  pow->add_option("--alpha", palpha, "Significance level");
  pow->add_option("--mu", pmu, "Mu grid (default 0.005..0.1)")->delimiter(',');
  pow->add_option("--out", pout, "Output CSV")->required();

  // counterexamples
  auto* cex = app.add_subcommand("counterexamples", "Reproduce the three independence counterexamples");
  std::uint64_t cseed = 0;
  std::size_t cn = 10000;
  std::string cout_path;
  bool cfail = false;
  cex->add_option("--seed", cseed, "Seed");
  cex->add_option("--n", cn, "Rows per construction")->check(CLI::Range(100, 100000000));
  cex->add_option("--out", cout_path, "Details JSON");
  cex->add_flag("--fail-on-violation", cfail, "Exit 3 when a construction does not reproduce");

  // report
  auto* rep = app.add_subcommand("report", "Render a report JSON");
  std::string rin, rformat = "md", rout;
  rep->add_option("--in", rin, "Report JSON")->required();
  rep->add_option("--format", rformat, "md or csv")->check(CLI::IsMember({"md", "csv"}));
  rep->add_option("--out", rout, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      gspec.kind = parse_scenario_kind(gkind);
      log_config(err, "generate", gspec.to_json());
      const TabularDataset data = generate(gspec);
      save_csv(data, gout);
      write_text(gout + ".json", scenario_sidecar(gspec, data).dump(2) + "\n");
      out << "wrote " << data.n_rows() << " rows to " << gout << "\n";
      return kExitOk;
    }

    if (*aud) {
      const AuditConfig cfg = make_config(acfg);
      nlohmann::json resolved = cfg.to_json();
      resolved["data"] = adata.path;
      resolved["target"] = adata.target;
      resolved["protected"] = adata.protected_column;
      resolved["drop"] = adata.drop;
      resolved["categorical"] = adata.categorical;
      resolved["pair"] = adata.pair;
      log_config(err, "audit", resolved);
      const TabularDataset data = load_data(adata, err);
      const auto pairs = resolve_pairs(data, adata.pair);
      std::vector<AuditReport> reports;
      nlohmann::json docs = nlohmann::json::array();
      bool violation = false;
      for (const auto& pair : pairs) {
        AuditReport r = equal_treatment_audit(data, pair, cfg);
        violation = violation || r.et.rejects(cfg.alpha);
        out << pair.str() << ": et auc=" << fixed(r.et.auc) << " p=" << std::setprecision(4) << r.et.p_value
            << " | dp auc=" << fixed(r.dp.auc) << " | input auc=" << fixed(r.input.auc)
            << " | combined auc=" << fixed(r.combined.auc) << (r.et.rejects(cfg.alpha) ? "  UNEQUAL TREATMENT" : "")
            << "\n";
        docs.push_back(report_to_json(r));
        reports.push_back(std::move(r));
      }
      const nlohmann::json doc = {{"schema_version", kReportSchemaVersion},
                                  {"tool", "etaudit"},
                                  {"version", kVersion},
                                  {"seed", acfg.seed},
                                  {"config", resolved},
                                  {"reports", docs}};
      write_text(aout, doc.dump(2) + "\n");
      if (!acsv.empty()) write_text(acsv, reports_to_csv(reports));
      if (fail_on_violation && violation) return kExitViolation;
      return kExitOk;
    }

    if (*swp) {
      const AuditConfig cfg = make_config(scfg);
      if (!skind.empty()) {
        if (!sdata.path.empty()) throw UsageError("sweep takes either --kind or --data, not both");
        nlohmann::json resolved = cfg.to_json();
        resolved["kind"] = skind;
        resolved["gammas"] = gammas;
        resolved["n"] = sn;
        log_config(err, "sweep", resolved);
        const auto points = gamma_sweep(parse_scenario_kind(skind), gammas, sn, scfg.seed, cfg);
        write_gamma_csv(points, sout);
        write_sidecar(sout, "sweep", scfg.seed, resolved);
        for (const auto& p : points) {
          out << "gamma=" << p.gamma << " et=" << fixed(p.report.et.auc) << " dp=" << fixed(p.report.dp.auc)
              << " input=" << fixed(p.report.input.auc) << " combined=" << fixed(p.report.combined.auc) << "\n";
        }
        return kExitOk;
      }
      if (sdata.path.empty()) throw UsageError("sweep needs --kind or --data");
      if (sdata.target.empty() || sdata.protected_column.empty()) {
        throw UsageError("sweep --data needs --target and --protected");
      }
      std::vector<LearnerSpec> models;
      for (const auto& name : smodels) {
        LearnerSpec base = learner(name, scfg);
        const std::vector<int> depths = sdepths.empty() ? std::vector<int>{base.max_depth} : sdepths;
        if (base.kind == LearnerSpec::Kind::linear) {
          models.push_back(base);
          continue;
        }
        for (int d : depths) {
          base.max_depth = d;
          if (base.kind == LearnerSpec::Kind::gbt) {
            const auto counts = sestimators.empty() ? std::vector<std::size_t>{base.n_trees} : sestimators;
            for (auto k : counts) {
              base.n_trees = k;
              models.push_back(base);
            }
          } else {
            models.push_back(base);
          }
        }
      }
      std::vector<LearnerSpec> inspectors;
      for (const auto& name : sinspectors) inspectors.push_back(learner(name, scfg));
      nlohmann::json resolved = cfg.to_json();
      resolved["data"] = sdata.path;
      resolved["pair"] = sdata.pair;
      resolved["models"] = nlohmann::json::array();
      for (const auto& m : models) resolved["models"].push_back(m.to_json());
      resolved["inspectors"] = nlohmann::json::array();
      for (const auto& g : inspectors) resolved["inspectors"].push_back(g.to_json());
      log_config(err, "sweep", resolved);
      const TabularDataset data = load_data(sdata, err);
      const auto pairs = resolve_pairs(data, sdata.pair);
      if (pairs.size() != 1) throw UsageError("sweep --data needs a single --pair A:B");
      const auto cells = sweep(data, pairs.front(), models, inspectors, cfg);
      write_sweep_csv(cells, sout);
      write_sidecar(sout, "sweep", scfg.seed, resolved);
      for (const auto& c : cells) {
        out << c.model << " / " << c.inspector << ": "
            << (c.error.empty() ? "et auc=" + fixed(c.et_auc) : "error: " + c.error) << "\n";
      }
      return kExitOk;
    }

    if (*pow) {
      const std::vector<double> grid = pmu.empty() ? default_power_grid() : pmu;
      const nlohmann::json resolved = {{"runs", pruns}, {"n", pn}, {"seed", pseed}, {"alpha", palpha},
                                       {"mu", grid}, {"classifier", LearnerSpec::logistic().to_json()}};
      log_config(err, "power", resolved);
      const auto points = power_study(grid, pn, pruns, pseed, palpha);
      write_power_csv(points, pout);
      write_sidecar(pout, "power", pseed, resolved);
      for (const auto& p : points) {
        out << "mu=" << p.mu << " power_auc=" << fixed(p.power_auc, 3) << " power_accuracy="
            << fixed(p.power_accuracy, 3) << "\n";
      }
      return kExitOk;
    }

    if (*cex) {
      log_config(err, "counterexamples", {{"seed", cseed}, {"n", cn}});
      const auto results = counterexample_suite(cseed, cn);
      nlohmann::json doc = {{"tool", "etaudit"}, {"version", kVersion}, {"seed", cseed}, {"n", cn},
                            {"results", nlohmann::json::array()}};
      bool all = true;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << "\n";
        for (const auto& c : r.checks) out << "  " << c << "\n";
        all = all && r.passed;
        doc["results"].push_back({{"name", r.name}, {"passed", r.passed}, {"checks", r.checks}, {"details", r.details}});
      }
      if (!cout_path.empty()) write_text(cout_path, doc.dump(2) + "\n");
      if (cfail && !all) return kExitViolation;
      return kExitOk;
    }

    if (*rep) {
      std::ifstream in(rin);
      if (!in) throw DataError("cannot open report '" + rin + "'");
      const auto doc = nlohmann::json::parse(in, nullptr, false);
      if (doc.is_discarded()) throw DataError("report '" + rin + "' is not valid JSON");
      std::string text;
      if (rformat == "md") {
        text = render_markdown(doc);
      } else {
        std::vector<AuditReport> reports;
        if (doc.contains("reports")) {
          for (const auto& r : doc.at("reports")) reports.push_back(report_from_json(r));
        } else {
          reports.push_back(report_from_json(doc));
        }
        text = reports_to_csv(reports);
      }
      if (rout.empty()) out << text;
      else write_text(rout, text);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "etaudit: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "etaudit: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "etaudit: data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "etaudit: error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace etaudit
