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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "etaudit/cli.hpp"

using namespace etaudit;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("etaudit_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(call({"audit", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(call({}).code, kExitUsage);
  EXPECT_EQ(call({"--help"}).code, kExitOk);
  const auto missing = call({"audit", "--data", "/nonexistent.csv", "--target", "y", "--protected", "z", "--out",
                             tmp("never.json")});
  EXPECT_EQ(missing.code, kExitData);
  EXPECT_FALSE(missing.err.empty());
  EXPECT_EQ(call({"power", "--runs", "10", "--out", tmp("p.csv")}).code, kExitUsage);
}

TEST(Cli, GenerateAuditReport) {
  const auto csv = tmp("gen.csv");
  ASSERT_EQ(call({"generate", "--kind", "indirect", "--n", "3000", "--gamma", "0.9", "--out", csv}).code, kExitOk);
  ASSERT_TRUE(std::filesystem::exists(csv + ".json"));
  const auto side = nlohmann::json::parse(slurp(csv + ".json"));
  EXPECT_EQ(side.at("spec").at("gamma"), 0.9);

  const auto report = tmp("report.json");
  const std::vector<std::string> audit{"audit",   "--data",           csv,          "--target", "y",
                                       "--protected", "z",            "--model",    "logistic", "--bootstrap-runs",
                                       "3",       "--baseline-runs",  "5",          "--out",    report};
  const auto a = call(audit);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto doc = nlohmann::json::parse(slurp(report));
  ASSERT_EQ(doc.at("reports").size(), 1u);
  EXPECT_EQ(doc.at("schema_version"), 1);
  const auto features = doc.at("reports")[0].at("feature_names");
  EXPECT_EQ(features.size(), 3u);

  auto failing = audit;
  failing.push_back("--fail-on-violation");
  EXPECT_EQ(call(failing).code, kExitViolation);

  const auto md = call({"report", "--in", report});
  ASSERT_EQ(md.code, kExitOk);
  EXPECT_NE(md.out.find("# Equal treatment audit"), std::string::npos);
  const auto flat = call({"report", "--in", report, "--format", "csv"});
  EXPECT_EQ(flat.code, kExitOk);
}

TEST(Cli, PowerCsvHeader) {
  const auto out = tmp("power.csv");
  ASSERT_EQ(call({"power", "--runs", "100", "--n", "100", "--mu", "0,0.2", "--out", out}).code, kExitOk);
  const auto text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "mu,power_auc,power_accuracy,runs,n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Cli, BadPairIsUsageOrData) {
  const auto csv = tmp("pair.csv");
  ASSERT_EQ(call({"generate", "--kind", "indirect", "--n", "500", "--out", csv}).code, kExitOk);
  const auto r = call({"audit", "--data", csv, "--target", "y", "--protected", "z", "--pair", "0:7", "--out",
                       tmp("pair.json")});
  EXPECT_NE(r.code, kExitOk);
}
