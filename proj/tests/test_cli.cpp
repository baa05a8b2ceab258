// Copyright 2026 The OptiGraph Authors
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


#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "optigraph/cli.hpp"
#include "optigraph/io.hpp"
#include "optigraph/partition.hpp"

namespace optigraph {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("optigraph_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "optigraph");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli_main(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  double objective(const std::string& solution) {
    const std::string text = read_text(path(solution));
    const auto at = text.find("\"objective\": ") + 13;
    return std::stod(text.substr(at));
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, BuildDynamic) {
  ASSERT_EQ(run({"build", "dynamic", "--T", "100", "-o", path("m.json")}), kExitOk) << err_.str();
  EXPECT_EQ(read_model(path("m.json"))->all_nodes().size(), 199u);
}

TEST_F(Cli, SchwarzTraceMeetsTolerance) {
  ASSERT_EQ(run({"build", "dynamic", "--T", "100", "-o", path("m.json")}), kExitOk);
  ASSERT_EQ(run({"solve", path("m.json"), "--method", "schwarz", "--parts", "8", "--overlap", "2", "--tol", "1e-6",
                 "--max-iter", "100", "--trace", path("t.csv"), "-o", path("s.json")}),
            kExitOk)
      << err_.str();
  std::istringstream trace(read_text(path("t.csv")));
  std::string line, last;
  std::getline(trace, line);
  EXPECT_EQ(line, "iter,r_pr,r_du,seconds");
  while (std::getline(trace, line)) last = line;
  std::istringstream cells(last);
  std::string iter, rpr, rdu;
  std::getline(cells, iter, ',');
  std::getline(cells, rpr, ',');
  std::getline(cells, rdu, ',');
  EXPECT_LE(std::stod(rpr), 1e-6);
  EXPECT_LE(std::stod(rdu), 1e-6);
}

TEST_F(Cli, SchurSingleBlockEqualsMonolithic) {
  ASSERT_EQ(run({"build", "dynamic", "--T", "30", "-o", path("m.json")}), kExitOk);
  ASSERT_EQ(run({"solve", path("m.json"), "-o", path("a.json")}), kExitOk);
  ASSERT_EQ(run({"solve", path("m.json"), "--method", "schur", "--parts", "1", "-o", path("b.json")}), kExitOk)
      << err_.str();
  EXPECT_NEAR(objective("a.json"), objective("b.json"), 1e-9);
}

TEST_F(Cli, PartitionLabelsRoundTrip) {
  ASSERT_EQ(run({"build", "dcopf-grid", "--rows", "4", "--cols", "4", "-o", path("m.json")}), kExitOk);
  ASSERT_EQ(run({"partition", path("m.json"), "-k", "4", "--imbalance", "0.1", "--labels", path("p.part")}), kExitOk);
  const std::string report = out_.str();
  ASSERT_EQ(run({"partition", path("m.json"), "--from-labels", path("p.part"), "--labels", path("q.part"), "-o",
                 path("mp.json")}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(out_.str(), report);
  EXPECT_EQ(read_text(path("p.part")), read_text(path("q.part")));
  EXPECT_EQ(read_model(path("mp.json"))->subgraphs().size(), 4u);
}

TEST_F(Cli, AggregateAndExport) {
  ASSERT_EQ(run({"build", "dynamic", "--T", "20", "-o", path("m.json")}), kExitOk);
  ASSERT_EQ(run({"partition", path("m.json"), "-k", "3", "-o", path("mp.json")}), kExitOk);
  ASSERT_EQ(run({"aggregate", path("mp.json"), "--levels", "0", "-o", path("a.json")}), kExitOk);
  EXPECT_EQ(read_model(path("a.json"))->all_nodes().size(), 3u);
  ASSERT_EQ(run({"export", path("mp.json"), "--format", "dot", "--color-partitions", "-o", path("g.dot")}), kExitOk);
  EXPECT_EQ(read_text(path("g.dot")).rfind("graph \"dynamic\" {", 0), 0u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"build", "dynamic", "--bogus", "-o", path("m.json")}), kExitUsage);
  EXPECT_NE(err_.str().find("Usage"), std::string::npos);
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"solve", path("missing.json"), "-o", path("s.json")}), kExitUsage);
  ASSERT_EQ(run({"build", "dynamic", "--T", "5", "-o", path("m.json")}), kExitOk);
  EXPECT_EQ(run({"solve", path("m.json"), "--trace", path("t.csv"), "-o", path("s.json")}), kExitUsage);
  EXPECT_EQ(run({"solve", path("m.json"), "--method", "newton", "-o", path("s.json")}), kExitUsage);
  write_text(path("bad.json"), "{");
  EXPECT_EQ(run({"solve", path("bad.json"), "-o", path("s.json")}), kExitUsage);
}

TEST_F(Cli, SolveFailureExitCode) {
  ASSERT_EQ(run({"build", "dynamic", "--T", "100", "-o", path("m.json")}), kExitOk);
  EXPECT_EQ(run({"solve", path("m.json"), "--method", "schwarz", "--parts", "8", "--overlap", "0", "--max-iter", "3",
                 "-o", path("s.json")}),
            kExitSolveFailure);
  EXPECT_NE(read_text(path("s.json")).find("iteration_limit"), std::string::npos);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "2", "4", "4"}) {
    ASSERT_EQ(run({"build", "dynamic", "--T", "100", "-o", path("m.json")}), kExitOk);
    ASSERT_EQ(run({"partition", path("m.json"), "-k", "8", "--labels", path("p.part"), "-o", path("mp.json")}), kExitOk);
    ASSERT_EQ(run({"solve", path("mp.json"), "--method", "schwarz", "--overlap", "2", "--threads", threads, "-o",
                   path("s.json")}),
              kExitOk);
    outputs.push_back(read_text(path("m.json")) + read_text(path("p.part")) + read_text(path("mp.json")) +
                      read_text(path("s.json")));
  }
  for (const auto& o : outputs) EXPECT_EQ(o, outputs.front());
}

TEST_F(Cli, BuildFromCsvTables) {
  write_text(path("buses.csv"), "bus,load,va_min,va_max,ref\na,0,-3.14,3.14,1\nb,1,-3.14,3.14,0\n");
  write_text(path("lines.csv"), "line,from,to,admittance,angle_limit\nl,a,b,1,inf\n");
  write_text(path("gens.csv"), "bus,c1,c2,pmin,pmax\na,1,0,0,inf\n");
  EXPECT_EQ(run({"build", "dcopf-csv", "-o", path("m.json")}), kExitUsage);
  ASSERT_EQ(run({"build", "dcopf-csv", "--network", dir_.string(), "--beta", "0", "-o", path("m.json")}), kExitOk)
      << err_.str();
  ASSERT_EQ(run({"solve", path("m.json"), "-o", path("s.json")}), kExitOk);
  EXPECT_NEAR(objective("s.json"), 1.0, 1e-7);
}

}  // namespace
}  // namespace optigraph
