#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "onephase/cli.hpp"
#include "onephase/registry.hpp"

using namespace onephase;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class ScratchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("onephase_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    setenv("ONEPHASE_LOG", "summary", 1);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST(ExitCodeFor, MapsEveryStatus) {
  EXPECT_EQ(exit_code_for(Status::Optimal), 0);
  EXPECT_EQ(exit_code_for(Status::PrimalInfeasible), 1);
  EXPECT_EQ(exit_code_for(Status::Unbounded), 2);
  EXPECT_EQ(exit_code_for(Status::IterationLimit), 3);
  EXPECT_EQ(exit_code_for(Status::TimeLimit), 3);
  EXPECT_EQ(exit_code_for(Status::MaxDelta), 4);
  EXPECT_EQ(exit_code_for(Status::EvaluationError), 4);
}

TEST(RunCli, ListPrintsRegistry) {
  const CliRun r = run({"--list"});
  EXPECT_EQ(r.code, 0);
  for (const BuiltinProblem& b : builtin_registry()) {
    EXPECT_NE(r.out.find(b.name), std::string::npos) << b.name;
  }
}

TEST(RunCli, SolvesWachterExample) {
  setenv("ONEPHASE_LOG", "summary", 1);
  const CliRun r = run({"solve", "builtin:wachter"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("optimal"), std::string::npos) << r.out;
}

TEST(RunCli, InfeasibleBoxExitsOne) {
  EXPECT_EQ(run({"solve", "builtin:infeasible-box"}).code, 1);
}

TEST(RunCli, IterationLimitExitsThree) {
  EXPECT_EQ(run({"solve", "builtin:hs071", "--max-iter", "2"}).code, 3);
}

TEST(RunCli, UsageErrorsExitFive) {
  EXPECT_EQ(run({"solve"}).code, 5);
  EXPECT_EQ(run({"solve", "builtin:no-such-problem"}).code, 5);
  EXPECT_EQ(run({"solve", "builtin:wachter", "--tol", "-1"}).code, 5);
  EXPECT_EQ(run({"frobnicate"}).code, 5);
  EXPECT_EQ(run({}).code, 5);
}

TEST(RunCli, QuietLogPrintsNothing) {
  setenv("ONEPHASE_LOG", "quiet", 1);
  const CliRun r = run({"solve", "builtin:qp-simple"});
  setenv("ONEPHASE_LOG", "summary", 1);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty()) << r.out;
}

TEST_F(ScratchDir, TraceCsvHasVersionHeaderAndOneRowPerIteration) {
  const fs::path trace = dir_ / "trace.csv";
  const CliRun r = run({"solve", "builtin:qp-box", "--trace", trace.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(trace);
  ASSERT_GE(lines.size(), 2u);
  EXPECT_EQ(lines[0], "# onephase-trace v1");
  EXPECT_EQ(lines[1].rfind("iteration,outer,inner,kind,", 0), 0u);

  const auto b = find_builtin("qp-box");
  ASSERT_TRUE(b);
  const SolveResult direct =
      solve(to_inequality_form(b->problem).problem, b->problem.start, SolverOptions{});
  EXPECT_EQ(lines.size() - 2, static_cast<std::size_t>(direct.iterations));
}

TEST_F(ScratchDir, SolvesProblemFile) {
  const fs::path f = write("lp.qp", "variables 1\n[objective]\nlinear 1\n[constraints]\n1 >= 1\n");
  const CliRun r = run({"solve", f.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const fs::path bad = write("bad.qp", "variables 1\n[oops]\n");
  EXPECT_EQ(run({"solve", bad.string()}).code, 5);
}

TEST_F(ScratchDir, BatchWritesOneRowPerFileIncludingParseErrors) {
  write("a.qp", "variables 1\n[objective]\nlinear 1\n[constraints]\n1 >= 1\n");
  write("b.qp", "variables 1\n[constraints]\n1 <= -1\n1 >= 1\n");
  write("c.qp", "variables 1\n[objective]\nlinear 1 2\n");
  const fs::path summary = dir_ / "summary" / "out.csv";
  fs::create_directories(summary.parent_path());
  const CliRun r = run({"batch", dir_.string(), "--summary", summary.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = lines_of(summary);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[1].rfind("a.qp,", 0), 0u);
  EXPECT_NE(lines[1].find(",optimal,0,"), std::string::npos) << lines[1];
  EXPECT_NE(lines[2].find(",primal_infeasible,1,"), std::string::npos) << lines[2];
  EXPECT_NE(lines[3].find(",parse_error,5,"), std::string::npos) << lines[3];
}

TEST_F(ScratchDir, SerializedRegistryFilesReproduceStatuses) {
  for (const BuiltinProblem& b : builtin_registry()) {
    if (!b.file) continue;
    const fs::path f = write(b.name + ".qp", serialize_problem_file(*b.file));
    const int from_file = run({"solve", f.string()}).code;
    const int from_builtin = run({"solve", "builtin:" + b.name}).code;
    EXPECT_EQ(from_file, from_builtin) << b.name;
  }
}
