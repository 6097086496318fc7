#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsatlab/qsatlab.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(QSATLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qsatlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenThenSolve) {
  const auto inst = path("inst.json");
  ASSERT_EQ(run("gen --n 12 --k 2 --alpha 0.75 --r 1 --seed 7 --out " + inst).code, 0);
  const auto j = qsat::read_json_file(inst);
  EXPECT_EQ(j.at("config").at("seed"), 7);
  const auto solved = run("solve --in " + inst);
  ASSERT_EQ(solved.code, 0);
  const auto report = qsat::parse_json_text(solved.out);
  EXPECT_TRUE(report.at("result").contains("D"));
  const auto direct = qsat::kernel_dimension(qsat::instance_from_json(j)).dimension;
  EXPECT_EQ(report.at("result").at("D").get<std::uint64_t>(), direct);
  EXPECT_EQ(run("solve --in " + inst).out, solved.out);
}

TEST_F(Cli, ScanWritesTwelveRows) {
  const auto csv = path("scan.csv");
  ASSERT_EQ(run("scan --k 2 --n 14 --alpha 0.1:1.2:0.1 --trials 20 --seed 1 --no-energy --out " +
                csv)
                .code,
            0);
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# qsatlab scan ", 0), 0u);
  std::getline(lines, line);
  EXPECT_EQ(line, qsat::kScanColumns);
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 12u);
}

TEST_F(Cli, BoundsTable) {
  const auto r = run("bounds --k 3 --r 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.1667"), std::string::npos);
  EXPECT_NE(r.out.find("0.81"), std::string::npos);
  EXPECT_NE(r.out.find("5.1909"), std::string::npos);
}

TEST_F(Cli, InputErrorsExitOne) {
  EXPECT_EQ(run("solve --in " + path("missing.json")).code, 1);
  EXPECT_EQ(run("gen --n 4 --k 2 --alpha 0.5 --bogus").code, 1);
  EXPECT_EQ(run("scan --k 2 --n 8 --alpha 1:0:0.1").code, 1);
  std::ofstream(path("bad.json")) << "{\"n\": 3}";
  EXPECT_EQ(run("solve --in " + path("bad.json")).code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, DegeneracyExitsTwo) {
  const auto inst = qsat::classical_diagonal_instance(qsat::Hypergraph(2, 2, {{0, 1}}), {"10"});
  qsat::write_json_file(path("deg.json"), qsat::to_json(inst));
  EXPECT_EQ(run("product-state --in " + path("deg.json")).code, 2);
}

TEST_F(Cli, OutputIndependentOfThreadCount) {
  const std::string base = "scan --k 2 --n 10 --alpha 0.2:1.0:0.2 --trials 30 --seed 5";
  const auto one = run(base + " --threads 1");
  const auto three = run(base + " --threads 3");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, three.out);
  const auto g1 = run("gen --n 20 --k 3 --alpha 0.8 --seed 11");
  const auto g2 = run("gen --n 20 --k 3 --alpha 0.8 --seed 11");
  EXPECT_EQ(g1.out, g2.out);
  const auto c1 = run("census --n 40 --alpha 1 --L 6 --d 2 --trials 50 --seed 3 --threads 1");
  const auto c3 = run("census --n 40 --alpha 1 --L 6 --d 2 --trials 50 --seed 3 --threads 3");
  EXPECT_EQ(c1.out, c3.out);
}

TEST_F(Cli, SeedIsRecordedWhenOmitted) {
  const auto r = run("gen --n 6 --k 2 --alpha 0.5");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(qsat::parse_json_text(r.out).at("config").at("seed").is_number_unsigned());
}
