#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Output {
  int code = -1;
  std::string out;
};

Output cli(const std::string& args) {
  const std::string cmd = std::string(SPARSETC_CLI) + " " + args + " 2>/dev/null";
  Output r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sparsetc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& f) const { return (dir_ / f).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run 'y(i) = A(i,j) *' -t A=rand:2x2").code, 3);
  EXPECT_EQ(cli("run 'y(i) = A(i,j) * x(j)' -t A=rand:2x3 -t x=rand:2").code, 5);
  EXPECT_EQ(cli("run 'y(i) = A(i,j) * x(j)' -t A=" + path("missing.mtx") + " -t x=rand:2").code, 4);
  EXPECT_EQ(cli("run 'y(i) = A(i,j)' -t A=rand:2x2").code, 0);
}

TEST_F(Cli, ExplainSpgemm) {
  const auto r = cli("explain 'C(i,k) = A(i,j) * B(j,k)' -t A=rand:6x6:0.3 -t B=rand:6x6:0.3 "
                     "-f A=csr -f B=csr -f C=csr");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schedule"]["loop_order"], nlohmann::json({"i", "j", "k"}));
  EXPECT_EQ(j["schedule"]["workspace"]["ws_indices"], nlohmann::json({"k"}));
}

TEST_F(Cli, DenseDispatch) {
  const auto r = cli("run 'C(i,k) = A(i,j) * B(j,k)' -t A=rand:3x3 -t B=rand:3x3 --emit-counters");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["path"], "dense-dispatch");
}

TEST_F(Cli, SpmvFromFile) {
  {
    std::ofstream a(path("A.mtx"));
    a << "%%MatrixMarket matrix coordinate real general\n2 3 3\n1 1 2.0\n1 3 -1.0\n2 2 4.0\n";
    std::ofstream x(path("x.mtx"));
    x << "%%MatrixMarket matrix coordinate real general\n3 1 3\n1 1 1.0\n2 1 2.0\n3 1 3.0\n";
  }
  const auto r = cli("run 'y(i,l) = A(i,j) * x(j,l)' -t A=" + path("A.mtx") + " -t x=" + path("x.mtx") +
                     " -f A=csr -f x=dense --explain-schedule --emit-counters");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["path"], "sparse");
  EXPECT_TRUE(j.contains("schedule"));
  EXPECT_EQ(j["counters"]["scalar_mults"], 3);
  EXPECT_EQ(j["result"]["values"], nlohmann::json({-1.0, 8.0}));
}

TEST_F(Cli, WritesMatrixMarket) {
  const auto r = cli("run 'C(i,j) = A(i,j) + B(i,j)' -t A=rand:5x4:0.3 -t B=rand:5x4:0.3 -f A=csr -f B=csr "
                     "--seed 3 --out " + path("C.mtx"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp(path("C.mtx")).rfind("%%MatrixMarket matrix coordinate real general\n5 4 ", 0), 0u);
}

TEST_F(Cli, GenIsReproducible) {
  ASSERT_EQ(cli("gen --rows 20 --cols 30 --density 0.1 --seed 5 --out " + path("a.mtx")).code, 0);
  ASSERT_EQ(cli("gen --rows 20 --cols 30 --density 0.1 --seed 5 --out " + path("b.mtx")).code, 0);
  EXPECT_EQ(slurp(path("a.mtx")), slurp(path("b.mtx")));
  EXPECT_EQ(cli("gen --rows 4 --cols 4 --density 0").out, "%%MatrixMarket matrix coordinate real general\n4 4 0\n");
}

TEST_F(Cli, Bench) {
  const auto r = cli("bench sddmm --synthetic 50x50:0.04 --reps 2 --warmup 0 --k 4");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["results"].size(), 1u);
  const auto& entry = j["results"][0];
  EXPECT_EQ(entry["nnz"], 100);
  EXPECT_EQ(entry["counters"]["scalar_mults"], 500);
  EXPECT_EQ(cli("bench spmv --synthetic 4x4:0.5 --reps 0").code, 2);
}
