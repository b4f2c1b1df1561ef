#include "szkp/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace szkp {
namespace {

struct Run {
  int rc;
  std::string out, log;
};

Run run(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"szkp"};
  argv.insert(argv.end(), args);
  std::ostringstream out, log;
  int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, log);
  return {rc, out.str(), log.str()};
}

TEST(Cli, CheckToyPassesAndFaultIsCaught) {
  auto ok = run({"check", "--curve", "toy", "--samples", "50"});
  EXPECT_EQ(ok.rc, 0) << ok.log;
  auto bad = run({"check", "--curve", "toy", "--samples", "50", "--inject-fault"});
  EXPECT_EQ(bad.rc, 1) << bad.log;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).rc, 2);
  EXPECT_EQ(run({"frobnicate"}).rc, 2);
  EXPECT_EQ(run({"check", "--curve", "secp256k1"}).rc, 2);
  auto r = run({"prove", "--curve", "toy", "--n", "1000"});
  EXPECT_EQ(r.rc, 2);
  EXPECT_NE(r.log.find("power of two"), std::string::npos);
  EXPECT_EQ(run({"prove", "--workload", "Zcash"}).rc, 2);
  EXPECT_EQ(run({"prove", "--design", "4,8,4096"}).rc, 2);
  EXPECT_EQ(run({"util-sweep", "--policies", "FIFO"}).rc, 2);
}

TEST(Cli, UtilSweepIsDeterministic) {
  auto a = run({"util-sweep", "--seeds", "1", "--n", "4096", "--w-min", "5", "--w-max", "6"});
  auto b = run({"util-sweep", "--seeds", "1", "--n", "4096", "--w-min", "5", "--w-max", "6"});
  ASSERT_EQ(a.rc, 0) << a.log;
  EXPECT_EQ(a.out, b.out);
  auto t = CsvTable::parse(a.out);
  EXPECT_EQ(t.kind, "util-sweep");
  ASSERT_FALSE(t.rows.empty());
  for (const auto& row : t.rows) {
    double u = std::stod(row[t.column("utilization")]);
    EXPECT_GT(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Cli, ProveToyVerifies) {
  auto r = run({"prove", "--curve", "toy", "--n", "16", "--verify"});
  ASSERT_EQ(r.rc, 0) << r.log;
  auto t = CsvTable::parse(r.out);
  EXPECT_EQ(t.kind, "breakdown");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_GT(std::stod(t.rows[0][t.column("total")]), 0.0);
}

TEST(Cli, ZeroWitnessGivesIdentityProof) {
  auto r = run({"prove", "--curve", "toy", "--n", "16", "--zero-witness"});
  ASSERT_EQ(r.rc, 0) << r.log;
  EXPECT_NE(r.log.find("proof.G1 = O"), std::string::npos);
  EXPECT_NE(r.log.find("proof.G2 = O"), std::string::npos);
}

TEST(Cli, SingletonSpaceGivesOneRow) {
  auto p = std::filesystem::temp_directory_path() / "szkp_cli_space.params";
  {
    std::ofstream f(p);
    f << "k_m = 4\nw = 8\nppw = 4096\nii = 1\nk_n = 4\nu = 16\nsp_g1_k_m = 1\nsp_g1_ii = 4\ntopology = separate-G1\n";
  }
  auto ps = p.string();
  auto a = run({"dse", "--n", "1024", "--space", ps.c_str()});
  auto b = run({"dse", "--n", "1024", "--space", ps.c_str()});
  std::filesystem::remove(p);
  ASSERT_EQ(a.rc, 0) << a.log;
  EXPECT_EQ(a.out, b.out);
  auto t = CsvTable::parse(a.out);
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Cli, MissingSpaceFileIsAnError) {
  EXPECT_NE(run({"dse", "--space", "/nonexistent/space.params"}).rc, 0);
}

TEST(Cli, BandwidthIsNormalizedToUnconstrained) {
  auto r = run({"bandwidth", "--n", "1024"});
  ASSERT_EQ(r.rc, 0) << r.log;
  auto t = CsvTable::parse(r.out);
  ASSERT_GE(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][t.column("tech")], "unconstrained");
  EXPECT_EQ(std::stod(t.rows[0][t.column("normalized")]), 1.0);
  for (const auto& row : t.rows) EXPECT_GE(std::stod(row[t.column("normalized")]), 1.0);
}

TEST(Cli, OutFileMatchesStdout) {
  auto p = std::filesystem::temp_directory_path() / "szkp_cli_out.csv";
  auto ps = p.string();
  auto a = run({"bandwidth", "--n", "1024"});
  auto b = run({"bandwidth", "--n", "1024", "--out", ps.c_str()});
  ASSERT_EQ(b.rc, 0) << b.log;
  EXPECT_TRUE(b.out.empty());
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  std::filesystem::remove(p);
  EXPECT_EQ(ss.str(), a.out);
}

}  // namespace
}  // namespace szkp
