#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ctbot/robot_model.hpp"
#include "support.hpp"

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ctbot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = ctbot::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<double> numbers(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> v;
  for (double x; in >> x;) v.push_back(x);
  return v;
}

std::string file_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"nonsense"}).code, 2);
  EXPECT_EQ(cli({"fk", "0", "0"}).code, 2);
  EXPECT_EQ(cli({"fk", "0", "0", "0", "0", "0", "0", "x"}).code, 2);
}

TEST(Cli, FkAtZeroMatchesOracle) {
  const CliRun r = cli({"fk", "--compact", "0", "0", "0", "0", "0", "0", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = numbers(r.out);
  ASSERT_EQ(v.size(), 12u);
  const Eigen::Matrix4d t = oracle::fk({});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(v[static_cast<std::size_t>(i)], t(i, 3), 1e-9);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(v[3 + static_cast<std::size_t>(i)], t(i / 3, i % 3), 1e-9);
}

TEST(Cli, FkOutOfLimitExitsTwo) {
  const CliRun r = cli({"fk", "9", "0", "0", "0", "0", "0", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("joint 1"), std::string::npos);
}

TEST(Cli, FkNegativeValues) {
  const CliRun r = cli({"fk", "--compact", "0.1", "0.2", "-0.5", "-0.3", "-1", "1", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(numbers(r.out).size(), 12u);
}

TEST(Cli, IkRoundTripFromFk) {
  const CliRun fk = cli({"fk", "--compact", "0.12", "0.2", "0.4", "-0.3", "0.5", "-0.7", "0.03"});
  ASSERT_EQ(fk.code, 0);
  std::string target = fk.out;
  target.pop_back();
  const CliRun ik = cli({"ik", "--target", target, "--q0", "0.1 0.18 0.35 -0.25 0.45 -0.65 0.03"});
  EXPECT_EQ(ik.code, 0) << ik.out << ik.err;
  EXPECT_NE(ik.out.find("converged: yes"), std::string::npos);
}

TEST(Cli, IkGarbageAndUnreachable) {
  EXPECT_EQ(cli({"ik", "--target", "1 2 three"}).code, 2);
  EXPECT_EQ(cli({"ik", "--target", "0 0 0 1 0 0 0 1 0 0 0 2"}).code, 2);
  const CliRun far = cli({"ik", "--target", "10 0 0 1 0 0 0 1 0 0 0 1"});
  EXPECT_EQ(far.code, 1);
  EXPECT_NE(far.out.find("residual:"), std::string::npos);
  EXPECT_NE(far.out.find("converged: no"), std::string::npos);
}

TEST(Cli, Statics) {
  const CliRun r = cli({"statics"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("joint4 1.28  joint5 0.64  joint6 0"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("0.0003758 deg/count"), std::string::npos);
  EXPECT_EQ(cli({"statics", "--force", "-1"}).code, 2);
  EXPECT_EQ(cli({"statics", "--force", "500"}).code, 1);
}

TEST(Cli, Model) {
  const CliRun r = cli({"model", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ctbot-robot-model/1"), std::string::npos);
  EXPECT_EQ(cli({"--model", "/nonexistent.json", "model"}).code, 1);
  EXPECT_EQ(cli({"model"}).code, 0);
}

TEST(Cli, WorkspaceIsDeterministic) {
  const auto a = testing_support::temp_path("ws_a.csv");
  const auto b = testing_support::temp_path("ws_b.csv");
  const CliRun ra = cli({"workspace", "--samples", "1000", "--seed", "7", "--out", a.string()});
  const CliRun rb = cli({"workspace", "--samples", "1000", "--seed", "7", "--out", b.string(), "--workers", "2"});
  ASSERT_EQ(ra.code, 0) << ra.err;
  ASSERT_EQ(rb.code, 0) << rb.err;
  EXPECT_EQ(file_text(a), file_text(b));
  EXPECT_EQ(file_text(a).rfind("x,y,z,count,percentage\n", 0), 0u);
  EXPECT_NE(ra.out.find("collision-free:"), std::string::npos);
  const CliRun stdout_csv = cli({"workspace", "--samples", "1000", "--seed", "7"});
  EXPECT_EQ(stdout_csv.out, file_text(a));
}

TEST(Cli, WorkspaceErrors) {
  EXPECT_EQ(cli({"workspace", "--samples", "0"}).code, 2);
  EXPECT_EQ(cli({"workspace", "--samples", "10", "--out", "/nonexistent/dir/h.csv"}).code, 1);
  EXPECT_EQ(cli({"workspace", "--samples", "10", "--targets", "/nonexistent/t.txt"}).code, 1);
}

TEST(Cli, ReplayMatchesLibrary) {
  const std::string trace = std::string(CTBOT_FIXTURE_DIR) + "/trace_hold_x.jsonl";
  const CliRun r = cli({"replay", "--trace", trace, "--ticks", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  EXPECT_EQ(line, "tick,a1,a2,a3,a4,a5,a6,a7,a8");
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 100);
  EXPECT_EQ(cli({"replay", "--trace", "/nonexistent", "--ticks", "3"}).code, 1);
}

TEST(Cli, ServeRejectsBadOptions) {
  EXPECT_EQ(cli({"serve", "--fast", "--realtime"}).code, 2);
  EXPECT_EQ(cli({"serve", "--timestep", "1 fortnight"}).code, 2);
  EXPECT_EQ(cli({"serve", "--timestep", "50ms"}).code, 2);
}
