#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(RBM_CLI) + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 512> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rbm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, OptOnAlternatingPair) {
  const auto inst = write("abab.txt", "k 2\na\nb\na\nb\na\nb\n");
  const auto r = cli("opt " + inst);
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3\n");
  EXPECT_EQ(cli("opt --bruteforce " + inst).out, "3\n");
}

TEST_F(Cli, GenWritesInstance) {
  const auto r = cli("gen --kind round_robin --n 4 --colors 2 --k 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "k 3\na\nb\na\nb\n");
}

TEST_F(Cli, SolveVerifyRound) {
  const auto inst = path("u.txt");
  ASSERT_EQ(cli("gen --kind uniform --n 60 --colors 4 --seed 3 --k 16 -o " + inst).code, 0);
  const auto out = path("lp");
  const auto lp = cli("solve-lp " + inst + " --verify-level full --out " + out);
  EXPECT_EQ(lp.code, 0) << lp.out;
  for (const char* f : {"fractional.json", "duals.json", "dual.json", "trace.jsonl"})
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;

  const auto frac = (fs::path(out) / "fractional.json").string();
  const auto dual = (fs::path(out) / "dual.json").string();
  const auto v = cli("verify " + inst + " --frac " + frac + " --dual " + dual);
  EXPECT_EQ(v.code, 0) << v.out;

  const auto rd = cli("round " + inst + " --frac " + frac + " --seed 4 --out " + path("rnd"));
  EXPECT_EQ(rd.code, 0) << rd.out;
  const auto sched = path("rnd/schedule.json");
  EXPECT_EQ(cli("verify " + inst + " --schedule " + sched).code, 0);

  std::ifstream log(path("rnd/phases.jsonl"));
  std::string first;
  ASSERT_TRUE(std::getline(log, first));
  const auto header = nlohmann::json::parse(first);
  EXPECT_EQ(header.at("kind"), "rounding_log");
  EXPECT_EQ(header.at("seed"), 4);
}

TEST_F(Cli, VerifyFlagsCorruptedCoverage) {
  const auto inst = write("a.txt", "k 2\na\na\nb\n");
  const auto frac = write("frac.json", R"({"format_version": 1, "kind": "fractional_solution", "k": 2,
    "batches": [{"color": "a", "first": 1, "last": 2, "start_slot": 3, "weight": 1.0},
                {"color": "b", "first": 3, "last": 3, "start_slot": 5, "weight": 0.5}]})");
  const auto r = cli("verify " + inst + " --frac " + frac);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("coverage violation: item 3 covered 0.5"), std::string::npos) << r.out;
}

TEST_F(Cli, VerifyFlagsBadSchedule) {
  const auto inst = write("a.txt", "k 1\na\nb\na\n");
  const auto s = write("s.json", R"({"format_version": 1, "kind": "integral_schedule", "k": 1, "output": [1, 3, 2]})");
  const auto r = cli("verify " + inst + " --schedule " + s);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("schedule violation"), std::string::npos);
}

TEST_F(Cli, BenchNoPlot) {
  const auto cfg = write("c.cfg", "families = round_robin\nn = 12\ncolors = 2\ninstance_seeds = 1\nk = 12\nrounding_seeds = 2\n");
  const auto out = path("b");
  const auto r = cli("bench --config " + cfg + " --no-plot --out " + out);
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "bench.csv"));
  EXPECT_FALSE(fs::exists(fs::path(out) / "bench.svg"));
  const auto r2 = cli("bench --config " + cfg + " --out " + path("b2"));
  EXPECT_EQ(r2.code, 0);
  EXPECT_TRUE(fs::exists(fs::path(path("b2")) / "bench.svg"));
  const auto s = cli("bench --config " + cfg);
  EXPECT_EQ(s.out.rfind("# rbm-bench-v1\n", 0), 0u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("opt /nonexistent/file.txt").code, 2);
  const auto inst = write("a.txt", "k 2\na\n");
  EXPECT_EQ(cli("verify " + inst).code, 2);
  const auto bad = write("bad.txt", "a\nb\n");
  EXPECT_EQ(cli("opt " + bad).code, 2);
  EXPECT_EQ(cli("gen --n 5 --k 2 --kind poisson").code, 2);
}
