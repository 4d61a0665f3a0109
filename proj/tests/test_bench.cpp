#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <omp.h>

#include "rbm/bench.hpp"

using namespace rbm;
using namespace rbm::bench;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

ExperimentConfig small_grid() {
  return parse(
      "families = round_robin, uniform\n"
      "n = 16\n"
      "colors = 3\n"
      "instance_seeds = 1-2\n"
      "k = 12, 16\n"
      "rounding_seeds = 4\n"
      "verify = full\n");
}

}  // namespace

TEST(Config, ParsesKeys) {
  const auto cfg = parse(
      "# comment line\n"
      "families = zipf, bursty\n"
      "n = 40, 60\n"
      "colors = 3\n"
      "instance_seeds = 2-4\n"
      "k = 16, 32   # trailing\n"
      "k_prime = 3\n"
      "rounding_seeds = 7\n"
      "seed = 9\n"
      "delta = 0.01\n"
      "mode = pruned\n"
      "verify = off\n"
      "oracle = off\n"
      "augmented = on\n"
      "timing = on\n"
      "zipf_alpha = 1.5\n"
      "burst = 2-3\n"
      "csv = out.csv\n");
  EXPECT_EQ(cfg.instances.size(), 2u * 2u * 3u);
  EXPECT_EQ(cfg.ks, (std::vector<std::int64_t>{16, 32}));
  EXPECT_EQ(cfg.k_prime_override, 3);
  EXPECT_EQ(cfg.rounding_seeds, 7);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_DOUBLE_EQ(cfg.delta, 0.01);
  EXPECT_EQ(cfg.mode, pd::CandidateMode::kPruned);
  EXPECT_EQ(cfg.verify, VerifyLevel::kOff);
  EXPECT_FALSE(cfg.oracle);
  EXPECT_TRUE(cfg.augmented);
  EXPECT_TRUE(cfg.timing);
  EXPECT_EQ(cfg.csv_path, "out.csv");
  ASSERT_TRUE(cfg.instances.front().spec);
  EXPECT_DOUBLE_EQ(cfg.instances.front().spec->zipf_alpha, 1.5);
}

TEST(Config, Rejects) {
  EXPECT_THROW(parse("no equals sign\n"), Error);
  EXPECT_THROW(parse("colour = 3\n"), Error);
  EXPECT_THROW(parse("k = twelve\n"), Error);
  EXPECT_THROW(parse("oracle = maybe\n"), Error);
  EXPECT_THROW(parse("families = uniform\nk = 12\n"), Error);
  EXPECT_THROW(parse_verify_level("sometimes"), Error);
  EXPECT_EQ(parse_verify_level("full-dual-enumeration"), VerifyLevel::kFull);
}

TEST(Config, DefaultSuite) {
  const auto cfg = default_suite();
  EXPECT_EQ(cfg.ks, (std::vector<std::int64_t>{12, 16, 32, 64}));
  EXPECT_EQ(cfg.instances.size(), 4u * 3u * 2u * 2u);
  EXPECT_EQ(cfg.verify, VerifyLevel::kFull);
  EXPECT_EQ(cfg.rounding_seeds, 10);
}

TEST(Ids, Stable) {
  gen::GenSpec g;
  g.kind = gen::Kind::kUniform;
  g.n = 100;
  g.num_colors = 5;
  g.seed = 1;
  EXPECT_EQ(instance_id(g), "uniform-n100-c5-s1");
}

TEST(Envelope, Value) {
  EXPECT_NEAR(scale_envelope(16), 25.0 * (1.0 + std::log(std::log(16.0))), 1e-12);
}

TEST(Run, RoundRobinRowIsClean) {
  auto cfg = parse(
      "families = round_robin\n"
      "n = 64\n"
      "colors = 2\n"
      "instance_seeds = 1\n"
      "k = 16\n"
      "rounding_seeds = 10\n"
      "verify = full\n");
  const auto rows = run_experiment(cfg);
  ASSERT_EQ(rows.size(), 1u);
  const auto& r = rows.front();
  EXPECT_EQ(r.k, 16);
  EXPECT_EQ(r.k_prime, 4);
  EXPECT_EQ(r.violations(), 0) << r.error;
  EXPECT_GE(r.round_min, 1);
  EXPECT_LE(r.round_min, r.round_max);
  EXPECT_FALSE(r.opt);  // n is past the oracle guard
}

TEST(Run, OracleRowsBoundRounding) {
  const auto rows = run_experiment(small_grid());
  ASSERT_EQ(rows.size(), 2u * 2u * 2u);
  std::int64_t with_opt = 0;
  for (const auto& r : rows) {
    EXPECT_EQ(r.violations(), 0) << r.instance << " k=" << r.k << " " << r.error;
    if (!r.opt) continue;
    ++with_opt;
    EXPECT_GE(*r.round_opt_ratio, 1.0 - 1e-12);
    EXPECT_GE(static_cast<double>(r.round_min), static_cast<double>(*r.opt));
    ASSERT_TRUE(r.opt_k_prime);
    EXPECT_LE(r.scaled_dual_obj, static_cast<double>(*r.opt_k_prime) + 1e-6);
  }
  EXPECT_EQ(with_opt, static_cast<std::int64_t>(rows.size()));
}

TEST(Run, ParallelMatchesSerial) {
  omp_set_num_threads(3);
  const auto cfg = small_grid();
  EXPECT_EQ(csv(run_experiment(cfg)), csv(run_experiment_serial(cfg)));
}

TEST(Csv, HeaderAndStableBytes) {
  const auto cfg = small_grid();
  const auto a = csv(run_experiment(cfg));
  const auto b = csv(run_experiment(cfg));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind(csv_header(), 0), 0u);
  EXPECT_EQ(a.rfind("# rbm-bench-v1\ninstance,k,", 0), 0u);
  std::istringstream in(a);
  std::string line;
  std::int64_t lines = 0;
  std::size_t commas = std::string::npos;
  while (std::getline(in, line)) {
    if (++lines == 1) continue;
    const auto c = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (commas == std::string::npos) commas = c;
    EXPECT_EQ(c, commas);
    if (lines > 2) EXPECT_NE(line.find(",-,ok"), std::string::npos) << line;
  }
  EXPECT_EQ(lines, 2 + 8);
}

TEST(Csv, MissingValuesAreNA) {
  ResultRow r;
  r.instance = "x";
  r.k = 12;
  r.scale = std::nan("");
  const auto s = csv({r});
  EXPECT_NE(s.find(",NA,"), std::string::npos);
  EXPECT_NE(s.find(",-,ok\n"), std::string::npos);
  r.error = "boom";
  EXPECT_NE(csv({r}).find(",error\n"), std::string::npos);
  EXPECT_EQ(total_violations({r, r}), 2);
}

TEST(Svg, HasPolylines) {
  const auto rows = run_experiment(small_grid());
  std::ostringstream out;
  write_svg(out, rows);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("<polyline"), std::string::npos);
  EXPECT_NE(s.find("round_opt_ratio"), std::string::npos);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
}
