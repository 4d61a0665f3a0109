#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "rbm/gen.hpp"
#include "rbm/io.hpp"

using namespace rbm;
using namespace rbm::gen;

namespace {

std::string letters(const Instance& inst) {
  std::string s;
  for (Item i = 1; i <= inst.n(); ++i) s += inst.name(inst.color(i));
  return s;
}

}  // namespace

TEST(Gen, RoundRobin) {
  GenSpec g;
  g.kind = Kind::kRoundRobin;
  g.n = 6;
  g.num_colors = 2;
  EXPECT_EQ(letters(generate(g, 4)), "ababab");
}

TEST(Gen, SingleColorIgnoresColorCount) {
  GenSpec g;
  g.kind = Kind::kSingleColor;
  g.n = 5;
  g.num_colors = 9;
  const auto inst = generate(g, 2);
  EXPECT_EQ(letters(inst), "aaaaa");
  EXPECT_EQ(inst.num_colors(), 1);
}

TEST(Gen, SameSeedSameSequence) {
  for (auto kind : {Kind::kUniform, Kind::kZipf, Kind::kBursty}) {
    GenSpec g;
    g.kind = kind;
    g.n = 100;
    g.num_colors = 5;
    g.seed = 7;
    EXPECT_EQ(letters(generate(g, 8)), letters(generate(g, 8))) << to_string(kind);
    auto h = g;
    h.seed = 8;
    EXPECT_NE(letters(generate(g, 8)), letters(generate(h, 8))) << to_string(kind);
  }
}

TEST(Gen, UniformStaysInPalette) {
  GenSpec g;
  g.kind = Kind::kUniform;
  g.n = 500;
  g.num_colors = 5;
  const auto inst = generate(g, 8);
  EXPECT_EQ(inst.n(), 500);
  EXPECT_EQ(inst.num_colors(), 5);
  EXPECT_EQ(inst.k(), 8);
}

TEST(Gen, ZipfFavorsLowRanks) {
  GenSpec g;
  g.kind = Kind::kZipf;
  g.n = 4000;
  g.num_colors = 6;
  g.zipf_alpha = 1.5;
  const auto inst = generate(g, 8);
  const auto a = inst.occurrences(*inst.find_color("a")).size();
  const auto f = inst.find_color("f");
  const auto rare = f ? inst.occurrences(*f).size() : 0;
  EXPECT_GT(a, 4 * rare);
}

TEST(Gen, BurstsRespectBounds) {
  GenSpec g;
  g.kind = Kind::kBursty;
  g.n = 300;
  g.num_colors = 4;
  g.burst_min = 3;
  g.burst_max = 5;
  const auto inst = generate(g, 8);
  ASSERT_EQ(inst.n(), 300);
  std::int64_t run = 1;
  for (Item i = 2; i <= inst.n(); ++i) {
    if (inst.color(i) == inst.color(i - 1)) {
      ++run;
    } else {
      // two draws may land on the same color and merge
      EXPECT_GE(run, 3);
      run = 1;
    }
  }
  g.burst_min = 6;
  EXPECT_THROW(generate(g, 8), Error);
}

TEST(Gen, KindNamesRoundTrip) {
  for (auto kind : {Kind::kUniform, Kind::kRoundRobin, Kind::kZipf, Kind::kBursty, Kind::kSingleColor})
    EXPECT_EQ(parse_kind(to_string(kind)), kind);
  EXPECT_THROW(parse_kind("poisson"), Error);
}

TEST(Gen, WarnsWhenColorsExceedItems) {
  GenSpec g;
  g.kind = Kind::kRoundRobin;
  g.n = 3;
  g.num_colors = 5;
  std::vector<std::string> w;
  const auto inst = generate(g, 2, &w);
  EXPECT_EQ(inst.num_colors(), 3);
  EXPECT_EQ(w.size(), 1u);
}

TEST(Gen, ColorTokens) {
  EXPECT_EQ(color_token(0), "a");
  EXPECT_EQ(color_token(25), "z");
  EXPECT_EQ(color_token(26), "aa");
  EXPECT_EQ(color_token(27), "ab");
  EXPECT_EQ(color_token(26 + 26 * 26), "aaa");
}

TEST(Gen, BadSpecs) {
  GenSpec g;
  g.n = -1;
  EXPECT_THROW(generate(g, 2), Error);
  g.n = 4;
  g.num_colors = 0;
  EXPECT_THROW(generate(g, 2), Error);
}

TEST(Gen, ZipfHistogramMatchesLaw) {
  GenSpec g;
  g.kind = Kind::kZipf;
  g.n = 100000;
  g.num_colors = 8;
  g.zipf_alpha = 1.2;
  const auto inst = generate(g, 8);
  double norm = 0.0;
  for (int r = 1; r <= 8; ++r) norm += std::pow(r, -g.zipf_alpha);
  double chi2 = 0.0;
  for (std::int64_t r = 0; r < 8; ++r) {
    const auto c = inst.find_color(color_token(r));
    const double seen = c ? static_cast<double>(inst.occurrences(*c).size()) : 0.0;
    const double want = static_cast<double>(g.n) * std::pow(static_cast<double>(r + 1), -g.zipf_alpha) / norm;
    chi2 += (seen - want) * (seen - want) / want;
  }
  // 7 degrees of freedom; 24.3 is the 0.999 quantile
  EXPECT_LT(chi2, 24.3);
}

TEST(Gen, OutputRoundTripsThroughInstanceText) {
  for (auto kind : {Kind::kUniform, Kind::kRoundRobin, Kind::kZipf, Kind::kBursty, Kind::kSingleColor}) {
    GenSpec g;
    g.kind = kind;
    g.n = 200;
    g.num_colors = 30;
    const auto inst = generate(g, 12);
    std::ostringstream out;
    io::write_instance(out, inst);
    std::istringstream in(out.str());
    const auto back = io::read_instance(in);
    EXPECT_EQ(letters(back), letters(inst)) << to_string(kind);
    EXPECT_EQ(back.k(), 12);
    std::ostringstream again;
    io::write_instance(again, back);
    EXPECT_EQ(again.str(), out.str());
  }
}
