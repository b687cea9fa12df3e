#include <array>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "gbstab/atlas.hpp"

using namespace gbstab;

namespace {

WaveParameters wave(double p, double a, double E, double chat) {
  WaveParameters w;
  w.p = p;
  w.a = a;
  w.E = E;
  w.chat = chat;
  return w;
}

ScanPoint at(double p, double a, double E, double chat, int N = 128, int well = 0) {
  ScanOptions opt;
  opt.N = N;
  opt.well_from_right = well;
  return evaluate_point(wave(p, a, E, chat), opt);
}

using Triple = std::array<int, 3>;

}  // namespace

TEST(Atlas, QuarticRegionTriples) {
  struct Case {
    double a, E;
    Triple triple;
  } cases[] = {{0.05, -0.02, {1, 0, 1}},
               {0.0, 0.05, {2, 0, 1}},
               {-0.122, 0.05, {2, 1, 0}},
               {-0.16, 0.05, {2, 1, 1}},
               {-0.25, 0.0, {1, 0, 1}}};
  for (const auto& c : cases) {
    const auto pt = at(2.0, c.a, c.E, 0.5);
    ASSERT_TRUE(pt.ok()) << pt.detail;
    EXPECT_EQ(pt.triple(), c.triple) << "a=" << c.a << " E=" << c.E;
  }
}

TEST(Atlas, QuarticTwoWellsShareTheirTriple) {
  const auto right = at(2.0, 0.05, -0.02, 0.5, 128, 0);
  const auto left = at(2.0, 0.05, -0.02, 0.5, 128, 1);
  ASSERT_TRUE(right.ok() && left.ok());
  EXPECT_EQ(right.triple(), left.triple());
  EXPECT_LT(left.params.well_hint.value(), 0.0);
}

TEST(Atlas, SexticRegionTriples) {
  struct Case {
    double a, E;
    Triple triple;
  } cases[] = {{-0.5, 0.0, {1, 0, 1}}, {-0.46, 0.21, {1, 0, 0}}, {-0.385, 0.21, {2, 1, 0}}, {0.0, 0.2, {2, 0, 1}}};
  for (const auto& c : cases) {
    const auto pt = at(4.0, c.a, c.E, 0.5);
    ASSERT_TRUE(pt.ok()) << pt.detail;
    EXPECT_EQ(pt.triple(), c.triple) << "a=" << c.a << " E=" << c.E;
  }
}

TEST(Atlas, CubicScanIsUniform) {
  ScanOptions opt;
  opt.N = 64;
  const auto grid = scan_plane(1.0, {-0.03, 0.03}, {-0.07, -0.02}, 0.9, 3, opt);
  ASSERT_EQ(grid.points.size(), 9u);
  for (const auto& pt : grid.points) {
    ASSERT_TRUE(pt.ok()) << pt.detail;
    EXPECT_EQ(pt.triple(), (Triple{1, 0, 1}));
  }
}

TEST(Atlas, ScanIsIndependentOfWorkerCount) {
  ScanOptions one;
  one.N = 32;
  ScanOptions two = one;
  two.workers = 2;
  std::vector<std::string> streamed;
  const auto g1 = scan_plane(2.0, {-0.3, 0.1}, {-0.05, 0.1}, 0.5, 3, one);
  const auto g2 = scan_plane(2.0, {-0.3, 0.1}, {-0.05, 0.1}, 0.5, 3, two,
                             [&](const ScanPoint& pt) { streamed.push_back(csv_row(pt)); });
  EXPECT_EQ(to_csv(g1), to_csv(g2));
  ASSERT_EQ(streamed.size(), g2.points.size());
  for (std::size_t i = 0; i < streamed.size(); ++i) EXPECT_EQ(streamed[i], csv_row(g2.points[i]));
}

TEST(Atlas, MissingWavesAreStatusesNotFailures) {
  // below the bottom of the only well
  const auto below = at(1.0, 0.0, -0.5, 0.9, 64);
  EXPECT_EQ(below.status, "nonexistent");
  EXPECT_FALSE(below.detail.empty());
  const auto left = at(1.0, 0.0, -0.05, 0.9, 64, 1);
  EXPECT_EQ(left.status, "nonexistent");
}

TEST(Atlas, OutputsCarryMetadata) {
  ScanOptions opt;
  opt.N = 32;
  const auto grid = scan_plane(1.0, {-0.03, 0.03}, {-0.3, -0.02}, 0.9, 2, opt);
  const std::string csv = to_csv(grid);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "p,a,E,chat,status,nL2,n_s1,nD,count,chat_star");
  const auto j = to_json(grid, "abc");
  EXPECT_EQ(j["metadata"]["config_hash"], "abc");
  EXPECT_EQ(j["metadata"]["grid"]["resolution"], 2);
  EXPECT_TRUE(j["metadata"].contains("tolerances"));
  EXPECT_EQ(j["points"].size(), 4u);
  EXPECT_EQ(j["points"][0]["status"], "nonexistent");
  const std::string svg = to_svg(grid);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Atlas, ScanRejectsBadGrid) {
  EXPECT_THROW(scan_plane(1.0, {0, 1}, {0, 1}, 0.5, 1), InvalidArgument);
  EXPECT_THROW(scan_plane(1.0, {0, NAN}, {0, 1}, 0.5, 4), InvalidArgument);
}

TEST(Atlas, SolitaryLimitSign) {
  for (double p : {1.0, 2.0}) {
    const auto v = solitary_limit_check(p, 0.5, 128);
    EXPECT_TRUE(v.ok) << v.detail;
    EXPECT_EQ(v.expected_sign, -1);
    EXPECT_LT(v.D.back(), 0.0);
    // the period grows without bound toward the solitary wave
    for (std::size_t i = 1; i < v.period.size(); ++i) EXPECT_GT(v.period[i], v.period[i - 1]);
  }
}

TEST(Atlas, EquilibriumLimit) {
  const auto v = equilibrium_limit_check(1.0, 0.5);
  EXPECT_TRUE(v.ok);
  EXPECT_NEAR(v.period_limit, 2.0 * std::numbers::pi / std::sqrt(0.5), 1e-12);
  EXPECT_LT(v.period_error, 1e-5);
  EXPECT_TRUE(v.D_negative);
  EXPECT_TRUE(v.chat_star_to_one);
  EXPECT_TRUE(v.equilibrium_stable);
}
