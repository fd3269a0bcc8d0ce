// License: Apache 2.0. See LICENSE file in root directory.
#include <catch2/catch_amalgamated.hpp>

#include "censtereo/matcher.hpp"
#include "oracles.hpp"

using namespace censtereo;

namespace {

// Volume with marker everywhere except explicit costs at one pixel.
CostVolume one_pixel_volume(int x, int y, const std::vector<uint16_t>& costs) {
  CostVolume vol(20, 20);
  for (size_t d = 0; d < costs.size(); ++d)
    vol.agg_costs[(size_t(y) * 20 + x) * 64 + d] = costs[d];
  return vol;
}

}  // namespace

TEST_CASE("subpixel parabola refinement", "[wta]") {
  SECTION("symmetric neighbors give zero offset") {
    // candidates at (10, 8) go up to d = 4; winner at d = 2
    const CostVolume vol = one_pixel_volume(10, 8, {9, 4, 2, 4, 9});
    const WtaResult res = wta_subpixel(vol);
    const MatchStats& s = res.stats.at(10, 8);
    REQUIRE(s.matched);
    CHECK(s.best_d == 2);
    CHECK(s.subpixel_offset == 0.0f);
    CHECK(res.disparity.at(10, 8) == 64);
  }
  SECTION("asymmetric neighbors shift toward the lower cost") {
    // (c_prev, c1, c_next) = (6, 2, 4): offset (6-4)/(2*(6-4+4)) = 1/6,
    // stored as round(32/6) = 5 thirty-seconds
    const CostVolume vol = one_pixel_volume(10, 8, {9, 6, 2, 4, 9});
    const WtaResult res = wta_subpixel(vol);
    const MatchStats& s = res.stats.at(10, 8);
    REQUIRE(s.matched);
    CHECK(s.best_d == 2);
    CHECK(s.c1 == 2);
    CHECK(s.c_prev == 6);
    CHECK(s.c_next == 4);
    CHECK(s.subpixel_offset == Catch::Approx(1.0 / 6.0));
    CHECK(res.disparity.at(10, 8) == 2 * 32 + 5);
  }
  SECTION("ties resolve to the smallest disparity") {
    const CostVolume vol = one_pixel_volume(10, 8, {5, 5, 5, 5, 5});
    const WtaResult res = wta_subpixel(vol);
    CHECK(res.stats.at(10, 8).best_d == 0);
  }
  SECTION("winner at the range edge has no parabola") {
    const CostVolume vol = one_pixel_volume(10, 8, {1, 5, 6, 7, 8});
    const WtaResult res = wta_subpixel(vol);
    const MatchStats& s = res.stats.at(10, 8);
    REQUIRE(s.matched);
    CHECK(s.best_d == 0);
    CHECK(s.c_prev == kCostOutOfRange);
    CHECK(s.subpixel_offset == 0.0f);
    // d=0 with zero offset stores the sentinel-avoiding minimum value 1
    CHECK(res.disparity.at(10, 8) == 1);
  }
  SECTION("second peak excludes the winner's immediate neighbors") {
    const CostVolume vol = one_pixel_volume(10, 8, {9, 6, 2, 4, 7});
    const WtaResult res = wta_subpixel(vol);
    CHECK(res.stats.at(10, 8).c2 == 7);  // min(costs[0], costs[4])
  }
  SECTION("pixels without candidates stay invalid") {
    const CostVolume vol = one_pixel_volume(10, 8, {3});
    const WtaResult res = wta_subpixel(vol);
    CHECK_FALSE(res.stats.at(7, 7).matched);
    CHECK(res.disparity.at(7, 7) == kInvalidDisparity);
  }
}

TEST_CASE("offset bounds and output range", "[wta]") {
  const GrayImage left = oracle::random_image(64, 48, 10, 808);
  const GrayImage right = oracle::random_image(64, 48, 10, 809);
  const WtaResult res = wta_subpixel(
      build_cost_volume(census_transform(left), census_transform(right)));
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      const MatchStats& s = res.stats.at(x, y);
      const uint16_t v = res.disparity.at(x, y);
      if (!s.matched) {
        REQUIRE(v == kInvalidDisparity);
        continue;
      }
      REQUIRE(std::abs(s.subpixel_offset) <= 0.5f);
      REQUIRE(v >= 1);
      REQUIRE(v <= kMaxStoredDisparity);
      REQUIRE(s.c1 <= s.c2);
      if (s.c_prev != kCostOutOfRange) REQUIRE(s.c1 <= s.c_prev);
      if (s.c_next != kCostOutOfRange) REQUIRE(s.c1 <= s.c_next);
    }
}

TEST_CASE("winner equals brute-force scan on random pairs", "[wta][oracle]") {
  for (uint64_t seed : {11ull, 22ull, 33ull}) {
    const GrayImage left = oracle::random_image(64, 48, 10, seed);
    const GrayImage right = oracle::random_image(64, 48, 10, seed + 1000);
    const CensusImage cl = census_transform(left);
    const CensusImage cr = census_transform(right);
    const WtaResult res = wta_subpixel(build_cost_volume(cl, cr));
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 64; ++x) {
        const oracle::WtaPick pick = oracle::wta_at(cl, cr, x, y);
        const MatchStats& s = res.stats.at(x, y);
        REQUIRE(s.matched == pick.matched);
        if (pick.matched) {
          REQUIRE(s.best_d == pick.best_d);
          REQUIRE(s.c1 == pick.c1);
        }
      }
  }
}

TEST_CASE("exact integer shift recovers the disparity", "[wta][oracle]") {
  GrayImage left, right;
  oracle::exact_shift_pair(96, 40, 20, 4242, left, right);
  const WtaResult res = wta_subpixel(
      build_cost_volume(census_transform(left), census_transform(right)));

  // interior = pixels whose true disparity is inside the search range
  long long n = 0, exact = 0;
  for (int y = kMatchBorder; y < 40 - kMatchBorder; ++y)
    for (int x = kMatchBorder + 20; x < 96 - kMatchBorder; ++x) {
      const MatchStats& s = res.stats.at(x, y);
      REQUIRE(s.matched);
      REQUIRE(s.best_d == 20);
      REQUIRE(s.c1 == 0);
      ++n;
      if (res.disparity.at(x, y) == 640) ++exact;
      // the parabola may wander off the integer by a step or two when a
      // neighbor cost is accidentally similar, never further
      REQUIRE(std::abs(int(res.disparity.at(x, y)) - 640) <= 8);
    }
  // at zero cost the fit is almost always centered
  CHECK(double(exact) / double(n) > 0.9);
}

TEST_CASE("right-view disparity", "[wta]") {
  SECTION("identical images match at zero everywhere interior") {
    const GrayImage img = oracle::random_image(48, 32, 10, 50);
    const CensusImage c = census_transform(img);
    const DisparityMap right = right_disparity(build_cost_volume(c, c));
    for (int y = kMatchBorder; y < 32 - kMatchBorder; ++y)
      for (int x = kMatchBorder; x < 48 - kMatchBorder; ++x) {
        REQUIRE(right.valid(x, y));
        CHECK(decoded_right_disparity(right.at(x, y)) == 0);
      }
  }
  SECTION("exact-shift pair maps right columns to the true disparity") {
    GrayImage left, right_img;
    oracle::exact_shift_pair(80, 32, 10, 60, left, right_img);
    const DisparityMap rmap = right_disparity(build_cost_volume(
        census_transform(left), census_transform(right_img)));
    // right column x sees left column x + 10; valid while x + 10 <= w - 7
    for (int y = kMatchBorder; y < 32 - kMatchBorder; ++y)
      for (int x = kMatchBorder; x + 10 < 80 - kMatchBorder; ++x) {
        REQUIRE(rmap.valid(x, y));
        CHECK(decoded_right_disparity(rmap.at(x, y)) == 10);
      }
  }
  SECTION("unrelated images disagree with the left map") {
    const GrayImage left = oracle::random_image(64, 48, 10, 70);
    const GrayImage right = oracle::random_image(64, 48, 10, 71);
    const CostVolume vol =
        build_cost_volume(census_transform(left), census_transform(right));
    const WtaResult wta = wta_subpixel(vol);
    const DisparityMap rmap = right_disparity(vol);
    long long n = 0, disagree = 0;
    for (int y = kMatchBorder; y < 48 - kMatchBorder; ++y)
      for (int x = kMatchBorder; x < 64 - kMatchBorder; ++x) {
        const MatchStats& s = wta.stats.at(x, y);
        if (!s.matched) continue;
        const int xr = x - s.best_d;
        ++n;
        if (!rmap.valid(xr, y) ||
            decoded_right_disparity(rmap.at(xr, y)) != s.best_d)
          ++disagree;
      }
    REQUIRE(n > 0);
    CHECK(double(disagree) / double(n) > 0.5);
  }
}
