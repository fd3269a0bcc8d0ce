// License: Apache 2.0. See LICENSE file in root directory.
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "censtereo/camera.hpp"
#include "censtereo/metrics.hpp"
#include "censtereo/rng.hpp"

using namespace censtereo;

namespace {
StereoRig make_rig(double fx, double B) {
  StereoRig rig;
  rig.intrinsics.fx = fx;
  rig.intrinsics.fy = fx;
  rig.intrinsics.cx = 320.0;
  rig.intrinsics.cy = 180.0;
  rig.baseline = B;
  return rig;
}
}  // namespace

TEST_CASE("disparity to depth and back", "[camera]") {
  const StereoRig rig = make_rig(600.0, 0.07);
  SECTION("textbook case") {
    CHECK(disparity_to_depth(42.0, rig) == Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("round trip is exact to 1e-12 relative") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
      const double z = 0.3 + rng.uniform() * 20.0;
      const double back = disparity_to_depth(depth_to_disparity(z, rig), rig);
      CHECK(back == Catch::Approx(z).epsilon(1e-12));
    }
  }
  SECTION("non-positive disparity has no depth") {
    CHECK(std::isinf(disparity_to_depth(0.0, rig)));
    CHECK(std::isinf(disparity_to_depth(-3.0, rig)));
  }
  SECTION("strictly decreasing in d") {
    double prev = disparity_to_depth(1.0, rig);
    for (double d = 2.0; d < 64.0; d += 1.0) {
      const double z = disparity_to_depth(d, rig);
      CHECK(z < prev);
      prev = z;
    }
  }
}

TEST_CASE("deprojection", "[camera]") {
  Intrinsics intr;
  intr.fx = 480.0;
  intr.fy = 470.0;
  intr.cx = 320.0;
  intr.cy = 180.0;

  SECTION("principal point maps onto the optical axis") {
    const Point3 p = deproject(intr.cx, intr.cy, 2.0, intr);
    CHECK(p.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(p.z == 2.0);
  }
  SECTION("one focal length to the side is a unit offset at unit depth") {
    const Point3 p = deproject(intr.cx + intr.fx, intr.cy, 1.0, intr);
    CHECK(p.x == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(p.z == 1.0);
  }
  SECTION("a constant-disparity map deprojects onto a plane") {
    const StereoRig rig = make_rig(480.0, 0.07);
    DisparityMap map(64, 48, float_to_fixed(21.0));
    const std::vector<Point3> pts = deproject_disparity_map(map, rig);
    REQUIRE(pts.size() == 64u * 48u);
    const PlaneFit fit = plane_fit_rms(pts);
    CHECK(fit.rms < 1e-9);
    CHECK(std::abs(fit.normal.z) == Catch::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("distortion polynomial", "[camera]") {
  Intrinsics intr;
  intr.fx = intr.fy = 480.0;
  intr.cx = intr.cy = 200.0;
  intr.model = DistortionModel::ModifiedBrownConrady;

  SECTION("all-zero coefficients are the identity") {
    const Vec2 p = distort_point({0.31, -0.22}, intr);
    CHECK(p.x == 0.31);
    CHECK(p.y == -0.22);
  }
  SECTION("the on-axis point is fixed") {
    intr.k1 = 0.1;
    intr.k2 = -0.02;
    intr.p1 = 0.003;
    intr.p2 = -0.001;
    const Vec2 p = distort_point({0.0, 0.0}, intr);
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
  }
  SECTION("pure radial on-axis-x case") {
    intr.k1 = 0.1;
    const Vec2 p = distort_point({0.5, 0.0}, intr);
    CHECK(p.x == Catch::Approx(0.5125).epsilon(1e-12));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("model none passes through") {
    intr.model = DistortionModel::None;
    intr.k1 = 0.5;  // ignored
    const Vec2 p = distort_point({0.4, 0.1}, intr);
    CHECK(p.x == 0.4);
    CHECK(p.y == 0.1);
  }
  SECTION("tangential terms act on the radially corrected point") {
    // with k1 and p1 set, the p1 term must see x*rho rather than x
    intr.k1 = 0.2;
    intr.p1 = 0.01;
    const double xn = 0.3, yn = 0.2;
    const double r2 = xn * xn + yn * yn;
    const double rho = 1.0 + 0.2 * r2;
    const double xr = xn * rho, yr = yn * rho;
    const double rr2 = xr * xr + yr * yr;
    const Vec2 p = distort_point({xn, yn}, intr);
    CHECK(p.x == Catch::Approx(xr + 2 * 0.01 * xr * yr).epsilon(1e-14));
    CHECK(p.y == Catch::Approx(yr + 0.01 * (rr2 + 2 * yr * yr)).epsilon(1e-14));
  }
  SECTION("undistort inverts distort to high precision") {
    intr.k1 = 0.08;
    intr.k2 = -0.01;
    intr.k3 = 0.002;
    intr.p1 = 0.001;
    intr.p2 = -0.0005;
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
      const Vec2 u{rng.uniform() - 0.5, rng.uniform() - 0.5};
      const Vec2 d = distort_point(u, intr);
      const Vec2 back = undistort_point(d, intr);
      CHECK(back.x == Catch::Approx(u.x).margin(1e-9));
      CHECK(back.y == Catch::Approx(u.y).margin(1e-9));
    }
  }
}

TEST_CASE("operating range from the search window", "[camera]") {
  SECTION("reference rig") {
    double z_min = 0, z_max = 0;
    operating_range(make_rig(477.0, 0.07), z_min, z_max);
    CHECK(z_min == Catch::Approx(0.522).margin(0.001));
    CHECK(z_max == Catch::Approx(477.0 * 0.07 * 32.0).epsilon(1e-12));
  }
  SECTION("halving the focal length halves the minimum range") {
    double z1 = 0, z2 = 0, zmax = 0;
    operating_range(make_rig(480.0, 0.07), z1, zmax);
    operating_range(make_rig(240.0, 0.07), z2, zmax);
    CHECK(z2 == Catch::Approx(z1 / 2.0).epsilon(1e-12));
  }
  SECTION("a one-pixel disparity at fB around 30 reaches about 30 m") {
    const StereoRig rig = make_rig(430.0, 0.07);  // fB = 30.1
    CHECK(disparity_to_depth(1.0, rig) == Catch::Approx(30.1).epsilon(1e-12));
  }
}

TEST_CASE("camera validation", "[camera]") {
  StereoRig rig = make_rig(480.0, 0.07);
  rig.baseline = 0.0;
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);
  rig = make_rig(-1.0, 0.07);
  CHECK_THROWS_AS(rig.validate(), std::invalid_argument);
}
