#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hulllab/geometry.hpp"

using namespace hulllab;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

BodySpec square() {
  Mat v(2, 4);
  v << 1, 1, -1, -1, 1, -1, 1, -1;
  return make_polytope(v);
}

// max <u, x> over a dense parametrization of the ellipse boundary.
double ellipse_support_sweep(const Vec& c, double a, double b, double angle, const Vec& u) {
  double best = -1e300;
  const int m = 2'000'000;
  for (int i = 0; i < m; ++i) {
    const double t = 2.0 * kPi * i / m;
    const double x = a * std::cos(t);
    const double y = b * std::sin(t);
    const double px = c[0] + std::cos(angle) * x - std::sin(angle) * y;
    const double py = c[1] + std::sin(angle) * x + std::cos(angle) * y;
    best = std::max(best, u[0] * px + u[1] * py);
  }
  return best;
}

}  // namespace

TEST(Constants, BallVolumes) {
  EXPECT_NEAR(ball_volume(0), 1.0, 1e-15);
  EXPECT_NEAR(ball_volume(1), 2.0, 1e-14);
  EXPECT_NEAR(ball_volume(2), kPi, 1e-14);
  EXPECT_NEAR(ball_volume(3), 4.0 * kPi / 3.0, 1e-14);
  EXPECT_NEAR(ball_volume(4), kPi * kPi / 2.0, 1e-13);
  for (int p = 1; p <= 10; ++p) {
    const double gamma = std::tgamma(0.5 * p + 1.0);
    EXPECT_NEAR(ball_volume(p), std::pow(kPi, 0.5 * p) / gamma, 1e-12);
  }
}

TEST(Constants, SphereAreas) {
  EXPECT_NEAR(sphere_area(2), 2.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4.0 * kPi, 1e-13);
}

TEST(Constants, CAlphaValues) {
  EXPECT_DOUBLE_EQ(c_alpha(1.0), 1.0);
  EXPECT_NEAR(c_alpha(0.5), std::sqrt(0.5), 1e-12);
  EXPECT_DOUBLE_EQ(c_alpha(2.0), 1.0);
}

TEST(Constants, CAlphaMatchesGridMinimum) {
  for (double a : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0}) {
    EXPECT_NEAR(c_alpha(a), c_alpha_grid_minimum(a), 1e-6) << "alpha " << a;
  }
}

TEST(Constants, CAlphaInequalityOnRandomPairs) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ua(0.05, 4.0);
  std::uniform_real_distribution<double> ut(-8.0, 8.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(gen);
    const double t = std::pow(10.0, ut(gen));
    EXPECT_GE(std::pow(1.0 + t, a), c_alpha(a) * (1.0 + std::pow(t, a)) * (1.0 - 1e-12));
  }
}

TEST(Bump, EtaValues) {
  EXPECT_DOUBLE_EQ(bump_eta(0.0), 0.0);
  EXPECT_NEAR(bump_eta(0.75), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(bump_eta(1.5), 0.0);
  EXPECT_DOUBLE_EQ(bump_eta(0.5), 0.0);
  EXPECT_NEAR(bump_profile(0.0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(bump_profile(1.0), 0.0);
  for (double s : {-0.9, -0.3, 0.2, 0.6}) EXPECT_NEAR(bump_profile(s), bump_eta(0.75 + 0.25 * s), 1e-14);
}

TEST(Bump, ProfileDerivativesMatchFiniteDifferences) {
  const double h = 1e-5;
  for (double s : {-0.7, -0.2, 0.1, 0.5, 0.8}) {
    const double d1 = (bump_profile(s + h) - bump_profile(s - h)) / (2 * h);
    const double d2 = (bump_profile(s + h) - 2 * bump_profile(s) + bump_profile(s - h)) / (h * h);
    EXPECT_NEAR(bump_profile_d1(s), d1, 1e-7);
    EXPECT_NEAR(bump_profile_d2(s), d2, 1e-4);
  }
}

TEST(Support, Ball) {
  const BodySpec b = make_ball(Vec::Zero(2), 0.7);
  EXPECT_DOUBLE_EQ(support(b, v2(1, 0)), 0.7);
  EXPECT_NEAR(support(b, v2(0.6, -0.8)), 0.7, 1e-15);
}

TEST(Support, Square) {
  const BodySpec s = square();
  EXPECT_DOUBLE_EQ(support(s, v2(1, 0)), 1.0);
  EXPECT_NEAR(support(s, v2(std::sqrt(0.5), std::sqrt(0.5))), std::sqrt(2.0), 1e-15);
}

TEST(Support, EllipseAgainstBoundarySweep) {
  const BodySpec e = make_ellipsoid(Vec::Zero(2), v2(2, 1));
  EXPECT_NEAR(support(e, v2(1, 0)), 2.0, 1e-14);
  const double angle = 0.4;
  Mat rot(2, 2);
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Vec c = v2(0.1, -0.2);
  const BodySpec er = make_ellipsoid(c, v2(0.5, 0.2), rot);
  for (double t : {0.3, 1.7, 4.0}) {
    const Vec u = v2(std::cos(t), std::sin(t));
    EXPECT_NEAR(support(er, u), ellipse_support_sweep(c, 0.5, 0.2, angle, u), 1e-10);
  }
}

TEST(Support, RejectsNonUnitDirection) {
  const BodySpec b = make_ball(Vec::Zero(2), 1.0);
  EXPECT_THROW(support(b, v2(1.0 + 2e-9, 0)), std::invalid_argument);
  EXPECT_NO_THROW(support(b, v2(1.0 + 5e-10, 0)));
}

TEST(Support, HomogeneousExtension) {
  const BodySpec s = square();
  EXPECT_NEAR(support_homogeneous(s, v2(3, 0)), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(support_homogeneous(s, v2(0, 0)), 0.0);
}

TEST(Width, Examples) {
  EXPECT_NEAR(width_function(make_ball(Vec::Zero(3), 0.4), v3(0, 0, 1)), 0.8, 1e-15);
  EXPECT_NEAR(width_function(square(), v2(1, 0)), 2.0, 1e-15);
  const BodySpec e = make_ellipsoid(v2(5, 5), v2(2, 1));
  EXPECT_NEAR(width_function(e, v2(0, 1)), 2.0, 1e-12);
  EXPECT_NEAR(width_function(e, v2(0, 1)),
              ellipse_support_sweep(v2(5, 5), 2, 1, 0, v2(0, 1)) + ellipse_support_sweep(v2(5, 5), 2, 1, 0, v2(0, -1)),
              1e-10);
}

TEST(Minkowski, Examples) {
  EXPECT_NEAR(minkowski_functional(make_ball(Vec::Zero(2), 1.0), v2(0.3, 0.4)), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(minkowski_functional(square(), v2(0, 0)), 0.0);
  EXPECT_NEAR(minkowski_functional(square(), v2(0.5, 0.25)), 0.5, 1e-15);
}

TEST(Minkowski, MatchesMembershipBisection) {
  Mat v(2, 5);
  v << 1.0, 0.2, -0.9, -0.5, 0.6, 0.1, 1.1, 0.4, -0.8, -0.7;
  const BodySpec p = make_polytope(v);
  const BodySpec e = make_ellipsoid(v2(0.05, -0.02), v2(0.8, 0.3));
  for (const BodySpec* body : {&p, &e}) {
    for (double t : {0.2, 1.3, 2.9, 4.4}) {
      const Vec x = 0.37 * v2(std::cos(t), std::sin(t));
      double lo = 0.0;
      double hi = 100.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (contains(*body, Vec(x / mid), 0.0)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      EXPECT_NEAR(minkowski_functional(*body, x), hi, 1e-9);
    }
  }
}

TEST(Minkowski, RequiresOriginInInterior) {
  EXPECT_THROW(minkowski_functional(make_ball(v2(2, 0), 1.0), v2(1, 0)), std::invalid_argument);
}

TEST(Polar, BallAndEllipsoid) {
  const double r = 0.6;
  const auto [h, g] = polar_support_identity_check(make_ball(Vec::Zero(2), r), v2(1, 0));
  EXPECT_NEAR(h, r, 1e-15);
  EXPECT_NEAR(g, r, 1e-15);
  const auto [h1, g1] = polar_support_identity_check(make_ball(Vec::Zero(2), 1.0), v2(0.6, 0.8));
  EXPECT_NEAR(h1, 1.0, 1e-15);
  EXPECT_NEAR(g1, 1.0, 1e-15);
  const auto [h2, g2] = polar_support_identity_check(make_ellipsoid(Vec::Zero(2), v2(2, 1)), v2(1, 0));
  EXPECT_NEAR(h2, 2.0, 1e-14);
  EXPECT_NEAR(g2, 2.0, 1e-14);
  const BodySpec polar = polar_body(make_ellipsoid(Vec::Zero(2), v2(2, 1)));
  EXPECT_NEAR(support(polar, v2(1, 0)), 0.5, 1e-14);
  EXPECT_NEAR(support(polar, v2(0, 1)), 1.0, 1e-14);
}

TEST(Polar, UnsupportedFamily) { EXPECT_THROW(polar_body(square()), std::invalid_argument); }

TEST(Caps, BallVolume) {
  EXPECT_NEAR(cap_volume_ball(2, 1, 1), kPi / 2, 1e-12);
  EXPECT_NEAR(cap_volume_ball(3, 1, 2), 4 * kPi / 3, 1e-12);
  const double theta = 2 * std::acos(0.5);
  EXPECT_NEAR(cap_volume_ball(2, 1, 0.5), 0.5 * (theta - std::sin(theta)), 1e-10);
  EXPECT_NEAR(cap_volume_ball(2, 1, 0.5), 0.61418, 1e-5);
  for (int d = 1; d <= 4; ++d) {
    for (double r : {0.3, 1.0}) {
      EXPECT_NEAR(cap_volume_ball(d, r, 2 * r) / (ball_volume(d) * std::pow(r, d)), 1.0, 1e-8);
    }
  }
  EXPECT_NEAR(cap_volume_ball(3, 1, 0.4), kPi * 0.16 * (3 - 0.4) / 3, 1e-12);
  EXPECT_THROW(cap_volume_ball(2, 1, 2.5), std::invalid_argument);
  EXPECT_THROW(cap_volume_ball(2, 1, -0.1), std::invalid_argument);
}

TEST(Caps, SphereArea) {
  EXPECT_NEAR(cap_area_sphere(2, 1, 1), kPi, 1e-12);
  EXPECT_NEAR(cap_area_sphere(3, 1, 0.3), 0.6 * kPi, 1e-12);
  for (double h : {0.01, 0.5, 0.9}) EXPECT_NEAR(cap_area_sphere(3, 2.0, h), 2 * kPi * 2.0 * h, 1e-11);
  EXPECT_DOUBLE_EQ(cap_area_sphere(4, 1, 0), 0.0);
  EXPECT_THROW(cap_area_sphere(1, 1, 0.5), std::invalid_argument);
  EXPECT_THROW(cap_area_sphere(3, 1, 1.5), std::invalid_argument);
  EXPECT_NEAR(cap_area_sphere_full(3, 1, 1.5), 3 * kPi, 1e-11);
  EXPECT_NEAR(cap_area_sphere_full(2, 1, 2), 2 * kPi, 1e-11);
  EXPECT_NEAR(cap_area_sphere_full(2, 1, 1.5), 2 * std::acos(-0.5), 1e-11);
}

TEST(Contains, Examples) {
  const BodySpec b = make_ball(Vec::Zero(2), 1.0);
  EXPECT_TRUE(contains(b, v2(0, 0)));
  EXPECT_FALSE(contains(b, v2(1.01, 0)));
  const BodySpec g = make_bump_ball(1.0, 0.2, 1.0, v2(0, 1));
  EXPECT_FALSE(contains(g, v2(0, 1)));
  EXPECT_TRUE(contains(g, v2(0, 1.0 - 0.04 - 1e-9)));
  EXPECT_FALSE(contains(g, v2(0, 1.0 - 0.04 + 1e-9)));
  EXPECT_TRUE(contains(g, v2(1, 0)));
}

TEST(BumpBall, SupportOppositeAndAtPole) {
  const BodySpec g = make_bump_ball(1.0, 0.2, 1.0, v2(0, 1));
  EXPECT_NEAR(support(g, v2(0, -1)), 1.0, 1e-15);
  EXPECT_LT(support(g, v2(0, 1)), 1.0);
  EXPECT_GE(support(g, v2(0, 1)), 1.0 - 0.04 - 1e-12);
  EXPECT_TRUE(origin_in_interior(g));
}

TEST(BumpBall, SupportMatchesBoundarySweep) {
  const double R = 0.9;
  const double delta = 0.3;
  const double amp = 0.2;
  const BodySpec g = make_bump_ball(R, delta, amp, v2(0, 1));
  const int m = 400000;
  for (double t : {1.45, 1.5, 1.571, 1.62, 1.7}) {
    const Vec u = v2(std::cos(t), std::sin(t));
    double best = -1e300;
    for (int i = 0; i < m; ++i) {
      const double phi = 2 * kPi * i / m;
      const Vec x = v2(R * std::cos(phi), R * std::sin(phi));
      const double rho = std::abs(x[0]);
      const double w = 0.5 * R * delta;
      double y = x[1];
      if (x[1] > 0 && rho < w) y -= amp * delta * delta * bump_profile(rho / w);
      best = std::max(best, u[0] * x[0] + u[1] * y);
    }
    EXPECT_NEAR(support(g, u), best, 1e-9) << t;
  }
}

TEST(Factories, Validation) {
  EXPECT_THROW(make_ball(Vec::Zero(2), 0.0), std::invalid_argument);
  EXPECT_THROW(make_ellipsoid(Vec::Zero(2), v2(1, -1)), std::invalid_argument);
  EXPECT_THROW(make_bump_ball(1.0, 0.2, 1.0, v2(0, 2)), std::invalid_argument);
  Mat flat(2, 3);
  flat << 0, 1, 2, 0, 1, 2;
  EXPECT_THROW(make_polytope(flat), std::invalid_argument);
}

TEST(Queries, ClassAndBoxes) {
  EXPECT_TRUE(is_unit_class(square()) == false);
  EXPECT_TRUE(is_unit_class(make_ball(Vec::Zero(2), 1.0)));
  EXPECT_EQ(*rolling_radius(make_ellipsoid(Vec::Zero(2), v2(2, 1))), 0.5);
  EXPECT_FALSE(rolling_radius(square()).has_value());
  const auto [lo, hi] = bounding_box(make_ellipsoid(v2(1, 0), v2(2, 1)));
  EXPECT_NEAR(lo[0], -1, 1e-15);
  EXPECT_NEAR(hi[1], 1, 1e-15);
  EXPECT_NEAR(circumradius(square()), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(kind_name(square()), "polytope_v");
}
