#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hulllab/estimators.hpp"
#include "hulllab/geometry.hpp"
#include "hulllab/rng.hpp"
#include "hulllab/sphere_net.hpp"

using namespace hulllab;

namespace {

constexpr double kPi = std::numbers::pi;

double brute_min_pairwise(const Mat& dirs) {
  double best = 1e300;
  for (Eigen::Index i = 0; i < dirs.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < dirs.cols(); ++j) best = std::min(best, (dirs.col(i) - dirs.col(j)).norm());
  }
  return best;
}

}  // namespace

TEST(PointGrid, MatchesBruteForce) {
  for (int d : {2, 3, 4}) {
    std::mt19937_64 gen(d);
    std::normal_distribution<double> g;
    Mat pts(d, 800);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      for (int k = 0; k < d; ++k) pts(k, i) = g(gen);
      pts.col(i).normalize();
    }
    PointGrid grid(d, 0.1);
    for (Eigen::Index i = 0; i < pts.cols(); ++i) grid.insert(pts.col(i).data(), i);
    for (int q = 0; q < 200; ++q) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x[k] = g(gen);
      x.normalize();
      Eigen::Index best = -1;
      double best_d = 1e300;
      for (Eigen::Index i = 0; i < pts.cols(); ++i) {
        double s2 = 0.0;
        for (int k = 0; k < d; ++k) s2 += (pts(k, i) - x[k]) * (pts(k, i) - x[k]);
        const double dist = std::sqrt(s2);
        if (dist < best_d) {
          best_d = dist;
          best = i;
        }
      }
      const auto [idx, dist] = grid.nearest(x.data(), pts);
      EXPECT_EQ(idx, best);
      EXPECT_DOUBLE_EQ(dist, best_d);
      EXPECT_EQ(grid.any_within(x.data(), best_d * 1.0000001, pts), true);
      EXPECT_EQ(grid.any_within(x.data(), best_d, pts), false);
      EXPECT_DOUBLE_EQ(grid.nearest_distance_within(x.data(), 0.5, pts), std::min(0.5, best_d));
    }
  }
}

TEST(Net, OneDimensional) {
  const SphereNet net = build_net(1, 0.5, 3);
  ASSERT_EQ(net.size(), 2);
  EXPECT_EQ(net.direction(0)[0] * net.direction(1)[0], -1.0);
  EXPECT_LE(net.size(), 6);
}

TEST(Net, CircleCardinalityOracle) {
  for (double delta : {0.5, 0.2, 0.05}) {
    const SphereNet net = build_net(2, delta, 5);
    const double theta = 2.0 * std::asin(0.5 * delta);
    // Maximal packing: consecutive angular gaps lie in [θ, 2θ).
    std::vector<double> angles;
    for (Eigen::Index i = 0; i < net.size(); ++i) angles.push_back(std::atan2(net.direction(i)[1], net.direction(i)[0]));
    std::sort(angles.begin(), angles.end());
    for (std::size_t i = 0; i < angles.size(); ++i) {
      const double gap = (i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2 * kPi) - angles[i];
      EXPECT_GE(gap, theta * (1 - 1e-12));
      EXPECT_LT(gap, 2 * theta);
    }
    EXPECT_GE(static_cast<double>(net.size()), std::floor(kPi / theta));
    EXPECT_LE(static_cast<double>(net.size()), std::floor(2 * kPi / theta));
    EXPECT_LE(static_cast<double>(net.size()), std::pow(3.0 / delta, 2));
  }
  EXPECT_GE(build_net(2, 0.5, 1).size(), 6);
}

TEST(Net, PackingCoveringAndCardinality) {
  for (int d : {2, 3}) {
    for (double delta : {0.3, 0.1}) {
      const SphereNet net = build_net(d, delta, 17);
      EXPECT_GE(brute_min_pairwise(net.directions()), delta);
      EXPECT_DOUBLE_EQ(net.min_pairwise_distance(), brute_min_pairwise(net.directions()));
      EXPECT_LE(static_cast<double>(net.size()), std::pow(3.0 / delta, d));
      EXPECT_LE(net.probe_covering_radius(100000, 99), delta);
      for (Eigen::Index i = 0; i < net.size(); ++i) EXPECT_NEAR(net.direction(i).norm(), 1.0, 1e-12);
    }
  }
}

TEST(Net, FourDimensionalPacking) {
  const SphereNet net = build_net(4, 0.5, 2);
  EXPECT_GE(brute_min_pairwise(net.directions()), 0.5);
  EXPECT_LE(static_cast<double>(net.size()), std::pow(6.0, 4));
}

TEST(Net, Deterministic) {
  const SphereNet a = build_net(3, 0.2, 42);
  const SphereNet b = build_net(3, 0.2, 42);
  EXPECT_EQ(a.directions(), b.directions());
  const SphereNet c = build_net(3, 0.2, 43);
  EXPECT_FALSE(c.size() == a.size() && c.directions() == a.directions());
}

TEST(Net, CardinalityBudget) {
  NetOptions opts;
  opts.max_points = 10;
  EXPECT_THROW(build_net(2, 0.1, 1, opts), std::length_error);
}

TEST(Net, ArgumentChecks) {
  EXPECT_THROW(build_net(0, 0.1, 1), std::invalid_argument);
  EXPECT_THROW(build_net(2, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(build_net(2, 1.5, 1), std::invalid_argument);
}

TEST(Decompose, NetPointIsExact) {
  const SphereNet net = build_net(2, 0.25, 4);
  const Decomposition dec = decompose(net, net.direction(3), 5);
  EXPECT_EQ(dec.u0, net.direction(3));
  for (double c : dec.coefficients) EXPECT_EQ(c, 0.0);
}

TEST(Decompose, ReconstructionError) {
  for (int d : {2, 3}) {
    const double delta = d == 2 ? 0.25 : 0.3;
    const int depth = d == 2 ? 10 : 8;
    const SphereNet net = build_net(d, delta, 8);
    CounterRng rng(5);
    for (int t = 0; t < 50; ++t) {
      const Vec u = uniform_on_sphere(rng, d);
      const Decomposition dec = decompose(net, u, depth);
      EXPECT_LE((reconstruct(dec) - u).norm(), std::pow(delta, depth + 1));
      for (std::size_t j = 0; j < dec.coefficients.size(); ++j) {
        EXPECT_GE(dec.coefficients[j], 0.0);
        EXPECT_LE(dec.coefficients[j], std::pow(delta, static_cast<double>(j + 1)) * (1 + 1e-12));
      }
    }
  }
}

TEST(Decompose, CoveringViolation) {
  Mat two(2, 2);
  two << 1, -1, 0, 0;
  const SphereNet sparse(2, 0.1, 0, two, 0.0);
  EXPECT_THROW(decompose(sparse, (Vec(2) << 0, 1).finished(), 3), std::runtime_error);
}

TEST(CertifiedSup, IdenticalBodies) {
  const SphereNet net = build_net(2, 0.05, 1);
  std::vector<double> h(static_cast<std::size_t>(net.size()), 0.8);
  const SupBracket b = certified_sup_deficit(net, h, h);
  EXPECT_EQ(b.net_sup, 0.0);
  EXPECT_LE(b.certified_sup, 8 * 0.05);
}

TEST(CertifiedSup, ConcentricBalls) {
  const SphereNet net = build_net(3, 0.1, 1);
  const BodySpec big = make_ball(Vec::Zero(3), 1.0);
  const BodySpec small = make_ball(Vec::Zero(3), 0.9);
  const SupBracket b = certified_sup_deficit(net, body_support_values(big, net.directions()),
                                             body_support_values(small, net.directions()));
  EXPECT_NEAR(b.net_sup, 0.1, 1e-15);
  EXPECT_LE(b.net_sup, 0.1 + 1e-15);
  EXPECT_GE(b.certified_sup, 0.1);
}

TEST(CertifiedSup, SquareAgainstDenseSweep) {
  Mat v(2, 4);
  v << 1, 1, -1, -1, 1, -1, 1, -1;
  const BodySpec sq = make_polytope(v);
  CounterRng rng(100);
  Mat pts(2, 100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    pts(0, i) = 2 * rng.uniform() - 1;
    pts(1, i) = 2 * rng.uniform() - 1;
  }
  const HullSupport hull(pts);
  const SphereNet net = build_net(2, 0.01, 3);
  std::vector<double> small(static_cast<std::size_t>(net.size()));
  for (Eigen::Index i = 0; i < net.size(); ++i) small[i] = hull_support(pts, net.direction(i));
  const SupBracket b = certified_sup_deficit(net, body_support_values(sq, net.directions()), small, std::sqrt(2.0));
  double dense = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double t = 2 * std::numbers::pi * i / 100000;
    const Vec u = (Vec(2) << std::cos(t), std::sin(t)).finished();
    dense = std::max(dense, support(sq, u) - hull_support(pts, u));
  }
  EXPECT_LE(b.net_sup, dense + 1e-12);
  EXPECT_GE(b.certified_sup, dense);
}

TEST(CertifiedSup, NonNestedInputsRejected) {
  const SphereNet net = build_net(2, 0.1, 1);
  std::vector<double> big(static_cast<std::size_t>(net.size()), 0.5);
  std::vector<double> small(static_cast<std::size_t>(net.size()), 0.5);
  small[2] = 0.5 + 1e-6;
  EXPECT_THROW(certified_sup_deficit(net, big, small), std::domain_error);
  small[2] = 0.5 + 1e-10;
  EXPECT_EQ(certified_sup_deficit(net, big, small).net_sup, 0.0);
}

TEST(Refine, FindsSmoothMaximum) {
  const SphereNet net = build_net(3, 0.2, 6);
  const Vec target = (Vec(3) << 0.3, -0.5, 0.8).finished().normalized();
  auto g = [&](const Vec& u) { return dot(u, target); };
  std::vector<double> values(static_cast<std::size_t>(net.size()));
  for (Eigen::Index i = 0; i < net.size(); ++i) values[i] = g(net.direction(i));
  const double net_max = *std::max_element(values.begin(), values.end());
  const double refined = refine_sup(net, values, g);
  EXPECT_GE(refined, net_max);
  EXPECT_NEAR(refined, 1.0, 1e-10);
}
