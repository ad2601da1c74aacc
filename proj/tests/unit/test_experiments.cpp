#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "hulllab/experiments.hpp"
#include "hulllab/geometry.hpp"

using namespace hulllab;

namespace {

ExperimentConfig small_ball_config() {
  ExperimentConfig c;
  c.body = make_ball(Vec::Zero(2), 1.0);
  c.n_grid = {100, 300, 1000};
  c.reps = 6;
  c.net_delta = 0.01;
  c.master_seed = 11;
  return c;
}

}  // namespace

TEST(Metric, ParseAndPrint) {
  EXPECT_EQ(parse_metric("hausdorff").kind, MetricKind::hausdorff);
  EXPECT_EQ(parse_metric("dl").kind, MetricKind::dl);
  const Metric lp = parse_metric("lp:2");
  EXPECT_EQ(lp.kind, MetricKind::lp);
  EXPECT_EQ(lp.p, 2.0);
  EXPECT_TRUE(lp.finite_p());
  const Metric t = parse_metric("T:inf");
  EXPECT_EQ(t.kind, MetricKind::functional);
  EXPECT_EQ(t.functional, Functional::T);
  EXPECT_FALSE(t.finite_p());
  for (const char* s : {"hausdorff", "dl", "lp:2", "S:1", "T:inf"}) EXPECT_EQ(to_string(parse_metric(s)), s);
  EXPECT_THROW(parse_metric("lp:0.5"), std::invalid_argument);
  EXPECT_THROW(parse_metric("volume"), std::invalid_argument);
}

TEST(Config, Validation) {
  ExperimentConfig c = small_ball_config();
  EXPECT_NO_THROW(validate(c));
  c.n_grid = {100, 100};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_ball_config();
  c.reps = 1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_ball_config();
  c.q = 0.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_ball_config();
  c.net_delta = 0.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = small_ball_config();
  c.mode = SampleMode::boundary;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c.family = RateFamily::smooth_boundary;
  EXPECT_NO_THROW(validate(c));
}

TEST(Config, DefaultNetDelta) {
  ExperimentConfig c = small_ball_config();
  c.net_delta.reset();
  for (std::int64_t n : {1000, 100000}) {
    const double expected = std::max(net_delta_floor(2), std::min(1e-2, 0.1 * expected_a_n(c, n)));
    EXPECT_EQ(default_net_delta(c, n), expected);
  }
  EXPECT_LE(net_delta_floor(2), net_delta_floor(3));
  EXPECT_LE(net_delta_floor(3), net_delta_floor(4));
}

TEST(Config, FamilyParams) {
  ExperimentConfig c = small_ball_config();
  const ClassParams p = family_params(c);
  EXPECT_EQ(p.alpha, 1.5);
  EXPECT_NEAR(p.big_l, 4.0 / (3.0 * std::numbers::pi), 1e-15);
  c.body = make_ball(Vec::Zero(2), 0.5);
  EXPECT_NEAR(family_params(c).big_l, 4.0 / (3.0 * std::numbers::pi) * std::sqrt(0.5), 1e-12);
}

TEST(Seeds, DistinctPerSlot) {
  EXPECT_NE(replication_seed(1, 0, 0), replication_seed(1, 0, 1));
  EXPECT_NE(replication_seed(1, 0, 0), replication_seed(1, 1, 0));
  EXPECT_NE(replication_seed(1, 0, 0), replication_seed(2, 0, 0));
  EXPECT_EQ(replication_seed(5, 2, 3), replication_seed(5, 2, 3));
}

TEST(ParallelFor, CoversAllIndicesAndRethrows) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(1000, 3, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(50, 2,
                            [](std::int64_t i) {
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Rates, SingleGridPointRejected) {
  ExperimentConfig c = small_ball_config();
  c.n_grid = {1000};
  try {
    run_rate_experiment(c);
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "need >= 2 grid points for slope");
  }
}

TEST(Rates, DeterministicAndThreadIndependent) {
  ExperimentConfig c = small_ball_config();
  const RateReport a = run_rate_experiment(c);
  const RateReport b = run_rate_experiment(c);
  EXPECT_EQ(a, b);
  c.threads = 3;
  EXPECT_EQ(run_rate_experiment(c), a);
  ASSERT_EQ(a.rows.size(), 3u);
  EXPECT_EQ(a.regressor, "log(ln n/n)");
  EXPECT_NEAR(a.theoretical_slope, 2.0 / 3.0, 1e-15);
  for (const RateRow& row : a.rows) {
    EXPECT_EQ(row.reps, 6);
    EXPECT_GT(row.mean_metric_q, 0.0);
    EXPECT_EQ(row.net_delta, 0.01);
  }
  EXPECT_GT(a.rows.front().mean_metric_q, a.rows.back().mean_metric_q);
  EXPECT_GT(a.slope, 0.0);
}

TEST(Rates, ReplicationsMatchReportMeans) {
  ExperimentConfig c = small_ball_config();
  c.q = 2.0;
  const RateReport r = run_rate_experiment(c);
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    const std::vector<double> v = run_replications(c, i);
    ASSERT_EQ(v.size(), 6u);
    double mean = 0.0;
    for (double x : v) mean += x * x / 6.0;
    EXPECT_NEAR(r.rows[i].mean_metric_q, mean, 1e-15 * mean);
  }
}

TEST(Rates, FiniteMetricUsesLogN) {
  ExperimentConfig c = small_ball_config();
  c.metric = parse_metric("S:1");
  c.quad_n = 2048;
  const RateReport r = run_rate_experiment(c);
  EXPECT_EQ(r.regressor, "log n");
  EXPECT_NEAR(r.theoretical_slope, -2.0 / 3.0, 1e-15);
}

TEST(Deviation, ZeroAndFarTail) {
  ExperimentConfig c = small_ball_config();
  c.n_grid = {500};
  c.reps = 30;
  const ClassParams p = family_params(c);
  const DeviationBound bound = deviation_bound(p, 2, 500);
  const double far = (1.0 - bound.a_n) / bound.b_n * 1.01;
  const DeviationReport r = run_deviation_experiment(c, {0.0, 1.0, 5.0, far});
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.rows[0].theoretical_tail, 1.0);
  EXPECT_FALSE(r.rows[0].violation);
  EXPECT_EQ(r.rows[3].theoretical_tail, 0.0);
  EXPECT_EQ(r.rows[3].empirical_survival, 0.0);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_LE(r.rows[i].empirical_survival, r.rows[i - 1].empirical_survival);
  }
  EXPECT_EQ(r.violations, 0);
  EXPECT_EQ(r.rows[1].threshold, bound.threshold(1.0));
}

TEST(Deviation, InputChecks) {
  ExperimentConfig c = small_ball_config();
  EXPECT_THROW(run_deviation_experiment(c, {0.0}), std::invalid_argument);
  c.n_grid = {500};
  EXPECT_THROW(run_deviation_experiment(c, {}), std::invalid_argument);
  EXPECT_THROW(run_deviation_experiment(c, {2.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(run_deviation_experiment(c, {-1.0}), std::invalid_argument);
  c.metric = parse_metric("dl");
  EXPECT_THROW(run_deviation_experiment(c, {0.0}), std::invalid_argument);
}

TEST(Bump, ProfileMomentOneDimensional) {
  // A_1 = 2 and the moment reduces to 2∫₀¹ profile.
  double integral = 0.0;
  const int m = 200000;
  for (int k = 0; k < m; ++k) integral += bump_profile((k + 0.5) / m) / m;
  EXPECT_NEAR(bump_profile_moment(1), 2.0 * integral, 1e-7);
}

TEST(Bump, VolumeDefectMatchesMonteCarlo) {
  const double amp = 0.5 * admissible_bump_amplitude(2, 1.0, 0.5, 0.1);
  const BumpBall g = make_bump_ball(1.0, 0.1, amp, (Vec(2) << 0.6, 0.8).finished());
  const double exact = bump_volume_defect(g);
  const MonteCarloEstimate mc = bump_volume_defect_mc(g, 400000, 3);
  EXPECT_NEAR(mc.value, exact, 4 * mc.stderr_value);
  EXPECT_NEAR(exact / std::pow(0.1, 3), amp * bump_profile_moment(1) / 2.0, 1e-12);
}

TEST(Bump, AdmissibleAmplitude) {
  const double a = admissible_bump_amplitude(2, 1.0, 0.5, 0.05);
  EXPECT_GT(a, 0.0);
  EXPECT_TRUE(bump_is_convex(make_bump_ball(1.0, 0.05, a, (Vec(2) << 1, 0).finished())));
  EXPECT_FALSE(bump_is_convex(make_bump_ball(1.0, 0.05, 50 * a, (Vec(2) << 1, 0).finished())));
  EXPECT_THROW(build_lower_bound_family(2, 1.0, 0.05, 50 * a, 1), std::domain_error);
}

TEST(Bump, FamilyPairsSeparatedByAmplitude) {
  const double delta = 0.1;
  const double amp = 0.5 * admissible_bump_amplitude(2, 1.0, 0.5, delta);
  const LowerBoundFamily fam = build_lower_bound_family(2, 1.0, delta, amp, 4);
  ASSERT_EQ(fam.bodies.size(), static_cast<std::size_t>(fam.directions.cols()) + 1);
  EXPECT_TRUE(std::holds_alternative<Ball>(fam.bodies.front()));
  EXPECT_GE(static_cast<double>(fam.directions.cols()), std::numbers::pi / delta);
  const std::vector<PairCheck> pairs = check_family_pairs(fam, 4, 1e-3, 5);
  ASSERT_EQ(pairs.size(), 4u);
  for (const PairCheck& pc : pairs) {
    EXPECT_GE(pc.separation, delta);
    EXPECT_NEAR(pc.expected, amp * delta * delta, 1e-15);
    EXPECT_NEAR(pc.distance.refined_value, pc.expected, 1e-9);
    EXPECT_TRUE(pc.within_certification);
  }
}
