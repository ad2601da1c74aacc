#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hulllab/bounds.hpp"
#include "hulllab/estimators.hpp"
#include "hulllab/geometry.hpp"
#include "hulllab/sampler.hpp"
#include "hulllab/sphere_net.hpp"

namespace hulllab {

// ---------------------------------------------------------------------------
// configuration

enum class MetricKind { hausdorff, dl, lp, functional };

struct Metric {
  MetricKind kind = MetricKind::hausdorff;
  double p = 1.0;                         // lp and functional
  Functional functional = Functional::S;  // functional only

  /// Finite-p metrics converge without the logarithmic factor.
  bool finite_p() const { return (kind == MetricKind::lp || kind == MetricKind::functional) && std::isfinite(p); }
};

/// "hausdorff", "dl", "lp:P", "T:P", "S:P" (P a number or "inf").
Metric parse_metric(const std::string& text);
std::string to_string(const Metric& metric);

struct ExperimentConfig {
  BodySpec body;
  SampleMode mode = SampleMode::interior;
  RateFamily family = RateFamily::smooth_interior;
  std::vector<std::int64_t> n_grid;
  int reps = 2;
  double q = 1.0;
  Metric metric;
  std::optional<double> net_delta;  // default: see default_net_delta
  std::int64_t quad_n = kDefaultQuadN;
  std::uint64_t master_seed = 0;
  int threads = 1;  // 0 = hardware concurrency
};

void validate(const ExperimentConfig& config);

/// Class parameters the theory assigns to (body, family): smooth families
/// use the certified rolling radius (clamped to 1), polytopes α = d with the
/// fitted constant.
ClassParams family_params(const ExperimentConfig& config);

/// Expected a_n used to size the net: the deviation-bound a_n for smooth
/// families, (ln n / n)^{1/d} for polytopes.
double expected_a_n(const ExperimentConfig& config, std::int64_t n);

/// Smallest net spacing allowed for dimension d (bounded net cardinality).
double net_delta_floor(int d);

/// max(floor(d), min(1e-2, 0.1·a_n)).
double default_net_delta(const ExperimentConfig& config, std::int64_t n);

/// Seed of replication `rep` at grid index `n_index`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n_index, std::int64_t rep);

/// Runs task(i) for i in [0, count) on a pool of worker threads. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& task);

// ---------------------------------------------------------------------------
// rate experiment

struct RateRow {
  std::int64_t n = 0;
  double mean_metric_q = 0.0;
  double stderr_metric_q = 0.0;
  int reps = 0;
  double net_delta = 0.0;

  bool operator==(const RateRow&) const = default;
};

struct RateReport {
  std::string body_kind;
  std::string mode;
  std::string family;
  std::string metric;
  int dim = 0;
  double q = 1.0;
  std::uint64_t master_seed = 0;
  std::string regressor;  // "log(ln n/n)" or "log n"
  std::vector<RateRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double ci_half_width = 0.0;
  double theoretical_slope = 0.0;

  bool operator==(const RateReport&) const = default;
};

/// Per-n mean of metric^q over independent replications and the OLS slope of
/// log(mean) against log(ln n/n), or against log n for finite-p metrics.
RateReport run_rate_experiment(const ExperimentConfig& config);

/// Metric values of every replication at one grid point (slot r holds
/// replication r).
std::vector<double> run_replications(const ExperimentConfig& config, std::size_t n_index);

// ---------------------------------------------------------------------------
// deviation experiment

struct DeviationRow {
  double x = 0.0;
  double threshold = 0.0;
  double empirical_survival = 0.0;
  double theoretical_tail = 0.0;
  bool violation = false;

  bool operator==(const DeviationRow&) const = default;
};

struct DeviationReport {
  std::int64_t n = 0;
  int reps = 0;
  int dim = 0;
  ClassParams params;
  double a_n = 0.0;
  double b_n = 0.0;
  double tau1 = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<DeviationRow> rows;
  int violations = 0;

  bool operator==(const DeviationReport& o) const {
    return n == o.n && reps == o.reps && dim == o.dim && params.alpha == o.params.alpha &&
           params.big_l == o.params.big_l && params.eps0 == o.params.eps0 && a_n == o.a_n && b_n == o.b_n &&
           tau1 == o.tau1 && master_seed == o.master_seed && rows == o.rows && violations == o.violations;
  }
};

/// Empirical survival of the Hausdorff error at the single n of the config,
/// against the deviation-bound tail. A grid point is a violation when the
/// empirical survival exceeds the tail by more than 3 binomial standard
/// deviations.
DeviationReport run_deviation_experiment(const ExperimentConfig& config, const std::vector<double>& x_grid);
DeviationReport run_deviation_experiment(const ExperimentConfig& config, const std::vector<double>& x_grid,
                                         const ClassParams& params);

// ---------------------------------------------------------------------------
// lower-bound family

/// ∫₀¹ bump_profile(ρ) ρ^{m−1} dρ · A_m (A_1 = 2).
double bump_profile_moment(int m);

/// Volume of Ball(0,R) minus the bump body: c·δ^{d+1} with
/// c = amplitude·R^{d−1}·bump_profile_moment(d−1)/2^{d−1}.
double bump_volume_defect(const BumpBall& body);

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_value = 0.0;
};

/// Monte Carlo estimate of the same volume from a box around the bump.
MonteCarloEstimate bump_volume_defect_mc(const BumpBall& body, std::int64_t points, std::uint64_t seed);

/// True iff the dented profile stays concave and nonincreasing in the radial
/// coordinate, i.e. the body is convex.
bool bump_is_convex(const BumpBall& body);

/// Largest amplitude keeping the body convex with principal curvatures
/// <= 1/r along the dent (bisection on the profile grid).
double admissible_bump_amplitude(int d, double radius, double r, double delta);

struct LowerBoundFamily {
  int dim = 0;
  double radius = 0.0;
  double delta = 0.0;
  double amplitude = 0.0;
  std::vector<BodySpec> bodies;  // G0 first, then one bump body per packing direction
  Mat directions;                // packing directions, d × N
  double defect_constant = 0.0;  // c in |G0 \ G(u)| = c δ^{d+1}
  double volume_defect = 0.0;
};

/// Ball(0,R) and the bump bodies G(u_j) over a maximal δ-packing. Throws
/// std::domain_error when the amplitude breaks convexity, and when a bump
/// body is not nested between Ball(0, R − amplitude·δ²) and Ball(0,R).
LowerBoundFamily build_lower_bound_family(int d, double radius, double delta, double amplitude,
                                          std::uint64_t seed);

struct PairCheck {
  Eigen::Index first = 0;
  Eigen::Index second = 0;
  double separation = 0.0;
  DistanceResult distance;
  double expected = 0.0;
  bool within_certification = false;
};

/// Hausdorff distances between G(u_j) and the bump body whose direction is
/// farthest from u_j, for the first `pairs` packing directions.
std::vector<PairCheck> check_family_pairs(const LowerBoundFamily& family, int pairs, double net_delta,
                                          std::uint64_t seed);

}  // namespace hulllab
