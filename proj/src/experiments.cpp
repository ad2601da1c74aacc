#include "hulllab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hulllab/rng.hpp"

namespace hulllab {

// ---------------------------------------------------------------------------
// configuration

Metric parse_metric(const std::string& text) {
  auto parse_p = [&](const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double p = 0.0;
    try {
      p = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(p >= 1.0)) throw std::invalid_argument("metric '" + text + "': p must be >= 1 or inf");
    return p;
  };
  Metric m;
  if (text == "hausdorff") return m;
  if (text == "dl") {
    m.kind = MetricKind::dl;
    return m;
  }
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "1" : text.substr(colon + 1);
  if (head == "lp") {
    m.kind = MetricKind::lp;
    m.p = parse_p(tail);
    return m;
  }
  if (head == "T" || head == "S") {
    m.kind = MetricKind::functional;
    m.functional = head == "T" ? Functional::T : Functional::S;
    m.p = parse_p(tail);
    return m;
  }
  throw std::invalid_argument("unknown metric '" + text + "' (expected hausdorff|dl|lp:P|T:P|S:P)");
}

std::string to_string(const Metric& metric) {
  auto p_text = [&] {
    if (std::isinf(metric.p)) return std::string("inf");
    std::string s = std::to_string(metric.p);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (metric.kind) {
    case MetricKind::hausdorff:
      return "hausdorff";
    case MetricKind::dl:
      return "dl";
    case MetricKind::lp:
      return "lp:" + p_text();
    case MetricKind::functional:
      return to_string(metric.functional) + ":" + p_text();
  }
  return "unknown";
}

void validate(const ExperimentConfig& config) {
  validate(config.body);
  if (config.n_grid.empty()) throw std::invalid_argument("experiment: empty n_grid");
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] < 2) throw std::invalid_argument("experiment: every n must be >= 2");
    if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) {
      throw std::invalid_argument("experiment: n_grid must be strictly increasing");
    }
  }
  if (config.reps < 2) throw std::invalid_argument("experiment: reps must be >= 2");
  if (!(config.q >= 1.0)) throw std::invalid_argument("experiment: q must be >= 1");
  if (config.net_delta && !(*config.net_delta > 0.0 && *config.net_delta <= 1.0)) {
    throw std::invalid_argument("experiment: net_delta must lie in (0, 1]");
  }
  if (config.quad_n < 2) throw std::invalid_argument("experiment: quad_n must be >= 2");
  if (config.mode == SampleMode::boundary && config.family != RateFamily::smooth_boundary) {
    throw std::invalid_argument("experiment: boundary sampling pairs with the smooth_boundary family");
  }
  if (config.family == RateFamily::smooth_boundary && config.mode != SampleMode::boundary) {
    throw std::invalid_argument("experiment: the smooth_boundary family needs boundary sampling");
  }
}

namespace {

double smooth_radius(const BodySpec& body) {
  const auto r = rolling_radius(body);
  if (!r) throw std::invalid_argument("experiment: smooth families need a body with a certified rolling radius");
  return std::min(1.0, *r);
}

}  // namespace

ClassParams family_params(const ExperimentConfig& config) {
  const int d = static_cast<int>(dim(config.body));
  switch (config.family) {
    case RateFamily::smooth_interior:
      return class_params_smooth(d, smooth_radius(config.body));
    case RateFamily::smooth_boundary:
      return class_params_boundary(d, smooth_radius(config.body));
    case RateFamily::polytope_interior: {
      MembershipOptions options;
      options.seed = CounterRng(config.master_seed).split(4).key();
      return class_params_polytope(config.body, options);
    }
  }
  throw std::invalid_argument("experiment: invalid family");
}

double expected_a_n(const ExperimentConfig& config, std::int64_t n) {
  const int d = static_cast<int>(dim(config.body));
  const double nn = static_cast<double>(n);
  if (config.family == RateFamily::polytope_interior) return std::pow(std::log(nn) / nn, 1.0 / d);
  return deviation_bound(family_params(config), d, n).a_n;
}

double net_delta_floor(int d) {
  if (d <= 2) return 1e-4;
  if (d == 3) return 1.2e-2;
  if (d == 4) return 8e-2;
  return 0.3;
}

double default_net_delta(const ExperimentConfig& config, std::int64_t n) {
  const int d = static_cast<int>(dim(config.body));
  return std::max(net_delta_floor(d), std::min(1e-2, 0.1 * expected_a_n(config, n)));
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n_index, std::int64_t rep) {
  CounterRng rng = CounterRng(master_seed).split(1).split(n_index).split(static_cast<std::uint64_t>(rep));
  return rng();
}

void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& task) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(1, count)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// replications

namespace {

struct GridResources {
  std::optional<SphereNet> net;
  std::vector<double> body_on_net;
  std::optional<Quadrature> quad;
  std::vector<double> body_on_quad;
  double body_functional = 0.0;
};

bool needs_net(const Metric& m) { return !m.finite_p(); }

// Nets depend on (master seed, δ) only, so grid points sharing δ share a net.
std::uint64_t net_seed(std::uint64_t master_seed, double delta) {
  return CounterRng(master_seed).split(2).split(std::bit_cast<std::uint64_t>(delta)).key();
}

GridResources prepare_grid_point(const ExperimentConfig& config, double delta) {
  const int d = static_cast<int>(dim(config.body));
  GridResources res;
  if (needs_net(config.metric)) {
    res.net.emplace(build_net(d, delta, net_seed(config.master_seed, delta)));
    res.body_on_net = body_support_values(config.body, res.net->directions());
    if (config.metric.kind == MetricKind::functional) {
      res.body_functional = functional_body_sup(config.body, config.metric.functional, *res.net);
    }
  } else {
    res.quad.emplace(make_quadrature(d, config.quad_n, CounterRng(config.master_seed).split(3).key()));
    res.body_on_quad = body_support_values(config.body, res.quad->directions);
    if (config.metric.kind == MetricKind::functional) {
      res.body_functional = functional_value(res.body_on_quad, config.metric.functional, config.metric.p);
    }
  }
  return res;
}

double replication_metric(const ExperimentConfig& config, const GridResources& res, const HullSupport& hull) {
  const Metric& m = config.metric;
  switch (m.kind) {
    case MetricKind::hausdorff:
      return hausdorff_to_body(config.body, hull, *res.net, res.body_on_net).refined_value;
    case MetricKind::dl:
      return d_l_estimate(config.body, analytic_center(config.body), hull, *res.net, res.body_on_net).refined_value;
    case MetricKind::lp: {
      if (!m.finite_p()) return hausdorff_to_body(config.body, hull, *res.net, res.body_on_net).refined_value;
      return lp_error(res.body_on_quad, hull, m.p, *res.quad);
    }
    case MetricKind::functional: {
      const double hull_value = m.finite_p()
                                    ? functional_value(hull.evaluate_all(res.quad->directions), m.functional, m.p)
                                    : functional_hull_sup(hull, m.functional, *res.net);
      return std::abs(res.body_functional - hull_value);
    }
  }
  throw std::invalid_argument("experiment: invalid metric");
}

std::vector<double> run_grid_point(const ExperimentConfig& config, std::size_t n_index, const GridResources& res) {
  const std::int64_t n = config.n_grid.at(n_index);
  std::vector<double> values(static_cast<std::size_t>(config.reps));
  parallel_for(config.reps, config.threads, [&](std::int64_t rep) {
    const SampleCloud cloud = sample(config.body, config.mode, n, replication_seed(config.master_seed, n_index, rep));
    const HullSupport hull(cloud.points);
    values[static_cast<std::size_t>(rep)] = replication_metric(config, res, hull);
  });
  return values;
}

double grid_delta(const ExperimentConfig& config, std::size_t n_index) {
  if (!needs_net(config.metric)) return 0.0;
  return config.net_delta ? *config.net_delta : default_net_delta(config, config.n_grid.at(n_index));
}

}  // namespace

std::vector<double> run_replications(const ExperimentConfig& config, std::size_t n_index) {
  validate(config);
  const GridResources res = prepare_grid_point(config, grid_delta(config, n_index));
  return run_grid_point(config, n_index, res);
}

RateReport run_rate_experiment(const ExperimentConfig& config) {
  validate(config);
  if (config.n_grid.size() < 2) throw std::invalid_argument("need >= 2 grid points for slope");
  const int d = static_cast<int>(dim(config.body));
  RateReport report;
  report.body_kind = kind_name(config.body);
  report.mode = to_string(config.mode);
  report.family = to_string(config.family);
  report.metric = to_string(config.metric);
  report.dim = d;
  report.q = config.q;
  report.master_seed = config.master_seed;
  report.regressor = config.metric.finite_p() ? "log n" : "log(ln n/n)";

  std::vector<double> xs;
  std::vector<double> ys;
  std::optional<GridResources> res;
  double res_delta = -1.0;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    const double delta = grid_delta(config, i);
    if (!res || delta != res_delta) {
      res.emplace(prepare_grid_point(config, delta));
      res_delta = delta;
    }
    const std::vector<double> values = run_grid_point(config, i, *res);
    double sum = 0.0;
    for (double v : values) sum += std::pow(v, config.q);
    const double mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (std::pow(v, config.q) - mean) * (std::pow(v, config.q) - mean);
    var /= static_cast<double>(values.size() - 1);
    if (!std::isfinite(mean) || !(mean > 0.0)) {
      throw std::runtime_error("rate experiment: non-finite or zero mean at n = " + std::to_string(config.n_grid[i]));
    }
    const auto n = static_cast<double>(config.n_grid[i]);
    report.rows.push_back(RateRow{config.n_grid[i], mean, std::sqrt(var / static_cast<double>(values.size())),
                                  config.reps, delta});
    xs.push_back(config.metric.finite_p() ? std::log(n) : std::log(std::log(n) / n));
    ys.push_back(std::log(mean));
  }
  const SlopeFit fit = fit_slope(xs, ys);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.ci_half_width = fit.half_width;
  const double e = config.q * rate_exponent(config.family, d);
  report.theoretical_slope = config.metric.finite_p() ? -e : e;
  return report;
}

// ---------------------------------------------------------------------------
// deviation experiment

DeviationReport run_deviation_experiment(const ExperimentConfig& config, const std::vector<double>& x_grid) {
  return run_deviation_experiment(config, x_grid, family_params(config));
}

DeviationReport run_deviation_experiment(const ExperimentConfig& config, const std::vector<double>& x_grid,
                                         const ClassParams& params) {
  validate(config);
  if (config.n_grid.size() != 1) throw std::invalid_argument("deviation experiment: n_grid must hold exactly one n");
  if (config.metric.kind != MetricKind::hausdorff) {
    throw std::invalid_argument("deviation experiment: the bound concerns the Hausdorff metric");
  }
  if (x_grid.empty()) throw std::invalid_argument("deviation experiment: empty x grid");
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(x_grid[i] >= 0.0)) throw std::invalid_argument("deviation experiment: x must be >= 0");
    if (i > 0 && x_grid[i] < x_grid[i - 1]) throw std::invalid_argument("deviation experiment: x grid must be sorted");
  }
  const int d = static_cast<int>(dim(config.body));
  const std::int64_t n = config.n_grid.front();
  const DeviationBound bound = deviation_bound(params, d, n);
  const std::vector<double> values = run_replications(config, 0);

  DeviationReport report;
  report.n = n;
  report.reps = config.reps;
  report.dim = d;
  report.params = params;
  report.a_n = bound.a_n;
  report.b_n = bound.b_n;
  report.tau1 = bound.tau1;
  report.master_seed = config.master_seed;
  const auto reps = static_cast<double>(values.size());
  for (double x : x_grid) {
    DeviationRow row;
    row.x = x;
    row.threshold = bound.threshold(x);
    std::int64_t hits = 0;
    for (double v : values) {
      if (v >= row.threshold) ++hits;
    }
    row.empirical_survival = static_cast<double>(hits) / reps;
    row.theoretical_tail = bound.tail(x);
    const double t = row.theoretical_tail;
    row.violation = row.empirical_survival > t + 3.0 * std::sqrt(t * (1.0 - t) / reps);
    if (row.violation) ++report.violations;
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// lower-bound family

double bump_profile_moment(int m) {
  if (m < 1) throw std::invalid_argument("bump_profile_moment: m must be >= 1");
  const double integral = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [m](double rho) { return bump_profile(rho) * std::pow(rho, m - 1); }, 0.0, 1.0, 12, 1e-12);
  return sphere_area(m) * integral;
}

double bump_volume_defect(const BumpBall& body) {
  const int d = static_cast<int>(body.direction.size());
  if (d < 2) throw std::invalid_argument("bump_volume_defect: dimension must be >= 2");
  const double c = body.amplitude * std::pow(body.radius, d - 1) * bump_profile_moment(d - 1) / std::exp2(d - 1);
  return c * std::pow(body.bump_scale, d + 1);
}

MonteCarloEstimate bump_volume_defect_mc(const BumpBall& body, std::int64_t points, std::uint64_t seed) {
  const Eigen::Index d = body.direction.size();
  if (d < 2) throw std::invalid_argument("bump_volume_defect_mc: dimension must be >= 2");
  if (points < 1) throw std::invalid_argument("bump_volume_defect_mc: points must be >= 1");
  const double R = body.radius;
  const double w = 0.5 * R * body.bump_scale;
  const double depth = body.amplitude * body.bump_scale * body.bump_scale;
  const double z_lo = std::sqrt(R * R - w * w) - depth;
  const double box = std::pow(2.0 * w, static_cast<double>(d - 1)) * (R - z_lo);
  CounterRng rng(seed);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < points; ++i) {
    double rho2 = 0.0;
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
      const double t = -w + 2.0 * w * rng.uniform();
      rho2 += t * t;
    }
    const double z = z_lo + (R - z_lo) * rng.uniform();
    const double rho = std::sqrt(rho2);
    if (rho >= w) continue;
    const double top = std::sqrt(R * R - rho2);
    const double offset = depth * bump_profile(rho / w);
    if (z <= top && z > top - offset) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(points);
  return {box * p, box * std::sqrt(p * (1.0 - p) / static_cast<double>(points))};
}

namespace {

struct ProfileDerivatives {
  double slope;      // d top / dρ
  double curvature;  // d² top / dρ²
  double rho;
};

// Radial profile top(ρ) = sqrt(R² − ρ²) − A δ² η(2ρ/(Rδ)) on the dent.
template <class F>
bool scan_profile(double radius, double delta, double amplitude, F&& accept) {
  constexpr int kSamples = 4000;
  const double w = 0.5 * radius * delta;
  const double scale = 2.0 / (radius * delta);
  for (int i = 0; i < kSamples; ++i) {
    const double s = static_cast<double>(i) / kSamples;
    const double rho = s * w;
    const double root = std::sqrt(radius * radius - rho * rho);
    const double slope = -rho / root - amplitude * delta * delta * scale * bump_profile_d1(s);
    const double curvature =
        -radius * radius / (root * root * root) - amplitude * delta * delta * scale * scale * bump_profile_d2(s);
    if (!accept(ProfileDerivatives{slope, curvature, rho})) return false;
  }
  return true;
}

bool profile_convex(double radius, double delta, double amplitude) {
  return scan_profile(radius, delta, amplitude,
                      [](const ProfileDerivatives& p) { return p.slope <= 1e-12 && p.curvature <= 1e-12; });
}

}  // namespace

bool bump_is_convex(const BumpBall& body) { return profile_convex(body.radius, body.bump_scale, body.amplitude); }

double admissible_bump_amplitude(int d, double radius, double r, double delta) {
  if (!(r > 0.0 && r < radius && radius <= 1.0)) throw std::invalid_argument("admissible_bump_amplitude: need 0 < r < R <= 1");
  if (!(delta > 0.0 && delta <= 2.0)) throw std::invalid_argument("admissible_bump_amplitude: delta must lie in (0, 2]");
  const double kappa_max = 1.0 / r;
  auto ok = [&](double amplitude) {
    if (!(amplitude * delta * delta < radius)) return false;
    return scan_profile(radius, delta, amplitude, [&](const ProfileDerivatives& p) {
      if (p.slope > 1e-12 || p.curvature > 1e-12) return false;
      const double g = 1.0 + p.slope * p.slope;
      if (-p.curvature / (g * std::sqrt(g)) > kappa_max) return false;
      if (d >= 3 && p.rho > 0.0 && -p.slope / (p.rho * std::sqrt(g)) > kappa_max) return false;
      return true;
    });
  };
  double lo = 0.0;
  double hi = radius / (delta * delta);
  if (ok(hi)) return hi;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

LowerBoundFamily build_lower_bound_family(int d, double radius, double delta, double amplitude, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("lower-bound family: dimension must be >= 2");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("lower-bound family: delta must lie in (0, 1]");
  LowerBoundFamily family;
  family.dim = d;
  family.radius = radius;
  family.delta = delta;
  family.amplitude = amplitude;
  family.bodies.emplace_back(make_ball(Vec::Zero(d), radius));
  const SphereNet packing = build_net(d, delta, seed);
  family.directions = packing.directions();

  const BumpBall probe = make_bump_ball(radius, delta, amplitude, packing.direction(0));
  if (!bump_is_convex(probe)) {
    throw std::domain_error("lower-bound family: convexity check failed (amplitude too large for delta)");
  }
  family.volume_defect = bump_volume_defect(probe);
  family.defect_constant = family.volume_defect / std::pow(delta, d + 1);

  const double depth = amplitude * delta * delta;
  const Eigen::Index probes = std::min<Eigen::Index>(packing.size(), 64);
  for (Eigen::Index j = 0; j < packing.size(); ++j) {
    BumpBall body = make_bump_ball(radius, delta, amplitude, packing.direction(j));
    auto check = [&](const Vec& v) {
      const double h = support(body, v);
      if (h > radius + 1e-12 || h < radius - depth - 1e-12) {
        throw std::domain_error("lower-bound family: bump body is not nested between the expected balls");
      }
    };
    check(body.direction);
    for (Eigen::Index k = 0; k < probes; ++k) check(packing.direction((j + k) % packing.size()));
    family.bodies.emplace_back(std::move(body));
  }
  return family;
}

std::vector<PairCheck> check_family_pairs(const LowerBoundFamily& family, int pairs, double net_delta,
                                          std::uint64_t seed) {
  const SphereNet net = build_net(family.dim, net_delta, seed);
  const Eigen::Index count = family.directions.cols();
  const double expected = family.amplitude * family.delta * family.delta;
  std::vector<PairCheck> out;
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(pairs, count); ++j) {
    Eigen::Index far = j;
    double sep = -1.0;
    for (Eigen::Index k = 0; k < count; ++k) {
      const double s = euclidean_distance(family.directions.col(j).data(), family.directions.col(k).data(), family.dim);
      if (s > sep) {
        sep = s;
        far = k;
      }
    }
    PairCheck pc;
    pc.first = j;
    pc.second = far;
    pc.separation = sep;
    pc.expected = expected;
    pc.distance = hausdorff_between(family.bodies[static_cast<std::size_t>(j + 1)],
                                    family.bodies[static_cast<std::size_t>(far + 1)], net);
    pc.within_certification = pc.distance.net_value <= expected + 1e-12 &&
                              expected <= pc.distance.certified_upper + 1e-12 &&
                              std::abs(pc.distance.refined_value - expected) <= 1e-9;
    out.push_back(pc);
  }
  return out;
}

}  // namespace hulllab
