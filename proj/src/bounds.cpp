#include "hulllab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "hulllab/rng.hpp"

namespace hulllab {

void validate(const ClassParams& params) {
  if (!(params.alpha > 0.0)) throw std::invalid_argument("class params: alpha must be positive");
  if (!(params.big_l > 0.0)) throw std::invalid_argument("class params: L must be positive");
  if (!(params.eps0 > 0.0 && params.eps0 <= 1.0)) throw std::invalid_argument("class params: eps0 must lie in (0, 1]");
}

ClassParams class_params_smooth(int d, double r) {
  if (d < 1) throw std::invalid_argument("class_params_smooth: dimension must be >= 1");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("class_params_smooth: r must lie in (0, 1]");
  const double big_l = 2.0 * ball_volume(d - 1) * std::pow(r, 0.5 * (d - 1)) / (ball_volume(d) * (d + 1));
  return {0.5 * (d + 1), big_l, r};
}

ClassParams class_params_boundary(int d, double r) {
  if (d < 2) throw std::invalid_argument("class_params_boundary: dimension must be >= 2");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("class_params_boundary: r must lie in (0, 1]");
  return {0.5 * (d - 1), std::pow(r, 0.5 * (d - 1)), r};
}

// ---------------------------------------------------------------------------
// deviation bound

double DeviationBound::tail(double x) const {
  if (!(x >= 0.0)) throw std::invalid_argument("deviation tail: x must be >= 0");
  auto base = [&](double t) {
    const double log_value = d * std::log(12.0) - c_alpha * params.big_l * std::pow(t, params.alpha);
    return log_value >= 0.0 ? 1.0 : std::exp(log_value);
  };
  const double level = a_n + b_n * x;
  if (level > 1.0) return 0.0;
  if (level > params.eps0) {
    const double x0 = (params.eps0 - a_n) / b_n;
    return x0 < 0.0 ? 1.0 : base(x0);
  }
  return base(x);
}

DeviationBound deviation_bound(const ClassParams& params, int d, std::int64_t n) {
  validate(params);
  if (d < 1) throw std::invalid_argument("deviation_bound: dimension must be >= 1");
  if (n < 2) throw std::invalid_argument("deviation_bound: n must be >= 2");
  DeviationBound b;
  b.params = params;
  b.d = d;
  b.n = n;
  b.c_alpha = c_alpha(params.alpha);
  b.tau1 = std::max(1.0, d / (b.c_alpha * params.alpha * params.big_l));
  const double nn = static_cast<double>(n);
  b.a_n = std::pow(b.tau1 * std::log(nn) / nn, 1.0 / params.alpha);
  b.b_n = std::pow(nn, -1.0 / params.alpha);
  return b;
}

// ---------------------------------------------------------------------------
// membership

namespace {

std::vector<double> eps_values(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = hi;
    return out;
  }
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < count; ++i) out[i] = lo * std::exp(ratio * i / (count - 1));
  out.back() = hi;
  return out;
}

Mat probe_directions(int d, int count, std::uint64_t seed) {
  CounterRng rng = CounterRng(seed).split(0x707265);
  Mat dirs(d, count);
  for (int j = 0; j < count; ++j) uniform_on_sphere(rng, d, dirs.col(j).data());
  return dirs;
}

// Cap frequencies for each direction and ε from one Monte Carlo cloud.
std::vector<std::vector<double>> mc_cap_frequencies(const BodySpec& body, SampleMode mode, const Mat& dirs,
                                                    const std::vector<double>& eps, std::int64_t n_mc,
                                                    std::uint64_t seed) {
  const SampleCloud cloud = sample(body, mode, n_mc, seed);
  std::vector<std::vector<double>> freq(static_cast<std::size_t>(dirs.cols()));
  std::vector<double> proj(static_cast<std::size_t>(n_mc));
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) {
    const Vec u = dirs.col(j);
    for (std::int64_t i = 0; i < n_mc; ++i) proj[i] = dot(u.data(), cloud.points.col(i).data(), u.size());
    std::sort(proj.begin(), proj.end());
    const double h = support(body, u);
    auto& row = freq[j];
    for (double e : eps) {
      const auto first = std::lower_bound(proj.begin(), proj.end(), h - e);
      row.push_back(static_cast<double>(proj.end() - first) / static_cast<double>(n_mc));
    }
  }
  return freq;
}

}  // namespace

MembershipReport check_class_membership(const BodySpec& body, SampleMode mode, const ClassParams& params,
                                        const MembershipOptions& options) {
  validate(params);
  validate(body);
  if (options.u_probes < 1 || options.eps_grid < 1) throw std::invalid_argument("check_class_membership: empty grid");
  const int d = static_cast<int>(dim(body));
  MembershipReport report;
  report.u_probes = options.u_probes;
  report.eps_grid = options.eps_grid;
  report.eps_max = params.eps0;
  report.eps_min = options.eps_grid == 1 ? params.eps0 : options.eps_min_ratio * params.eps0;
  const std::vector<double> eps = eps_values(report.eps_min, report.eps_max, options.eps_grid);
  const Mat dirs = probe_directions(d, options.u_probes, options.seed);

  std::vector<std::vector<double>> mass;
  const auto* ball = std::get_if<Ball>(&body);
  if (ball != nullptr && (mode == SampleMode::interior || d >= 2)) {
    report.analytic = true;
    const double r = ball->radius;
    std::vector<double> row;
    for (double e : eps) {
      const double w = std::min(e, 2.0 * r);
      row.push_back(mode == SampleMode::interior ? cap_volume_ball(d, r, w) / (ball_volume(d) * std::pow(r, d))
                                                 : cap_area_sphere_full(d, r, w) / (sphere_area(d) * std::pow(r, d - 1)));
    }
    mass.assign(static_cast<std::size_t>(options.u_probes), row);
  } else {
    report.n_mc = options.n_mc;
    mass = mc_cap_frequencies(body, mode, dirs, eps, options.n_mc, options.seed);
  }

  double worst_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < options.u_probes; ++j) {
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const double target = params.big_l * std::pow(eps[k], params.alpha);
      const double ratio = mass[j][k] / target;
      double slack = 0.0;
      if (!report.analytic) {
        const double t = std::min(1.0, target);
        slack = 3.0 * std::sqrt(t * (1.0 - t) / static_cast<double>(options.n_mc)) / target;
      }
      if (ratio + slack < worst_margin) {
        worst_margin = ratio + slack;
        report.worst_ratio = ratio;
        report.slack = slack;
        report.worst_eps = eps[k];
        report.worst_direction = dirs.col(j);
      }
    }
  }
  report.verdict = report.worst_ratio >= 1.0 - report.slack;
  return report;
}

double fit_class_constant(const BodySpec& body, SampleMode mode, double alpha, double eps0,
                          const MembershipOptions& options) {
  if (!(alpha > 0.0)) throw std::invalid_argument("fit_class_constant: alpha must be positive");
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw std::invalid_argument("fit_class_constant: eps0 must lie in (0, 1]");
  const int d = static_cast<int>(dim(body));
  const std::vector<double> eps = eps_values(0.05 * eps0, eps0, std::max(2, options.eps_grid));
  const Mat dirs = probe_directions(d, options.u_probes, options.seed);
  const auto freq = mc_cap_frequencies(body, mode, dirs, eps, options.n_mc, options.seed);
  double big_l = std::numeric_limits<double>::infinity();
  for (const auto& row : freq) {
    for (std::size_t k = 0; k < eps.size(); ++k) big_l = std::min(big_l, row[k] / std::pow(eps[k], alpha));
  }
  return big_l;
}

ClassParams class_params_polytope(const BodySpec& body, const MembershipOptions& options) {
  const int d = static_cast<int>(dim(body));
  const Mat dirs = probe_directions(d, options.u_probes, options.seed);
  double min_width = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) min_width = std::min(min_width, width_function(body, dirs.col(j)));
  ClassParams params;
  params.alpha = d;
  params.eps0 = std::min(1.0, 0.5 * min_width);
  params.big_l = fit_class_constant(body, SampleMode::interior, params.alpha, params.eps0, options);
  validate(params);
  return params;
}

// ---------------------------------------------------------------------------
// rates

std::string to_string(RateFamily family) {
  switch (family) {
    case RateFamily::smooth_interior:
      return "smooth_interior";
    case RateFamily::polytope_interior:
      return "polytope_interior";
    case RateFamily::smooth_boundary:
      return "smooth_boundary";
  }
  return "unknown";
}

RateFamily parse_rate_family(const std::string& text) {
  if (text == "smooth_interior" || text == "smooth") return RateFamily::smooth_interior;
  if (text == "polytope_interior" || text == "polytope") return RateFamily::polytope_interior;
  if (text == "smooth_boundary" || text == "boundary") return RateFamily::smooth_boundary;
  throw std::invalid_argument("unknown rate family '" + text +
                              "' (expected smooth_interior|polytope_interior|smooth_boundary)");
}

double rate_exponent(RateFamily family, int d) {
  if (d < 1) throw std::invalid_argument("rate_exponent: dimension must be >= 1");
  switch (family) {
    case RateFamily::smooth_interior:
      return 2.0 / (d + 1);
    case RateFamily::polytope_interior:
      return 1.0 / d;
    case RateFamily::smooth_boundary:
      if (d < 2) throw std::invalid_argument("rate_exponent: smooth_boundary needs d >= 2");
      return 2.0 / (d - 1);
  }
  throw std::invalid_argument("rate_exponent: invalid family");
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, double level) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_slope: size mismatch");
  const std::size_t k = x.size();
  if (k < 2) throw std::invalid_argument("need >= 2 grid points for slope");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: regressor has no spread");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (k == 2) {
    fit.half_width = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(k - 2));
  fit.half_width = boost::math::quantile(dist, 0.5 + 0.5 * level) * se;
  return fit;
}

}  // namespace hulllab
