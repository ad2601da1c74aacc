#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hulllab/geometry.hpp"
#include "hulllab/sampler.hpp"

namespace hulllab {

/// Class M(α, L, ε₀): every width-ε cap carries mass >= L·ε^α for ε <= ε₀.
struct ClassParams {
  double alpha = 0.0;
  double big_l = 0.0;
  double eps0 = 0.0;
};

void validate(const ClassParams& params);

/// Uniform distribution inside a body with rolling radius r:
/// ((d+1)/2, 2β_{d−1}r^{(d−1)/2}/(β_d(d+1)), r).
ClassParams class_params_smooth(int d, double r);

/// Uniform distribution on the boundary: ((d−1)/2, r^{(d−1)/2}, r).
ClassParams class_params_boundary(int d, double r);

/// Deviation inequality for the random polytope over M(α, L, ε₀):
/// P[d_H >= 2a_n + 2b_n·x] <= tail(x).
struct DeviationBound {
  ClassParams params;
  int d = 0;
  std::int64_t n = 0;
  double c_alpha = 0.0;
  double tau1 = 0.0;
  double a_n = 0.0;
  double b_n = 0.0;

  double threshold(double x) const { return 2.0 * a_n + 2.0 * b_n * x; }

  /// min(1, 12^d exp(−C_α L x^α)) while a_n + b_n·x <= ε₀; frozen at its
  /// value for x = (ε₀ − a_n)/b_n on (ε₀, 1]; 0 beyond 1.
  double tail(double x) const;
};

DeviationBound deviation_bound(const ClassParams& params, int d, std::int64_t n);

struct MembershipOptions {
  int u_probes = 64;
  int eps_grid = 64;
  std::int64_t n_mc = 200'000;
  std::uint64_t seed = 0;
  double eps_min_ratio = 1e-3;  // grid spans [eps_min_ratio·ε₀, ε₀], log-spaced
};

struct MembershipReport {
  double worst_ratio = 0.0;  // min over probes of μ(C)/(L ε^α)
  double slack = 0.0;        // statistical slack at the worst probe (0 when analytic)
  double worst_eps = 0.0;
  Vec worst_direction;
  int u_probes = 0;
  int eps_grid = 0;
  double eps_min = 0.0;
  double eps_max = 0.0;
  std::int64_t n_mc = 0;
  bool analytic = false;
  bool verdict = false;
};

/// Checks μ(C_K(u,ε)) >= L ε^α on a grid of directions × ε. Balls use
/// exact cap volumes or areas; other bodies use Monte Carlo cap frequencies
/// with a 3-standard-deviation binomial allowance.
MembershipReport check_class_membership(const BodySpec& body, SampleMode mode, const ClassParams& params,
                                        const MembershipOptions& options = {});

/// Largest L with μ(C) >= L ε^α on the probe grid (Monte Carlo), using
/// ε-values in [0.05·ε₀, ε₀] where the caps hold enough samples.
double fit_class_constant(const BodySpec& body, SampleMode mode, double alpha, double eps0,
                          const MembershipOptions& options = {});

/// Polytope parameters: α = d, ε₀ = min(1, half the smallest probed width),
/// L fitted.
ClassParams class_params_polytope(const BodySpec& body, const MembershipOptions& options = {});

enum class RateFamily { smooth_interior, polytope_interior, smooth_boundary };

std::string to_string(RateFamily family);
RateFamily parse_rate_family(const std::string& text);

/// Exponent e of (ln n / n)^e: 2/(d+1), 1/d, 2/(d−1).
double rate_exponent(RateFamily family, int d);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% confidence half-width of the slope
};

/// Ordinary least squares of y on x with a Student-t confidence interval.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, double level = 0.95);

}  // namespace hulllab
