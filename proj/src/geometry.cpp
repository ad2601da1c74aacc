#include "hulllab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace hulllab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kPi = std::numbers::pi;

// Adaptive Gauss–Kronrod (7/15) with a relative tolerance tight enough that
// the absolute error on the O(1) cap integrals stays below 1e-10.
template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 12, 1e-12);
}

void require_dim(const Vec& v, Eigen::Index d, const char* what) {
  if (v.size() != d) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(d) + ", got " + std::to_string(v.size()) + ")");
  }
}

// --- ellipsoid helpers ------------------------------------------------------

// Coordinates of x in the frame where the ellipsoid is the unit ball,
// ignoring translation: S^{-1} Rᵀ x.
Vec to_unit_frame(const Ellipsoid& e, const Vec& x) {
  return (e.rotation.transpose() * x).cwiseQuotient(e.semi_axes);
}

// ‖x‖_K for K = {z : ‖A^{-1}(z − c)‖ ≤ 1} given y = A^{-1}x and w = A^{-1}c
// with ‖w‖ < 1. Largest μ with ‖μy − w‖ ≤ 1 is the positive root of
// μ²|y|² − 2μ⟨y,w⟩ + |w|² − 1 = 0; the functional is 1/μ.
double gauge_from_unit_frame(const Vec& y, const Vec& w) {
  const double yy = dot(y, y);
  if (yy == 0.0) return 0.0;
  const double yw = dot(y, w);
  const double ww = dot(w, w);
  const double disc = yw * yw + yy * (1.0 - ww);
  return (std::sqrt(disc) - yw) / (1.0 - ww);
}

// --- bump ball helpers ------------------------------------------------------

double bump_offset(const BumpBall& b, double rho) {
  const double s = 2.0 * rho / (b.radius * b.bump_scale);
  return b.amplitude * b.bump_scale * b.bump_scale * bump_profile(s);
}

double bump_support_unit(const BumpBall& b, const Vec& v) {
  const double R = b.radius;
  const double cos_psi = dot(v, b.direction);
  const Vec lateral = v - cos_psi * b.direction;
  const double sin_psi = std::sqrt(dot(lateral, lateral));
  const double half_width = 0.5 * R * b.bump_scale;
  if (cos_psi <= 0.0 || sin_psi >= 0.5 * b.bump_scale) return R;

  // Axially symmetric body: the maximizer lies in span(u, lateral) and
  // only radii inside the bump window can beat the sphere.
  auto f = [&](double rho) {
    const double top = std::sqrt(std::max(0.0, R * R - rho * rho)) - bump_offset(b, rho);
    return top * cos_psi + rho * sin_psi;
  };
  constexpr int kCells = 1024;
  const double step = half_width / kCells;
  int best_i = 0;
  double best = f(0.0);
  for (int i = 1; i <= kCells; ++i) {
    const double v_i = f(i * step);
    if (v_i > best) {
      best = v_i;
      best_i = i;
    }
  }
  // Golden-section polish inside the neighbouring cells.
  double lo = std::max(0, best_i - 1) * step;
  double hi = std::min(kCells, best_i + 1) * step;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-15 * R; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    }
  }
  return std::max({best, f1, f2});
}

bool bump_contains(const BumpBall& b, const Vec& x, double tol) {
  const double z = dot(x, b.direction);
  const Vec lateral = x - z * b.direction;
  const double rho = std::sqrt(dot(lateral, lateral));
  const double R = b.radius;
  if (rho > R + tol) return false;
  const double s = std::sqrt(std::max(0.0, R * R - rho * rho));
  return z >= -s - tol && z <= s - bump_offset(b, rho) + tol;
}

// --- polytope facets --------------------------------------------------------

void enumerate_facets(PolytopeV& p) {
  const Eigen::Index d = p.vertices.rows();
  const Eigen::Index m = p.vertices.cols();
  std::vector<Vec> normals;
  std::vector<double> offsets;
  const double scale = std::max(1.0, p.vertices.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * scale;

  auto try_add = [&](Vec n, double off) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double t = dot(n.data(), p.vertices.col(j).data(), d) - off;
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
    if (hi <= tol) {
      // outward already
    } else if (lo >= -tol) {
      n = -n;
      off = -off;
    } else {
      return;
    }
    for (std::size_t k = 0; k < normals.size(); ++k) {
      if ((normals[k] - n).norm() < 1e-9 && std::abs(offsets[k] - off) < 1e-9 * scale) return;
    }
    normals.push_back(std::move(n));
    offsets.push_back(off);
  };

  if (d == 1) {
    try_add(Vec::Constant(1, 1.0), p.vertices.maxCoeff());
    try_add(Vec::Constant(1, -1.0), -p.vertices.minCoeff());
  } else {
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) idx[k] = static_cast<int>(k);
    for (;;) {
      Mat diffs(d - 1, d);
      for (Eigen::Index k = 1; k < d; ++k) {
        diffs.row(k - 1) = (p.vertices.col(idx[k]) - p.vertices.col(idx[0])).transpose();
      }
      Eigen::JacobiSVD<Mat> svd(diffs, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      if (sv.size() == d - 1 && sv[d - 2] > 1e-10 * std::max(1.0, sv[0])) {
        Vec n = svd.matrixV().col(d - 1);
        n /= n.norm();
        try_add(n, dot(n.data(), p.vertices.col(idx[0]).data(), d));
      }
      // next combination
      Eigen::Index k = d - 1;
      while (k >= 0 && idx[k] == static_cast<int>(m - d + k)) --k;
      if (k < 0) break;
      ++idx[k];
      for (Eigen::Index j = k + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  p.facet_normals.resize(d, static_cast<Eigen::Index>(normals.size()));
  p.facet_offsets.resize(static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t k = 0; k < normals.size(); ++k) {
    p.facet_normals.col(static_cast<Eigen::Index>(k)) = normals[k];
    p.facet_offsets[static_cast<Eigen::Index>(k)] = offsets[k];
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// constants

double ball_volume(int p) {
  if (p < 0) throw std::invalid_argument("ball_volume: negative dimension");
  return std::pow(kPi, 0.5 * p) / std::tgamma(0.5 * p + 1.0);
}

double sphere_area(int d) {
  if (d < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
  return d * ball_volume(d);
}

double c_alpha(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("c_alpha: alpha must be positive");
  return std::min(1.0, std::exp2(alpha - 1.0));
}

double c_alpha_grid_minimum(double alpha, int points) {
  if (!(alpha > 0.0)) throw std::invalid_argument("c_alpha_grid_minimum: alpha must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double t = std::pow(10.0, -8.0 + 16.0 * i / (points - 1));
    const double ratio = std::exp(alpha * std::log1p(t)) / (1.0 + std::pow(t, alpha));
    best = std::min(best, ratio);
  }
  return best;
}

double bump_eta(double x) {
  auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  return std::exp(4.0) * g(2.0 * x - 1.0) * g(2.0 - 2.0 * x);
}

double bump_profile(double s) {
  const double one_minus = 1.0 - s * s;
  if (!(one_minus > 0.0)) return 0.0;
  return std::exp(4.0 - 4.0 / one_minus);
}

double bump_profile_d1(double s) {
  const double one_minus = 1.0 - s * s;
  if (!(one_minus > 0.0)) return 0.0;
  return bump_profile(s) * (-8.0 * s / (one_minus * one_minus));
}

double bump_profile_d2(double s) {
  const double one_minus = 1.0 - s * s;
  if (!(one_minus > 0.0)) return 0.0;
  const double q1 = -8.0 * s / (one_minus * one_minus);
  const double q2 = -8.0 / (one_minus * one_minus) - 32.0 * s * s / (one_minus * one_minus * one_minus);
  return bump_profile(s) * (q1 * q1 + q2);
}

// ---------------------------------------------------------------------------
// construction

Ball make_ball(Vec center, double radius) {
  if (center.size() < 1) throw std::invalid_argument("ball: empty center");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball: radius must be positive");
  if (!center.allFinite()) throw std::invalid_argument("ball: non-finite center");
  return Ball{std::move(center), radius};
}

Ellipsoid make_ellipsoid(Vec center, Vec semi_axes, Mat rotation) {
  const Eigen::Index d = center.size();
  if (d < 1) throw std::invalid_argument("ellipsoid: empty center");
  require_dim(semi_axes, d, "ellipsoid semi_axes");
  if (rotation.rows() != d || rotation.cols() != d) throw std::invalid_argument("ellipsoid: rotation must be d x d");
  if (!(semi_axes.array() > 0.0).all() || !semi_axes.allFinite()) {
    throw std::invalid_argument("ellipsoid: semi-axes must be positive");
  }
  if ((rotation.transpose() * rotation - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("ellipsoid: rotation is not orthogonal");
  }
  return Ellipsoid{std::move(center), std::move(semi_axes), std::move(rotation)};
}

Ellipsoid make_ellipsoid(Vec center, Vec semi_axes) {
  const Eigen::Index d = center.size();
  return make_ellipsoid(std::move(center), std::move(semi_axes), Mat::Identity(d, d));
}

PolytopeV make_polytope(Mat vertices) {
  const Eigen::Index d = vertices.rows();
  const Eigen::Index m = vertices.cols();
  if (d < 1) throw std::invalid_argument("polytope: empty vertices");
  if (m < d + 1) throw std::invalid_argument("polytope: need at least d+1 vertices");
  if (!vertices.allFinite()) throw std::invalid_argument("polytope: non-finite vertex");
  Mat diffs = vertices.rightCols(m - 1).colwise() - vertices.col(0);
  Eigen::FullPivLU<Mat> lu(diffs);
  lu.setThreshold(1e-10);
  if (lu.rank() < d) throw std::invalid_argument("polytope: vertices are not affinely independent (degenerate body)");
  PolytopeV p{std::move(vertices), {}, {}};
  enumerate_facets(p);
  return p;
}

BumpBall make_bump_ball(double radius, double bump_scale, double amplitude, Vec direction) {
  if (!(radius > 0.0 && radius <= 1.0)) throw std::invalid_argument("bump_ball: radius must be in (0, 1]");
  if (!(bump_scale > 0.0 && bump_scale <= 2.0)) throw std::invalid_argument("bump_ball: bump_scale must be in (0, 2]");
  if (!(amplitude > 0.0)) throw std::invalid_argument("bump_ball: amplitude must be positive");
  if (!(amplitude * bump_scale * bump_scale < radius)) {
    throw std::invalid_argument("bump_ball: bump depth amplitude*bump_scale^2 must be below the radius");
  }
  Direction u = Direction::checked(direction);
  return BumpBall{radius, bump_scale, amplitude, u.vec()};
}

void validate(const BodySpec& body) {
  std::visit(overloaded{
                 [](const Ball& b) { make_ball(b.center, b.radius); },
                 [](const Ellipsoid& e) { make_ellipsoid(e.center, e.semi_axes, e.rotation); },
                 [](const PolytopeV& p) {
                   if (p.facet_offsets.size() == 0) throw std::invalid_argument("polytope: facets not built");
                   make_polytope(p.vertices);
                 },
                 [](const BumpBall& b) { make_bump_ball(b.radius, b.bump_scale, b.amplitude, b.direction); },
             },
             body);
}

Eigen::Index dim(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball& b) { return b.center.size(); },
                        [](const Ellipsoid& e) { return e.center.size(); },
                        [](const PolytopeV& p) { return p.vertices.rows(); },
                        [](const BumpBall& b) { return b.direction.size(); },
                    },
                    body);
}

std::string kind_name(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball&) { return std::string("ball"); },
                        [](const Ellipsoid&) { return std::string("ellipsoid"); },
                        [](const PolytopeV&) { return std::string("polytope_v"); },
                        [](const BumpBall&) { return std::string("bump_ball"); },
                    },
                    body);
}

Vec analytic_center(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball& b) -> Vec { return b.center; },
                        [](const Ellipsoid& e) -> Vec { return e.center; },
                        [](const PolytopeV& p) -> Vec { return p.vertices.rowwise().mean(); },
                        [](const BumpBall& b) -> Vec { return Vec::Zero(b.direction.size()); },
                    },
                    body);
}

double circumradius(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball& b) { return b.center.norm() + b.radius; },
                        [](const Ellipsoid& e) { return e.center.norm() + e.semi_axes.maxCoeff(); },
                        [](const PolytopeV& p) { return p.vertices.colwise().norm().maxCoeff(); },
                        [](const BumpBall& b) { return b.radius; },
                    },
                    body);
}

bool is_unit_class(const BodySpec& body) { return circumradius(body) <= 1.0 + 1e-12; }

std::pair<Vec, Vec> bounding_box(const BodySpec& body) {
  return std::visit(
      overloaded{
          [](const Ball& b) { return std::pair<Vec, Vec>(b.center.array() - b.radius, b.center.array() + b.radius); },
          [](const Ellipsoid& e) {
            const Vec half = (e.rotation * e.semi_axes.asDiagonal()).rowwise().norm();
            return std::pair<Vec, Vec>(e.center - half, e.center + half);
          },
          [](const PolytopeV& p) {
            return std::pair<Vec, Vec>(p.vertices.rowwise().minCoeff(), p.vertices.rowwise().maxCoeff());
          },
          [](const BumpBall& b) {
            const Eigen::Index d = b.direction.size();
            return std::pair<Vec, Vec>(Vec::Constant(d, -b.radius), Vec::Constant(d, b.radius));
          },
      },
      body);
}

std::optional<double> rolling_radius(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball& b) -> std::optional<double> { return b.radius; },
                        [](const Ellipsoid& e) -> std::optional<double> {
                          const double lo = e.semi_axes.minCoeff();
                          return lo * lo / e.semi_axes.maxCoeff();
                        },
                        [](const PolytopeV&) -> std::optional<double> { return std::nullopt; },
                        [](const BumpBall&) -> std::optional<double> { return std::nullopt; },
                    },
                    body);
}

// ---------------------------------------------------------------------------
// support and membership

double support_homogeneous(const BodySpec& body, const Vec& x) {
  require_dim(x, dim(body), "support");
  return std::visit(overloaded{
                        [&](const Ball& b) { return dot(x, b.center) + b.radius * std::sqrt(dot(x, x)); },
                        [&](const Ellipsoid& e) {
                          const Vec y = (e.rotation.transpose() * x).cwiseProduct(e.semi_axes);
                          return dot(x, e.center) + std::sqrt(dot(y, y));
                        },
                        [&](const PolytopeV& p) {
                          const Eigen::Index d = p.vertices.rows();
                          double best = -std::numeric_limits<double>::infinity();
                          for (Eigen::Index j = 0; j < p.vertices.cols(); ++j) {
                            best = std::max(best, dot(x.data(), p.vertices.col(j).data(), d));
                          }
                          return best;
                        },
                        [&](const BumpBall& b) {
                          const double norm = std::sqrt(dot(x, x));
                          if (norm == 0.0) return 0.0;
                          return norm * bump_support_unit(b, x / norm);
                        },
                    },
                    body);
}

double support(const BodySpec& body, const Vec& u) {
  require_dim(u, dim(body), "support");
  require_unit(u, "support");
  return support_homogeneous(body, u);
}

double width_function(const BodySpec& body, const Vec& u) {
  return support(body, u) + support(body, Vec(-u));
}

bool contains(const BodySpec& body, const Vec& x, double tol) {
  require_dim(x, dim(body), "contains");
  return std::visit(overloaded{
                        [&](const Ball& b) { return (x - b.center).norm() <= b.radius + tol; },
                        [&](const Ellipsoid& e) { return to_unit_frame(e, x - e.center).norm() <= 1.0 + tol; },
                        [&](const PolytopeV& p) {
                          for (Eigen::Index f = 0; f < p.facet_offsets.size(); ++f) {
                            if (dot(p.facet_normals.col(f).data(), x.data(), x.size()) > p.facet_offsets[f] + tol) {
                              return false;
                            }
                          }
                          return true;
                        },
                        [&](const BumpBall& b) { return bump_contains(b, x, tol); },
                    },
                    body);
}

bool origin_in_interior(const BodySpec& body) {
  return std::visit(overloaded{
                        [](const Ball& b) { return b.center.norm() < b.radius; },
                        [](const Ellipsoid& e) { return to_unit_frame(e, e.center).norm() < 1.0; },
                        [](const PolytopeV& p) { return (p.facet_offsets.array() > 1e-12).all(); },
                        [](const BumpBall& b) { return b.amplitude * b.bump_scale * b.bump_scale < b.radius; },
                    },
                    body);
}

double minkowski_functional(const BodySpec& body, const Vec& x) {
  require_dim(x, dim(body), "minkowski_functional");
  if (!origin_in_interior(body)) {
    throw std::invalid_argument("minkowski_functional: origin is not an interior point of the body");
  }
  if (dot(x, x) == 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Ball& b) { return gauge_from_unit_frame(x / b.radius, b.center / b.radius); },
                        [&](const Ellipsoid& e) {
                          return gauge_from_unit_frame(to_unit_frame(e, x), to_unit_frame(e, e.center));
                        },
                        [&](const PolytopeV& p) {
                          double best = 0.0;
                          for (Eigen::Index f = 0; f < p.facet_offsets.size(); ++f) {
                            best = std::max(best, dot(p.facet_normals.col(f).data(), x.data(), x.size()) /
                                                      p.facet_offsets[f]);
                          }
                          return best;
                        },
                        [&](const BumpBall& b) {
                          // Radial extent by bisection; the body is star-shaped about 0.
                          const double norm = x.norm();
                          const Vec dir = x / norm;
                          double lo = 0.0;
                          double hi = b.radius;
                          for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            if (bump_contains(b, mid * dir, 0.0)) {
                              lo = mid;
                            } else {
                              hi = mid;
                            }
                          }
                          return norm / lo;
                        },
                    },
                    body);
}

BodySpec polar_body(const BodySpec& body) {
  return std::visit(
      overloaded{
          [](const Ball& b) -> BodySpec {
            if (b.center.norm() > 1e-12) throw std::invalid_argument("polar_body: only centered balls are supported");
            return make_ball(Vec::Zero(b.center.size()), 1.0 / b.radius);
          },
          [](const Ellipsoid& e) -> BodySpec {
            if (e.center.norm() > 1e-12) {
              throw std::invalid_argument("polar_body: only centered ellipsoids are supported");
            }
            return make_ellipsoid(Vec::Zero(e.center.size()), e.semi_axes.cwiseInverse(), e.rotation);
          },
          [](const PolytopeV&) -> BodySpec {
            throw std::invalid_argument("polar_body: unsupported body family (polytope_v)");
          },
          [](const BumpBall&) -> BodySpec {
            throw std::invalid_argument("polar_body: unsupported body family (bump_ball)");
          },
      },
      body);
}

std::pair<double, double> polar_support_identity_check(const BodySpec& body, const Vec& x) {
  const BodySpec polar = polar_body(body);
  return {support_homogeneous(body, x), minkowski_functional(polar, x)};
}

// ---------------------------------------------------------------------------
// caps

double cap_volume_ball(int d, double r, double eps) {
  if (d < 1) throw std::invalid_argument("cap_volume_ball: dimension must be >= 1");
  if (!(r > 0.0)) throw std::invalid_argument("cap_volume_ball: radius must be positive");
  if (!(eps >= 0.0 && eps <= 2.0 * r)) throw std::invalid_argument("cap_volume_ball: eps must lie in [0, 2r]");
  if (eps == 0.0) return 0.0;
  const double beta = ball_volume(d - 1);
  // x = r(1 − cos θ) turns (x(2r−x))^{(d−1)/2} dx into r^d sin^d θ dθ,
  // removing the endpoint square-root behaviour.
  const double theta_max = 2.0 * std::asin(std::min(1.0, std::sqrt(eps / (2.0 * r))));
  const double integral = integrate([d](double th) { return std::pow(std::sin(th), d); }, 0.0, theta_max);
  return beta * std::pow(r, d) * integral;
}

double cap_area_sphere_full(int d, double r, double eps) {
  if (d < 2) throw std::invalid_argument("cap_area_sphere: dimension must be >= 2");
  if (!(r > 0.0)) throw std::invalid_argument("cap_area_sphere: radius must be positive");
  if (!(eps >= 0.0 && eps <= 2.0 * r)) throw std::invalid_argument("cap_area_sphere: eps out of range");
  const double total = sphere_area(d) * std::pow(r, d - 1);
  if (eps > r) return total - cap_area_sphere_full(d, r, 2.0 * r - eps);
  if (eps == 0.0) return 0.0;

  // ∫₀^x t^{(d−3)/2}(1−t)^{−1/2} dt with x = eps(2r−eps)/r² ≤ 1, split at
  // x/2: t = s² on the lower piece and t = 1 − s² on the upper piece, both
  // of which have bounded integrands.
  const double x = std::min(1.0, eps * (2.0 * r - eps) / (r * r));
  const double a = 0.5 * (d - 1);
  const double lower = integrate(
      [d](double s) { return 2.0 * std::pow(s, d - 2) / std::sqrt(std::max(0.0, 1.0 - s * s)); }, 0.0,
      std::sqrt(0.5 * x));
  const double upper = integrate([d](double s) { return 2.0 * std::pow(std::max(0.0, 1.0 - s * s), 0.5 * (d - 3)); },
                                 std::sqrt(1.0 - x), std::sqrt(1.0 - 0.5 * x));
  // Normalized by the complete integral B((d−1)/2, 1/2) so that x = 1
  // (a hemisphere) yields half the sphere.
  return 0.5 * total * (lower + upper) / boost::math::beta(a, 0.5);
}

double cap_area_sphere(int d, double r, double eps) {
  if (d < 2) throw std::invalid_argument("cap_area_sphere: dimension must be >= 2");
  if (!(eps >= 0.0 && eps <= r)) throw std::invalid_argument("cap_area_sphere: eps must lie in [0, r]");
  return cap_area_sphere_full(d, r, eps);
}

}  // namespace hulllab
