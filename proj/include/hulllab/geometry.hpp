#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "hulllab/linalg.hpp"

namespace hulllab {

// ---------------------------------------------------------------------------
// Dimensional constants
// ---------------------------------------------------------------------------

/// Volume of the unit ball B_p(0,1): π^{p/2} / Γ(p/2 + 1). β_0 = 1.
double ball_volume(int p);

/// Surface area of the unit sphere S^{d-1} ⊂ R^d, A_d = d·β_d.
double sphere_area(int d);

/// C_α = inf_{t>0} (1+t)^α / (1+t^α) = min(1, 2^{α−1}).
double c_alpha(double alpha);

/// Grid minimization of (1+t)^α/(1+t^α) over `points` log-spaced t in
/// [1e-8, 1e8]. Kept as an independent cross-check of c_alpha.
double c_alpha_grid_minimum(double alpha, int points = 200001);

/// η(x) = e⁴ g(2x−1) g(2−2x) with g(x) = exp(−1/x) for x > 0, else 0.
/// Supported on (1/2, 1) with maximum η(3/4) = 1.
double bump_eta(double x);

/// Radial bump profile used by BumpBall: η evaluated on [1/2, 1] through
/// s ↦ η(3/4 + s/4), i.e. exp(4 − 4/(1 − s²)) for |s| < 1 and 0 otherwise.
/// Maximum 1 at s = 0, zero for |s| ≥ 1, C^∞.
double bump_profile(double s);
double bump_profile_d1(double s);
double bump_profile_d2(double s);

// ---------------------------------------------------------------------------
// Bodies
// ---------------------------------------------------------------------------

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// center + rotation · diag(semi_axes) · B_d(0,1).
struct Ellipsoid {
  Vec center;
  Vec semi_axes;
  Mat rotation;
};

/// Convex hull of a vertex list. Construct through make_polytope so the
/// facet list (outward unit normals and offsets) is populated.
struct PolytopeV {
  Mat vertices;       // d × m
  Mat facet_normals;  // d × F, unit outward normals
  Vec facet_offsets;  // F, normal·x ≤ offset on the body
};

/// Ball B_d(0,R) whose top boundary near R·u is pushed inward by
/// amplitude·bump_scale²·bump_profile(2|t|/(R·bump_scale)), with t the
/// coordinate in the tangent hyperplane at R·u.
struct BumpBall {
  double radius = 0.0;
  double bump_scale = 0.0;
  double amplitude = 0.0;
  Vec direction;
};

using BodySpec = std::variant<Ball, Ellipsoid, PolytopeV, BumpBall>;

Ball make_ball(Vec center, double radius);
Ellipsoid make_ellipsoid(Vec center, Vec semi_axes, Mat rotation);
Ellipsoid make_ellipsoid(Vec center, Vec semi_axes);
PolytopeV make_polytope(Mat vertices);
BumpBall make_bump_ball(double radius, double bump_scale, double amplitude, Vec direction);

/// Re-runs the constructor checks on an arbitrary BodySpec.
void validate(const BodySpec& body);

Eigen::Index dim(const BodySpec& body);
std::string kind_name(const BodySpec& body);

/// Canonical interior point: ball/ellipsoid center, polytope vertex
/// centroid, origin for bump balls.
Vec analytic_center(const BodySpec& body);

/// max ‖x‖ over the body.
double circumradius(const BodySpec& body);

/// Body ⊆ B_d(0,1) (tolerance 1e-12).
bool is_unit_class(const BodySpec& body);

/// Axis-aligned bounding box (lower, upper).
std::pair<Vec, Vec> bounding_box(const BodySpec& body);

/// Certified rolling radius: ball radius, min a²/max a for ellipsoids;
/// empty for polytopes and bump balls.
std::optional<double> rolling_radius(const BodySpec& body);

/// h_body(u) for a unit vector u; throws when |‖u‖−1| > 1e-9.
double support(const BodySpec& body, const Vec& u);

/// Positively homogeneous extension h_body(x) for any x ∈ R^d.
double support_homogeneous(const BodySpec& body, const Vec& x);

/// φ(u) = h(u) + h(−u).
double width_function(const BodySpec& body, const Vec& u);

bool contains(const BodySpec& body, const Vec& x, double tol = 1e-12);

/// True iff 0 lies in the interior of the body.
bool origin_in_interior(const BodySpec& body);

/// ‖x‖_K = min{λ ≥ 0 : x ∈ λK}; requires 0 ∈ int(K).
double minkowski_functional(const BodySpec& body, const Vec& x);

/// Closed-form polar of a centered ball or ellipsoid.
BodySpec polar_body(const BodySpec& body);

/// (h_K(x), ‖x‖_{K°}) for centered balls and ellipsoids.
std::pair<double, double> polar_support_identity_check(const BodySpec& body, const Vec& x);

// ---------------------------------------------------------------------------
// Caps
// ---------------------------------------------------------------------------

/// d-volume of a cap of height eps ∈ [0, 2r] of a radius-r ball,
/// ∫₀^eps (x(2r−x))^{(d−1)/2} β_{d−1} dx.
double cap_volume_ball(int d, double r, double eps);

/// Surface area of the part of a radius-r sphere in R^d lying in a cap of
/// height eps ∈ [0, r].
double cap_area_sphere(int d, double r, double eps);

/// Same quantity on the full range eps ∈ [0, 2r].
double cap_area_sphere_full(int d, double r, double eps);

}  // namespace hulllab
