#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hulllab/geometry.hpp"
#include "hulllab/sampler.hpp"
#include "hulllab/sphere_net.hpp"

namespace hulllab {

/// Support function of the convex hull of a point cloud,
/// h(x) = max_i ⟨x, X_i⟩.
///
/// Points are organised in a cone tree around the cloud mean: each node
/// keeps the axis and half-angle of the cone spanned by its centred points
/// and their largest norm, which bounds ⟨x, X_i⟩ for the whole node. Leaves
/// evaluate the plain dot product in the original coordinates, so results
/// are bit-identical to a brute-force scan.
class HullSupport {
 public:
  explicit HullSupport(const Mat& points, int leaf_size = 16);

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }

  double operator()(const Vec& x) const { return evaluate(x.data()); }

  /// `hint` (optional, in/out) is a point slot whose value seeds the search;
  /// on return it holds the maximizing slot.
  double evaluate(const double* x, Eigen::Index* hint = nullptr) const;

  /// Evaluates every column of `dirs`, warm-starting each query with the
  /// previous maximizer.
  std::vector<double> evaluate_all(const Mat& dirs) const;

 private:
  struct Node {
    Eigen::Index axis;  // column into axes_
    double cos_w;
    double sin_w;
    double max_norm;
    Eigen::Index begin;
    Eigen::Index end;
    std::int32_t left;
    std::int32_t right;
  };

  std::int32_t build(std::vector<Eigen::Index>& idx, const Mat& unit, const Vec& norms, Eigen::Index begin,
                     Eigen::Index end);
  double node_bound(const Node& node, const double* x, double x_norm) const;

  Mat points_;  // permuted into leaf order
  Vec center_;
  Mat axes_;
  std::vector<Node> nodes_;
  double margin_ = 0.0;
  int leaf_size_;
};

/// max_i ⟨u, X_i⟩ by direct scan; u must be a unit vector.
double hull_support(const Mat& points, const Vec& u);
double hull_support(const SampleCloud& cloud, const Vec& u);

struct DistanceResult {
  std::string metric;
  double net_value = 0.0;       // maximum over the net
  double refined_value = 0.0;   // after local refinement around the best net directions
  double certified_upper = 0.0; // chaining bound on the supremum over the sphere
  double net_delta = 0.0;
};

/// d_H(conv(points), body) = sup_u (h_body(u) − h_hull(u)) for clouds inside
/// the body. `body_values`, when given, holds support(body, ·) on the net.
DistanceResult hausdorff_to_body(const BodySpec& body, const HullSupport& hull, const SphereNet& net,
                                 std::span<const double> body_values = {});
DistanceResult hausdorff_to_body(const BodySpec& body, const SampleCloud& cloud, const SphereNet& net);

/// sup_u |h_1(u) − h_2(u)| for two bodies.
DistanceResult hausdorff_between(const BodySpec& first, const BodySpec& second, const SphereNet& net);

/// Upper bound on d_L at a fixed centre a:
/// max(0, sup_u 1 − (h_hull(u) − ⟨u,a⟩)/(h_body(u) − ⟨u,a⟩)).
DistanceResult d_l_estimate(const BodySpec& body, const Vec& center, const HullSupport& hull, const SphereNet& net,
                            std::span<const double> body_values = {});
DistanceResult d_l_estimate(const BodySpec& body, const Vec& center, const SampleCloud& cloud, const SphereNet& net);

/// Equal-weight Monte Carlo rule on the normalized sphere. The first half of
/// the columns are seeded uniform directions, the second half their
/// antipodes, so width integrals pair column i with column i + n/2.
struct Quadrature {
  Mat directions;
  std::uint64_t seed = 0;
  Eigen::Index size() const { return directions.cols(); }
  Eigen::Index half() const { return directions.cols() / 2; }
};

constexpr std::int64_t kDefaultQuadN = 16384;

/// quad_n is rounded up to an even count.
Quadrature make_quadrature(int d, std::int64_t quad_n, std::uint64_t seed);

/// ‖h_body − h_hull‖_p on the normalized sphere.
double lp_error(const BodySpec& body, const HullSupport& hull, double p, const Quadrature& quad);
/// Same, with the body support values on the quadrature precomputed.
double lp_error(std::span<const double> body_values, const HullSupport& hull, double p, const Quadrature& quad);
double lp_error(const BodySpec& body, const SampleCloud& cloud, double p, std::int64_t quad_n,
                std::uint64_t quad_seed);

/// ‖φ_body − φ_hull‖_p with φ(u) = h(u) + h(−u).
double width_lp_error(const BodySpec& body, const HullSupport& hull, double p, const Quadrature& quad);

enum class Functional { T, S };

std::string to_string(Functional f);

/// T_p = ‖h‖_p, S_p = ‖φ‖_p for finite p via quadrature.
double functional_value(const std::vector<double>& support_values, Functional f, double p);
double functional_body(const BodySpec& body, Functional f, double p, const Quadrature& quad);
double functional_hull(const HullSupport& hull, Functional f, double p, const Quadrature& quad);

/// T_∞ / S_∞ over the net, refined locally.
double functional_body_sup(const BodySpec& body, Functional f, const SphereNet& net);
double functional_hull_sup(const HullSupport& hull, Functional f, const SphereNet& net);

/// |F(body) − F(hull)| on a shared quadrature.
double functional_plugin_error(const BodySpec& body, const HullSupport& hull, Functional f, double p,
                               const Quadrature& quad);

/// support(body, ·) on every column of `dirs`.
std::vector<double> body_support_values(const BodySpec& body, const Mat& dirs);

}  // namespace hulllab
