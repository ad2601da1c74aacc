#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hulllab/linalg.hpp"

namespace hulllab {

inline double euclidean_distance(const double* a, const double* b, Eigen::Index d) {
  return std::sqrt(squared_distance(a, b, d));
}

// Uniform hashed grid over a point set in R^d (d <= 4). Queries outside the
// grid's reach fall back to a linear scan.
class PointGrid {
 public:
  PointGrid() = default;
  PointGrid(Eigen::Index dim, double cell);

  void insert(const double* p, Eigen::Index id);

  // Index of the nearest stored point and its distance; -1 when empty.
  std::pair<Eigen::Index, double> nearest(const double* x, const Mat& points) const;

  // Distance from x to the nearest stored point, capped at radius.
  double nearest_distance_within(const double* x, double radius, const Mat& points) const;

  // True iff some stored point lies at distance < radius from x.
  bool any_within(const double* x, double radius, const Mat& points) const;

  // All stored ids at distance <= radius from x.
  void collect_within(const double* x, double radius, const Mat& points, std::vector<Eigen::Index>& out) const;

  Eigen::Index size() const { return count_; }

 private:
  bool gridded() const { return dim_ >= 1 && dim_ <= 4; }
  std::uint64_t key_of(const std::int64_t* cell) const;
  void cell_of(const double* x, std::int64_t* cell) const;

  template <class F>
  bool visit_box(const double* x, double radius, F&& f) const;

  Eigen::Index dim_ = 0;
  double cell_ = 1.0;
  Eigen::Index count_ = 0;
  std::unordered_map<std::uint64_t, std::vector<Eigen::Index>> cells_;
  std::vector<Eigen::Index> all_;
};

/// Finite δ-packing of S^{d-1}. Directions are stored as the columns of a
/// d × N matrix in a spatially coherent order (neighbouring columns are
/// close on the sphere).
class SphereNet {
 public:
  SphereNet(int dim, double delta, std::uint64_t seed, Mat directions, double covering_radius_estimate);

  int dim() const { return dim_; }
  double delta() const { return delta_; }
  std::uint64_t seed() const { return seed_; }
  double covering_radius_estimate() const { return covering_radius_; }
  const Mat& directions() const { return directions_; }
  Eigen::Index size() const { return directions_.cols(); }
  Vec direction(Eigen::Index i) const { return directions_.col(i); }

  /// Nearest net point to x (any nonzero vector near the sphere).
  std::pair<Eigen::Index, double> nearest(const Vec& x) const;

  /// Smallest pairwise Euclidean distance, exact over all pairs within reach
  /// of the grid (pairs farther than 2δ cannot be the minimum once a pair
  /// closer than that exists).
  double min_pairwise_distance() const;

  /// Largest distance from `probes` seeded uniform directions to the net.
  double probe_covering_radius(std::int64_t probes, std::uint64_t seed) const;

 private:
  int dim_;
  double delta_;
  std::uint64_t seed_;
  double covering_radius_;
  Mat directions_;
  PointGrid grid_;
};

struct NetOptions {
  // Consecutive rejections that end the random phase; 0 selects
  // ceil(50 / δ^{d-1}), or ceil(50 / δ) when a fill pass follows.
  std::int64_t rejection_streak = 0;
  // Hard cap on the number of directions.
  std::int64_t max_points = 1'000'000;
  // Deterministic gap filling after the random phase (d = 2, 3).
  bool fill = true;
  std::int64_t covering_probes = 20'000;
};

/// Greedy maximal δ-packing of S^{d-1}: uniform candidates are accepted iff
/// they are at distance >= δ from every accepted point. Throws
/// std::length_error when max_points would be exceeded.
SphereNet build_net(int d, double delta, std::uint64_t seed, const NetOptions& options = {});

struct Decomposition {
  Vec u0;
  std::vector<double> coefficients;  // δ_j
  std::vector<Vec> directions;       // u_j
};

/// u = u0 − Σ δ_j u_j + O(δ^{depth+1}) with u0, u_j in the net and δ_j <= δ^j.
/// Throws std::runtime_error if a residual direction is farther than δ from
/// the net.
Decomposition decompose(const SphereNet& net, const Vec& u, int depth);

/// u0 − Σ δ_j u_j.
Vec reconstruct(const Decomposition& dec);

struct SupBracket {
  double net_sup = 0.0;
  double certified_sup = 0.0;
  Eigen::Index argmax = -1;
};

/// Deficit h_big − h_small over the net. certified_sup = 2·max(net_sup, 4δρ)
/// where ρ bounds the norm of every point of both bodies. Throws
/// std::domain_error if the deficit is below −1e-9 somewhere (bodies not
/// nested); smaller negative values are clamped to 0.
SupBracket certified_sup_deficit(const SphereNet& net, std::span<const double> h_big,
                                 std::span<const double> h_small, double radius = 1.0);

SupBracket certified_sup_deficit(const SphereNet& net, const std::function<double(const Vec&)>& h_big,
                                 const std::function<double(const Vec&)>& h_small, double radius = 1.0);

/// Same bracket for |h1 − h2| (no nesting assumption).
SupBracket certified_sup_abs(const SphereNet& net, std::span<const double> h1, std::span<const double> h2,
                             double radius = 1.0);

struct RefineOptions {
  int starts = 0;        // 0: 8 for d = 2, 16 otherwise
  double min_step = 1e-12;
};

/// Local maximization of g over the sphere, started from the best net
/// directions (values[i] = g(net.direction(i))). Returns a value >= the net
/// maximum.
double refine_sup(const SphereNet& net, std::span<const double> values, const std::function<double(const Vec&)>& g,
                  const RefineOptions& options = {});

}  // namespace hulllab
