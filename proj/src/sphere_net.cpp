#include "hulllab/sphere_net.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hulllab/rng.hpp"

namespace hulllab {

// ---------------------------------------------------------------------------
// PointGrid

namespace {

constexpr std::int64_t kMaxBoxCells = 4096;

int bits_per_axis(Eigen::Index d) { return d <= 3 ? 21 : 16; }

}  // namespace

PointGrid::PointGrid(Eigen::Index dim, double cell) : dim_(dim), cell_(cell) {
  if (dim < 1) throw std::invalid_argument("PointGrid: dimension must be >= 1");
  if (!(cell > 0.0)) throw std::invalid_argument("PointGrid: cell size must be positive");
  if (gridded()) {
    const double reach = 4.0 / cell + 2.0;
    if (reach >= std::ldexp(1.0, bits_per_axis(dim) - 1)) cell_ = 4.0 / (std::ldexp(1.0, bits_per_axis(dim) - 1) - 4.0);
  }
}

void PointGrid::cell_of(const double* x, std::int64_t* cell) const {
  for (Eigen::Index k = 0; k < dim_; ++k) cell[k] = static_cast<std::int64_t>(std::floor(x[k] / cell_));
}

std::uint64_t PointGrid::key_of(const std::int64_t* cell) const {
  const int bits = bits_per_axis(dim_);
  const std::int64_t offset = std::int64_t{1} << (bits - 1);
  std::uint64_t key = 0;
  for (Eigen::Index k = 0; k < dim_; ++k) {
    key = (key << bits) | static_cast<std::uint64_t>(cell[k] + offset);
  }
  return key;
}

void PointGrid::insert(const double* p, Eigen::Index id) {
  ++count_;
  all_.push_back(id);
  if (!gridded()) return;
  std::int64_t cell[4];
  cell_of(p, cell);
  const std::int64_t limit = (std::int64_t{1} << (bits_per_axis(dim_) - 1)) - 1;
  for (Eigen::Index k = 0; k < dim_; ++k) {
    if (std::abs(cell[k]) >= limit) throw std::out_of_range("PointGrid: point outside the indexed region");
  }
  cells_[key_of(cell)].push_back(id);
}

template <class F>
bool PointGrid::visit_box(const double* x, double radius, F&& f) const {
  if (gridded()) {
    std::int64_t lo[4];
    std::int64_t hi[4];
    std::int64_t cells = 1;
    for (Eigen::Index k = 0; k < dim_; ++k) {
      lo[k] = static_cast<std::int64_t>(std::floor((x[k] - radius) / cell_));
      hi[k] = static_cast<std::int64_t>(std::floor((x[k] + radius) / cell_));
      cells *= hi[k] - lo[k] + 1;
      if (cells > kMaxBoxCells) break;
    }
    if (cells <= kMaxBoxCells && cells <= static_cast<std::int64_t>(count_) + 16) {
      std::int64_t cur[4];
      for (Eigen::Index k = 0; k < dim_; ++k) cur[k] = lo[k];
      for (;;) {
        auto it = cells_.find(key_of(cur));
        if (it != cells_.end()) {
          for (Eigen::Index id : it->second) f(id);
        }
        Eigen::Index k = 0;
        while (k < dim_ && cur[k] == hi[k]) {
          cur[k] = lo[k];
          ++k;
        }
        if (k == dim_) break;
        ++cur[k];
      }
      return true;
    }
  }
  for (Eigen::Index id : all_) f(id);
  return false;
}

std::pair<Eigen::Index, double> PointGrid::nearest(const double* x, const Mat& points) const {
  Eigen::Index best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  auto consider = [&](Eigen::Index id) {
    const double d2 = squared_distance(x, points.col(id).data(), dim_);
    if (d2 < best_d2 || (d2 == best_d2 && id < best)) {
      best_d2 = d2;
      best = id;
    }
  };
  if (count_ == 0) return {-1, std::numeric_limits<double>::infinity()};
  double radius = cell_;
  for (;;) {
    const bool boxed = visit_box(x, radius, consider);
    if (!boxed) break;
    if (best >= 0 && std::sqrt(best_d2) <= radius) break;
    radius *= 2.0;
  }
  return {best, std::sqrt(best_d2)};
}

double PointGrid::nearest_distance_within(const double* x, double radius, const Mat& points) const {
  double best_d2 = radius * radius;
  visit_box(x, radius, [&](Eigen::Index id) {
    best_d2 = std::min(best_d2, squared_distance(x, points.col(id).data(), dim_));
  });
  return std::sqrt(best_d2);
}

bool PointGrid::any_within(const double* x, double radius, const Mat& points) const {
  bool found = false;
  visit_box(x, radius, [&](Eigen::Index id) {
    if (!found && euclidean_distance(x, points.col(id).data(), dim_) < radius) found = true;
  });
  return found;
}

void PointGrid::collect_within(const double* x, double radius, const Mat& points,
                               std::vector<Eigen::Index>& out) const {
  visit_box(x, radius, [&](Eigen::Index id) {
    if (euclidean_distance(x, points.col(id).data(), dim_) <= radius) out.push_back(id);
  });
}

// ---------------------------------------------------------------------------
// SphereNet

SphereNet::SphereNet(int dim, double delta, std::uint64_t seed, Mat directions, double covering_radius_estimate)
    : dim_(dim),
      delta_(delta),
      seed_(seed),
      covering_radius_(covering_radius_estimate),
      directions_(std::move(directions)),
      grid_(dim, delta) {
  if (dim < 1) throw std::invalid_argument("SphereNet: dimension must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("SphereNet: delta must lie in (0, 1]");
  if (directions_.rows() != dim) throw std::invalid_argument("SphereNet: direction dimension mismatch");
  if (directions_.cols() < 1) throw std::invalid_argument("SphereNet: empty direction set");
  for (Eigen::Index i = 0; i < directions_.cols(); ++i) {
    require_unit(directions_.col(i), "SphereNet");
    grid_.insert(directions_.col(i).data(), i);
  }
}

std::pair<Eigen::Index, double> SphereNet::nearest(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("SphereNet::nearest: dimension mismatch");
  return grid_.nearest(x.data(), directions_);
}

double SphereNet::min_pairwise_distance() const {
  const Eigen::Index n = directions_.cols();
  if (n < 2) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  const double reach = 2.0 * delta_;
  std::vector<Eigen::Index> near;
  for (Eigen::Index i = 0; i < n; ++i) {
    near.clear();
    grid_.collect_within(directions_.col(i).data(), reach, directions_, near);
    for (Eigen::Index j : near) {
      if (j == i) continue;
      best = std::min(best, euclidean_distance(directions_.col(i).data(), directions_.col(j).data(), dim_));
    }
  }
  if (best <= reach) return best;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      best = std::min(best, euclidean_distance(directions_.col(i).data(), directions_.col(j).data(), dim_));
    }
  }
  return best;
}

double SphereNet::probe_covering_radius(std::int64_t probes, std::uint64_t seed) const {
  CounterRng rng(seed);
  Vec x(dim_);
  double worst = 0.0;
  for (std::int64_t k = 0; k < probes; ++k) {
    uniform_on_sphere(rng, dim_, x.data());
    worst = std::max(worst, grid_.nearest(x.data(), directions_).second);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// build_net

namespace {

class Packing {
 public:
  Packing(Eigen::Index d, double delta, std::int64_t max_points)
      : d_(d), delta_(delta), max_points_(max_points), points_(d, 1024), grid_(d, delta) {}

  bool try_add(const double* x) {
    if (grid_.any_within(x, delta_, points_)) return false;
    add(x);
    return true;
  }

  // Adds x without the separation test.
  void add(const double* x) {
    if (count_ >= max_points_) {
      throw std::length_error("build_net: cardinality budget of " + std::to_string(max_points_) +
                              " directions exceeded; delta too small");
    }
    if (count_ == points_.cols()) points_.conservativeResize(Eigen::NoChange, 2 * points_.cols());
    for (Eigen::Index k = 0; k < d_; ++k) points_(k, count_) = x[k];
    grid_.insert(points_.col(count_).data(), count_);
    ++count_;
  }

  double distance_within(const double* x, double radius) const {
    return grid_.nearest_distance_within(x, radius, points_);
  }

  std::pair<Eigen::Index, double> nearest(const double* x) const { return grid_.nearest(x, points_); }
  void collect(const double* x, double radius, std::vector<Eigen::Index>& out) const {
    grid_.collect_within(x, radius, points_, out);
  }
  Eigen::Index count() const { return count_; }
  Mat points() const { return points_.leftCols(count_); }
  const double* point(Eigen::Index i) const { return points_.col(i).data(); }

 private:
  Eigen::Index d_;
  double delta_;
  std::int64_t max_points_;
  Mat points_;
  PointGrid grid_;
  Eigen::Index count_ = 0;
};

void fill_circle(Packing& pack, double delta) {
  if (pack.count() == 0) return;
  const double theta = 2.0 * std::asin(0.5 * delta) * (1.0 + 1e-12);
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < pack.count(); ++i) angles.push_back(std::atan2(pack.point(i)[1], pack.point(i)[0]));
  std::sort(angles.begin(), angles.end());
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t m = angles.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double start = angles[i];
    const double gap = (i + 1 < m ? angles[i + 1] : angles[0] + two_pi) - start;
    const auto k = static_cast<std::int64_t>(std::floor(gap / theta));
    for (std::int64_t j = 1; j < k; ++j) {
      const double a = start + gap * static_cast<double>(j) / static_cast<double>(k);
      const double x[2] = {std::cos(a), std::sin(a)};
      pack.try_add(x);
    }
  }
}

// Circumcentre on S^2 of three points, on the side of `hint`.
bool spherical_circumcenter(const double* a, const double* b, const double* c, const double* hint, double* out) {
  const double ba[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const double ca[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  double n[3] = {ba[1] * ca[2] - ba[2] * ca[1], ba[2] * ca[0] - ba[0] * ca[2], ba[0] * ca[1] - ba[1] * ca[0]};
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!(norm > 1e-300)) return false;
  const double sign = (n[0] * hint[0] + n[1] * hint[1] + n[2] * hint[2]) < 0.0 ? -1.0 : 1.0;
  for (int k = 0; k < 3; ++k) out[k] = sign * n[k] / norm;
  return true;
}

// Ascends the distance-to-packing function from x towards the Voronoi vertex
// of the enclosing hole and adds that vertex when it is still >= δ away.
void polish_hole(Packing& pack, double delta, const double* x) {
  double p[3] = {x[0], x[1], x[2]};
  std::vector<Eigen::Index> near;
  for (int it = 0; it < 20; ++it) {
    near.clear();
    pack.collect(p, 2.0 * delta, near);
    if (near.size() < 3) return;
    std::partial_sort(near.begin(), near.begin() + 3, near.end(), [&](Eigen::Index i, Eigen::Index j) {
      const double di = squared_distance(p, pack.point(i), 3);
      const double dj = squared_distance(p, pack.point(j), 3);
      return di < dj || (di == dj && i < j);
    });
    double c[3];
    if (!spherical_circumcenter(pack.point(near[0]), pack.point(near[1]), pack.point(near[2]), p, c)) return;
    const auto [idx, dist] = pack.nearest(c);
    if (dist >= delta) {
      pack.try_add(c);
      return;
    }
    if (idx == near[0] || idx == near[1] || idx == near[2]) return;
    if (std::abs(dist - euclidean_distance(c, pack.point(near[0]), 3)) <= 1e-15) return;
    std::copy(c, c + 3, p);
  }
}

void fill_sphere(Packing& pack, double delta) {
  const auto m = static_cast<int>(std::min(600.0, std::ceil(16.0 / delta)));
  const double spacing = 2.0 / m;
  std::vector<std::array<double, 3>> near_holes;
  for (int axis = 0; axis < 3; ++axis) {
    const int ia = (axis + 1) % 3;
    const int ib = (axis + 2) % 3;
    for (double sign : {1.0, -1.0}) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          double x[3];
          x[axis] = sign;
          x[ia] = -1.0 + (i + 0.5) * spacing;
          x[ib] = -1.0 + (j + 0.5) * spacing;
          const double norm = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
          for (double& v : x) v /= norm;
          const double dist = pack.distance_within(x, delta);
          if (dist >= delta) {
            pack.add(x);
          } else if (dist > delta - spacing) {
            near_holes.push_back({x[0], x[1], x[2]});
          }
        }
      }
    }
  }
  for (const auto& h : near_holes) polish_hole(pack, delta, h.data());
}

Mat spatial_order(const Mat& pts, double delta) {
  const Eigen::Index d = pts.rows();
  const Eigen::Index n = pts.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (d == 2) {
    std::vector<double> key(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) key[i] = std::atan2(pts(1, i), pts(0, i));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return key[a] < key[b]; });
  } else if (d >= 3) {
    const double band = 2.0 * delta;
    std::vector<std::int64_t> band_of(static_cast<std::size_t>(n));
    std::vector<double> az(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const double polar = std::acos(std::clamp(pts(d - 1, i), -1.0, 1.0));
      band_of[i] = static_cast<std::int64_t>(std::floor(polar / band));
      az[i] = std::atan2(pts(1, i), pts(0, i));
    }
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (band_of[a] != band_of[b]) return band_of[a] < band_of[b];
      return (band_of[a] % 2 == 0) ? az[a] < az[b] : az[a] > az[b];
    });
  }
  Mat out(d, n);
  for (Eigen::Index i = 0; i < n; ++i) out.col(i) = pts.col(order[i]);
  return out;
}

}  // namespace

SphereNet build_net(int d, double delta, std::uint64_t seed, const NetOptions& options) {
  if (d < 1) throw std::invalid_argument("build_net: dimension must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("build_net: delta must lie in (0, 1]");
  if (d == 1) {
    Mat dirs(1, 2);
    dirs << 1.0, -1.0;
    return SphereNet(1, delta, seed, dirs, 0.0);
  }
  CounterRng rng(seed);
  CounterRng candidates = rng.split(1);
  Packing pack(d, delta, options.max_points);
  const std::int64_t streak_limit =
      options.rejection_streak > 0
          ? options.rejection_streak
          : static_cast<std::int64_t>(std::ceil(50.0 / std::pow(delta, (options.fill && d <= 3) ? 1 : d - 1)));
  Vec x(d);
  std::int64_t streak = 0;
  while (streak < streak_limit) {
    uniform_on_sphere(candidates, d, x.data());
    if (pack.try_add(x.data())) {
      streak = 0;
    } else {
      ++streak;
    }
  }
  if (options.fill) {
    if (d == 2) fill_circle(pack, delta);
    if (d == 3) fill_sphere(pack, delta);
  }
  Mat dirs = spatial_order(pack.points(), delta);
  SphereNet provisional(d, delta, seed, dirs, 0.0);
  const double covering = provisional.probe_covering_radius(options.covering_probes, rng.split(2).key());
  return SphereNet(d, delta, seed, std::move(dirs), covering);
}

// ---------------------------------------------------------------------------
// decomposition

Decomposition decompose(const SphereNet& net, const Vec& u, int depth) {
  if (depth < 1) throw std::invalid_argument("decompose: depth must be >= 1");
  if (u.size() != net.dim()) throw std::invalid_argument("decompose: dimension mismatch");
  require_unit(u, "decompose");
  const double limit = net.delta() * (1.0 + 1e-12);
  auto nearest_checked = [&](const Vec& v) {
    const auto [idx, dist] = net.nearest(v);
    if (!(dist <= limit)) {
      throw std::runtime_error("decompose: covering-radius violation (distance " + std::to_string(dist) +
                               " to the net exceeds delta " + std::to_string(net.delta()) + ")");
    }
    return idx;
  };
  Decomposition dec;
  dec.u0 = net.direction(nearest_checked(u));
  Vec r = dec.u0 - u;
  for (int j = 0; j < depth; ++j) {
    const double norm = std::sqrt(dot(r, r));
    if (!(norm > 0.0)) {
      dec.coefficients.push_back(0.0);
      dec.directions.push_back(dec.u0);
      continue;
    }
    const Vec uj = net.direction(nearest_checked(r / norm));
    dec.coefficients.push_back(norm);
    dec.directions.push_back(uj);
    r -= norm * uj;
  }
  return dec;
}

Vec reconstruct(const Decomposition& dec) {
  Vec v = dec.u0;
  for (std::size_t j = 0; j < dec.coefficients.size(); ++j) v -= dec.coefficients[j] * dec.directions[j];
  return v;
}

// ---------------------------------------------------------------------------
// sup brackets

namespace {

SupBracket bracket_from(const SphereNet& net, std::span<const double> values, double radius) {
  SupBracket out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (out.argmax < 0 || values[i] > out.net_sup) {
      out.net_sup = values[i];
      out.argmax = static_cast<Eigen::Index>(i);
    }
  }
  out.certified_sup = 2.0 * std::max(out.net_sup, 4.0 * net.delta() * radius);
  return out;
}

void check_sizes(const SphereNet& net, std::size_t a, std::size_t b) {
  if (a != static_cast<std::size_t>(net.size()) || b != static_cast<std::size_t>(net.size())) {
    throw std::invalid_argument("certified sup: value arrays must match the net size");
  }
}

}  // namespace

SupBracket certified_sup_deficit(const SphereNet& net, std::span<const double> h_big,
                                 std::span<const double> h_small, double radius) {
  check_sizes(net, h_big.size(), h_small.size());
  std::vector<double> deficit(h_big.size());
  for (std::size_t i = 0; i < deficit.size(); ++i) {
    const double v = h_big[i] - h_small[i];
    if (v < -1e-9) {
      throw std::domain_error("certified_sup_deficit: negative deficit " + std::to_string(v) +
                              " (bodies are not nested)");
    }
    deficit[i] = std::max(0.0, v);
  }
  return bracket_from(net, deficit, radius);
}

SupBracket certified_sup_deficit(const SphereNet& net, const std::function<double(const Vec&)>& h_big,
                                 const std::function<double(const Vec&)>& h_small, double radius) {
  std::vector<double> big(static_cast<std::size_t>(net.size()));
  std::vector<double> small(big.size());
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    const Vec u = net.direction(i);
    big[i] = h_big(u);
    small[i] = h_small(u);
  }
  return certified_sup_deficit(net, big, small, radius);
}

SupBracket certified_sup_abs(const SphereNet& net, std::span<const double> h1, std::span<const double> h2,
                             double radius) {
  check_sizes(net, h1.size(), h2.size());
  std::vector<double> diff(h1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(h1[i] - h2[i]);
  return bracket_from(net, diff, radius);
}

// ---------------------------------------------------------------------------
// local refinement

namespace {

std::vector<Eigen::Index> pick_starts(const SphereNet& net, std::span<const double> values, int k) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  std::vector<Eigen::Index> starts;
  const Mat& dirs = net.directions();
  for (Eigen::Index i : order) {
    if (static_cast<int>(starts.size()) >= k) break;
    bool separated = true;
    for (Eigen::Index s : starts) {
      if (euclidean_distance(dirs.col(i).data(), dirs.col(s).data(), net.dim()) < net.delta()) {
        separated = false;
        break;
      }
    }
    if (separated) starts.push_back(i);
  }
  return starts;
}

}  // namespace

double refine_sup(const SphereNet& net, std::span<const double> values, const std::function<double(const Vec&)>& g,
                  const RefineOptions& options) {
  if (values.size() != static_cast<std::size_t>(net.size())) {
    throw std::invalid_argument("refine_sup: value array must match the net size");
  }
  const int d = net.dim();
  double best_overall = -std::numeric_limits<double>::infinity();
  for (double v : values) best_overall = std::max(best_overall, v);
  if (d == 1) return best_overall;

  const int starts = options.starts > 0 ? options.starts : (d == 2 ? 8 : 16);
  const int m = d == 2 ? 3 : 2;
  const Eigen::Index t = d - 1;

  for (Eigen::Index s : pick_starts(net, values, starts)) {
    const Vec u0 = net.direction(s);
    const Mat basis = tangent_basis(u0);
    Vec center = Vec::Zero(t);
    double center_value = values[s];
    double h = 1.5 * net.delta();
    auto eval = [&](const Vec& a) {
      Vec u = u0 + basis * a;
      u /= std::sqrt(dot(u, u));
      return g(u);
    };
    for (int iter = 0; iter < 400 && h > options.min_step; ++iter) {
      Vec best_a = center;
      double best_v = center_value;
      bool on_edge = false;
      if (d <= 3) {
        std::vector<int> idx(static_cast<std::size_t>(t), -m);
        for (;;) {
          bool is_center = true;
          Vec a = center;
          for (Eigen::Index k = 0; k < t; ++k) {
            a[k] += h * static_cast<double>(idx[k]) / m;
            if (idx[k] != 0) is_center = false;
          }
          if (!is_center) {
            const double v = eval(a);
            if (v > best_v) {
              best_v = v;
              best_a = a;
              on_edge = false;
              for (Eigen::Index k = 0; k < t; ++k) on_edge = on_edge || std::abs(idx[k]) == m;
            }
          }
          Eigen::Index k = 0;
          while (k < t && idx[k] == m) {
            idx[k] = -m;
            ++k;
          }
          if (k == t) break;
          ++idx[k];
        }
      } else {
        for (Eigen::Index k = 0; k < t; ++k) {
          for (double sign : {1.0, -1.0}) {
            Vec a = center;
            a[k] += sign * h;
            const double v = eval(a);
            if (v > best_v) {
              best_v = v;
              best_a = a;
              on_edge = true;
            }
          }
        }
      }
      const bool moved = best_v > center_value;
      center = best_a;
      center_value = best_v;
      if (!(moved && on_edge)) h *= 0.5;
    }
    best_overall = std::max(best_overall, center_value);
  }
  return best_overall;
}

}  // namespace hulllab
