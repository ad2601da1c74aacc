#include "hulllab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "hulllab/rng.hpp"

namespace hulllab {

// ---------------------------------------------------------------------------
// HullSupport

HullSupport::HullSupport(const Mat& points, int leaf_size) : leaf_size_(std::max(1, leaf_size)) {
  const Eigen::Index d = points.rows();
  const Eigen::Index n = points.cols();
  if (n < 1 || d < 1) throw std::invalid_argument("HullSupport: empty cloud");
  if (!points.allFinite()) throw std::invalid_argument("HullSupport: non-finite point");
  center_ = points.rowwise().mean();
  Mat unit(d, n);
  Vec norms(n);
  double scale = center_.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec y = points.col(i) - center_;
    norms[i] = y.norm();
    scale = std::max(scale, points.col(i).norm());
    if (norms[i] > 0.0) {
      unit.col(i) = y / norms[i];
    } else {
      unit.col(i).setZero();
      unit(0, i) = 1.0;
    }
  }
  margin_ = 1e-12 * std::max(1.0, scale);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  axes_.resize(d, 2 * (n / leaf_size_ + 1) + 1);
  nodes_.reserve(static_cast<std::size_t>(axes_.cols()));
  build(idx, unit, norms, 0, n);
  axes_.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(nodes_.size()));
  points_.resize(d, n);
  for (Eigen::Index i = 0; i < n; ++i) points_.col(i) = points.col(idx[i]);
}

std::int32_t HullSupport::build(std::vector<Eigen::Index>& idx, const Mat& unit, const Vec& norms,
                                Eigen::Index begin, Eigen::Index end) {
  const Eigen::Index d = unit.rows();
  const auto id = static_cast<std::int32_t>(nodes_.size());
  if (id >= axes_.cols()) axes_.conservativeResize(Eigen::NoChange, 2 * axes_.cols());
  Vec axis = Vec::Zero(d);
  double max_norm = 0.0;
  for (Eigen::Index i = begin; i < end; ++i) {
    axis += unit.col(idx[i]);
    max_norm = std::max(max_norm, norms[idx[i]]);
  }
  const double len = axis.norm();
  if (len > 1e-12) {
    axis /= len;
  } else {
    axis = unit.col(idx[begin]);
  }
  double cos_w = 1.0;
  for (Eigen::Index i = begin; i < end; ++i) cos_w = std::min(cos_w, axis.dot(unit.col(idx[i])));
  // Slightly widen the cone against rounding in the angle computation.
  cos_w = std::max(-1.0, cos_w - 1e-12);
  axes_.col(id) = axis;
  nodes_.push_back(Node{id, cos_w, std::sqrt(std::max(0.0, 1.0 - cos_w * cos_w)), max_norm * (1.0 + 1e-12), begin,
                        end, -1, -1});
  if (end - begin <= leaf_size_) return id;

  Eigen::Index split_axis = 0;
  double best_spread = -1.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = begin; i < end; ++i) {
      lo = std::min(lo, unit(k, idx[i]));
      hi = std::max(hi, unit(k, idx[i]));
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      split_axis = k;
    }
  }
  const Eigen::Index mid = begin + (end - begin) / 2;
  std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end, [&](Eigen::Index a, Eigen::Index b) {
    return unit(split_axis, a) < unit(split_axis, b) || (unit(split_axis, a) == unit(split_axis, b) && a < b);
  });
  const std::int32_t left = build(idx, unit, norms, begin, mid);
  const std::int32_t right = build(idx, unit, norms, mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

double HullSupport::node_bound(const Node& node, const double* x, double x_norm) const {
  if (x_norm == 0.0) return 0.0;
  const double cos_t = std::clamp(dot(x, axes_.col(node.axis).data(), dim()) / x_norm, -1.0, 1.0);
  double c;
  if (cos_t >= node.cos_w) {
    c = 1.0;
  } else {
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    c = std::max(0.0, cos_t * node.cos_w + sin_t * node.sin_w);
  }
  return x_norm * node.max_norm * c;
}

double HullSupport::evaluate(const double* x, Eigen::Index* hint) const {
  const Eigen::Index d = dim();
  const double x_norm = std::sqrt(dot(x, x, d));
  const double shift = dot(x, center_.data(), d);
  const double margin = margin_ * std::max(1.0, x_norm);
  Eigen::Index best_i = (hint != nullptr && *hint >= 0 && *hint < size()) ? *hint : 0;
  double best = dot(x, points_.col(best_i).data(), d);

  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (shift + node_bound(node, x, x_norm) + margin <= best) continue;
    if (node.left < 0) {
      for (Eigen::Index i = node.begin; i < node.end; ++i) {
        const double v = dot(x, points_.col(i).data(), d);
        if (v > best || (v == best && i < best_i)) {
          best = v;
          best_i = i;
        }
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    const double bl = node_bound(l, x, x_norm);
    const double br = node_bound(r, x, x_norm);
    if (bl >= br) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  if (hint != nullptr) *hint = best_i;
  return best;
}

std::vector<double> HullSupport::evaluate_all(const Mat& dirs) const {
  if (dirs.rows() != dim()) throw std::invalid_argument("HullSupport: dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(dirs.cols()));
  Eigen::Index hint = -1;
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) out[j] = evaluate(dirs.col(j).data(), &hint);
  return out;
}

double hull_support(const Mat& points, const Vec& u) {
  if (points.cols() < 1) throw std::invalid_argument("hull_support: empty cloud");
  if (points.rows() != u.size()) throw std::invalid_argument("hull_support: dimension mismatch");
  require_unit(u, "hull_support");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.cols(); ++i) best = std::max(best, dot(u.data(), points.col(i).data(), u.size()));
  return best;
}

double hull_support(const SampleCloud& cloud, const Vec& u) { return hull_support(cloud.points, u); }

// ---------------------------------------------------------------------------
// distances

std::vector<double> body_support_values(const BodySpec& body, const Mat& dirs) {
  std::vector<double> out(static_cast<std::size_t>(dirs.cols()));
  for (Eigen::Index j = 0; j < dirs.cols(); ++j) out[j] = support_homogeneous(body, dirs.col(j));
  return out;
}

namespace {

std::vector<double> resolve_body_values(const BodySpec& body, const SphereNet& net, std::span<const double> given) {
  if (!given.empty()) {
    if (given.size() != static_cast<std::size_t>(net.size())) {
      throw std::invalid_argument("body support values must match the net size");
    }
    return {given.begin(), given.end()};
  }
  return body_support_values(body, net.directions());
}

void check_dims(const BodySpec& body, Eigen::Index d, const SphereNet& net) {
  if (dim(body) != d || net.dim() != d) throw std::invalid_argument("dimension mismatch between body, cloud and net");
}

}  // namespace

DistanceResult hausdorff_to_body(const BodySpec& body, const HullSupport& hull, const SphereNet& net,
                                 std::span<const double> body_values) {
  check_dims(body, hull.dim(), net);
  const std::vector<double> big = resolve_body_values(body, net, body_values);
  const std::vector<double> small = hull.evaluate_all(net.directions());
  const double radius = std::max(1.0, circumradius(body));
  const SupBracket bracket = certified_sup_deficit(net, big, small, radius);
  std::vector<double> deficit(big.size());
  for (std::size_t i = 0; i < deficit.size(); ++i) deficit[i] = std::max(0.0, big[i] - small[i]);
  Eigen::Index hint = -1;
  const double refined = refine_sup(net, deficit, [&](const Vec& u) {
    return std::max(0.0, support_homogeneous(body, u) - hull.evaluate(u.data(), &hint));
  });
  return DistanceResult{"hausdorff", bracket.net_sup, std::max(refined, bracket.net_sup), bracket.certified_sup,
                        net.delta()};
}

DistanceResult hausdorff_to_body(const BodySpec& body, const SampleCloud& cloud, const SphereNet& net) {
  return hausdorff_to_body(body, HullSupport(cloud.points), net);
}

DistanceResult hausdorff_between(const BodySpec& first, const BodySpec& second, const SphereNet& net) {
  check_dims(first, dim(second), net);
  const std::vector<double> h1 = body_support_values(first, net.directions());
  const std::vector<double> h2 = body_support_values(second, net.directions());
  const double radius = std::max({1.0, circumradius(first), circumradius(second)});
  const SupBracket bracket = certified_sup_abs(net, h1, h2, radius);
  std::vector<double> diff(h1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(h1[i] - h2[i]);
  const double refined = refine_sup(net, diff, [&](const Vec& u) {
    return std::abs(support_homogeneous(first, u) - support_homogeneous(second, u));
  });
  return DistanceResult{"hausdorff", bracket.net_sup, std::max(refined, bracket.net_sup), bracket.certified_sup,
                        net.delta()};
}

DistanceResult d_l_estimate(const BodySpec& body, const Vec& center, const HullSupport& hull, const SphereNet& net,
                            std::span<const double> body_values) {
  check_dims(body, hull.dim(), net);
  if (center.size() != hull.dim()) throw std::invalid_argument("d_l_estimate: center dimension mismatch");
  if (!contains(body, center, 0.0)) throw std::invalid_argument("d_l_estimate: center is not inside the body");
  const std::vector<double> big = resolve_body_values(body, net, body_values);
  const std::vector<double> small = hull.evaluate_all(net.directions());
  const Mat& dirs = net.directions();
  std::vector<double> ratio(big.size());
  std::vector<double> deficit(big.size());
  double k_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < big.size(); ++i) {
    const double shift = dot(dirs.col(static_cast<Eigen::Index>(i)).data(), center.data(), center.size());
    const double k = big[i] - shift;
    if (!(k > 0.0)) throw std::domain_error("d_l_estimate: nonpositive re-centred support (center on the boundary)");
    k_min = std::min(k_min, k);
    deficit[i] = big[i] - small[i];
    ratio[i] = std::max(0.0, 1.0 - (small[i] - shift) / k);
  }
  double net_value = 0.0;
  for (double v : ratio) net_value = std::max(net_value, v);
  Eigen::Index hint = -1;
  const double refined = refine_sup(net, ratio, [&](const Vec& u) {
    const double shift = dot(u, center);
    const double k = support_homogeneous(body, u) - shift;
    if (!(k > 0.0)) return 0.0;
    return std::max(0.0, 1.0 - (hull.evaluate(u.data(), &hint) - shift) / k);
  });
  // The centred body support is Lipschitz with constant ρ, so on a δ-covering
  // its minimum over the sphere is at least min_net − ρδ.
  const double radius = std::max(1.0, circumradius(body) + center.norm());
  const SupBracket bracket = certified_sup_deficit(net, big, small, radius);
  const double k_lower = k_min - radius * net.delta();
  const double certified =
      k_lower > 0.0 ? std::max(net_value, bracket.certified_sup / k_lower) : std::numeric_limits<double>::infinity();
  return DistanceResult{"dl", net_value, std::max(refined, net_value), certified, net.delta()};
}

DistanceResult d_l_estimate(const BodySpec& body, const Vec& center, const SampleCloud& cloud, const SphereNet& net) {
  return d_l_estimate(body, center, HullSupport(cloud.points), net);
}

// ---------------------------------------------------------------------------
// quadrature and functionals

Quadrature make_quadrature(int d, std::int64_t quad_n, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("make_quadrature: dimension must be >= 1");
  if (quad_n < 2) throw std::invalid_argument("make_quadrature: quad_n must be >= 2");
  const std::int64_t half = (quad_n + 1) / 2;
  Quadrature quad;
  quad.seed = seed;
  quad.directions.resize(d, 2 * half);
  CounterRng rng(seed);
  for (std::int64_t i = 0; i < half; ++i) {
    uniform_on_sphere(rng, d, quad.directions.col(i).data());
    quad.directions.col(half + i) = -quad.directions.col(i);
  }
  return quad;
}

namespace {

void require_p(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
}

double power_mean(const std::vector<double>& values, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 1.0) {
    for (double v : values) s += std::abs(v);
    return s / static_cast<double>(values.size());
  }
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s / static_cast<double>(values.size()), 1.0 / p);
}

std::vector<double> widths(const std::vector<double>& h, Eigen::Index half) {
  std::vector<double> phi(static_cast<std::size_t>(half));
  for (Eigen::Index i = 0; i < half; ++i) phi[i] = h[i] + h[half + i];
  return phi;
}

}  // namespace

double lp_error(const BodySpec& body, const HullSupport& hull, double p, const Quadrature& quad) {
  return lp_error(body_support_values(body, quad.directions), hull, p, quad);
}

double lp_error(std::span<const double> big, const HullSupport& hull, double p, const Quadrature& quad) {
  require_p(p);
  if (static_cast<Eigen::Index>(big.size()) != quad.size()) throw std::invalid_argument("lp_error: body value count mismatch");
  const std::vector<double> small = hull.evaluate_all(quad.directions);
  std::vector<double> deficit(big.size());
  for (std::size_t i = 0; i < big.size(); ++i) {
    const double v = big[i] - small[i];
    deficit[i] = (v < 0.0 && v >= -1e-9) ? 0.0 : v;
  }
  return power_mean(deficit, p);
}

double lp_error(const BodySpec& body, const SampleCloud& cloud, double p, std::int64_t quad_n,
                std::uint64_t quad_seed) {
  return lp_error(body, HullSupport(cloud.points), p, make_quadrature(static_cast<int>(cloud.dim()), quad_n, quad_seed));
}

double width_lp_error(const BodySpec& body, const HullSupport& hull, double p, const Quadrature& quad) {
  require_p(p);
  const std::vector<double> big = widths(body_support_values(body, quad.directions), quad.half());
  const std::vector<double> small = widths(hull.evaluate_all(quad.directions), quad.half());
  std::vector<double> diff(big.size());
  for (std::size_t i = 0; i < big.size(); ++i) diff[i] = big[i] - small[i];
  return power_mean(diff, p);
}

std::string to_string(Functional f) { return f == Functional::T ? "T" : "S"; }

double functional_value(const std::vector<double>& support_values, Functional f, double p) {
  require_p(p);
  if (support_values.empty() || support_values.size() % 2 != 0) {
    throw std::invalid_argument("functional_value: expected an antipodally paired quadrature");
  }
  if (f == Functional::T) return power_mean(support_values, p);
  return power_mean(widths(support_values, static_cast<Eigen::Index>(support_values.size() / 2)), p);
}

double functional_body(const BodySpec& body, Functional f, double p, const Quadrature& quad) {
  return functional_value(body_support_values(body, quad.directions), f, p);
}

double functional_hull(const HullSupport& hull, Functional f, double p, const Quadrature& quad) {
  return functional_value(hull.evaluate_all(quad.directions), f, p);
}

namespace {

template <class H>
double sup_functional(const H& h, Functional f, const SphereNet& net) {
  const Mat& dirs = net.directions();
  std::vector<double> values(static_cast<std::size_t>(net.size()));
  auto g = [&](const Vec& u) {
    if (f == Functional::T) return std::abs(h(u));
    return h(u) + h(Vec(-u));
  };
  for (Eigen::Index i = 0; i < net.size(); ++i) values[i] = g(dirs.col(i));
  return refine_sup(net, values, g);
}

}  // namespace

double functional_body_sup(const BodySpec& body, Functional f, const SphereNet& net) {
  if (dim(body) != net.dim()) throw std::invalid_argument("dimension mismatch between body and net");
  return sup_functional([&](const Vec& u) { return support_homogeneous(body, u); }, f, net);
}

double functional_hull_sup(const HullSupport& hull, Functional f, const SphereNet& net) {
  if (hull.dim() != net.dim()) throw std::invalid_argument("dimension mismatch between cloud and net");
  return sup_functional([&](const Vec& u) { return hull(u); }, f, net);
}

double functional_plugin_error(const BodySpec& body, const HullSupport& hull, Functional f, double p,
                               const Quadrature& quad) {
  return std::abs(functional_body(body, f, p, quad) - functional_hull(hull, f, p, quad));
}

}  // namespace hulllab
