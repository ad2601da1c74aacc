#include "hulllab/sampler.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "hulllab/rng.hpp"

namespace hulllab {

std::string to_string(SampleMode mode) { return mode == SampleMode::interior ? "interior" : "boundary"; }

SampleMode parse_sample_mode(const std::string& text) {
  if (text == "interior") return SampleMode::interior;
  if (text == "boundary") return SampleMode::boundary;
  throw std::invalid_argument("unknown sampling mode '" + text + "' (expected interior|boundary)");
}

namespace {

void unit_ball_point(CounterRng& rng, Eigen::Index d, double* out) {
  uniform_on_sphere(rng, d, out);
  const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  for (Eigen::Index k = 0; k < d; ++k) out[k] *= radius;
}

class RejectionGuard {
 public:
  void attempt() {
    ++attempts_;
    if (attempts_ >= 1'000'000 * (accepted_ + 1)) {
      throw std::runtime_error("sample: rejection efficiency below 1e-6 (degenerate body for its bounding region)");
    }
  }
  void accept() { ++accepted_; }

 private:
  std::int64_t attempts_ = 0;
  std::int64_t accepted_ = 0;
};

Mat unit_ball_cloud(Eigen::Index d, std::int64_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  Mat pts(d, n);
  for (std::int64_t i = 0; i < n; ++i) unit_ball_point(rng, d, pts.col(i).data());
  return pts;
}

Mat sample_interior(const BodySpec& body, std::int64_t n, std::uint64_t seed) {
  const Eigen::Index d = dim(body);
  if (const auto* b = std::get_if<Ball>(&body)) {
    Mat pts = unit_ball_cloud(d, n, seed);
    for (std::int64_t i = 0; i < n; ++i) pts.col(i) = b->center + b->radius * pts.col(i);
    return pts;
  }
  if (const auto* e = std::get_if<Ellipsoid>(&body)) {
    Mat pts = unit_ball_cloud(d, n, seed);
    for (std::int64_t i = 0; i < n; ++i) {
      const Vec y = pts.col(i);
      pts.col(i) = e->center + e->rotation * e->semi_axes.cwiseProduct(y);
    }
    return pts;
  }
  CounterRng rng(seed);
  Mat pts(d, n);
  Vec x(d);
  RejectionGuard guard;
  if (std::holds_alternative<PolytopeV>(body)) {
    const auto [lo, hi] = bounding_box(body);
    for (std::int64_t i = 0; i < n;) {
      guard.attempt();
      for (Eigen::Index k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * rng.uniform();
      if (contains(body, x, 0.0)) {
        guard.accept();
        pts.col(i++) = x;
      }
    }
    return pts;
  }
  const auto& bump = std::get<BumpBall>(body);
  for (std::int64_t i = 0; i < n;) {
    guard.attempt();
    unit_ball_point(rng, d, x.data());
    x *= bump.radius;
    if (contains(body, x, 0.0)) {
      guard.accept();
      pts.col(i++) = x;
    }
  }
  return pts;
}

Mat sample_boundary(const BodySpec& body, std::int64_t n, std::uint64_t seed) {
  const Eigen::Index d = dim(body);
  CounterRng rng(seed);
  Mat pts(d, n);
  Vec theta(d);
  if (const auto* b = std::get_if<Ball>(&body)) {
    for (std::int64_t i = 0; i < n; ++i) {
      uniform_on_sphere(rng, d, theta.data());
      pts.col(i) = b->center + b->radius * theta;
    }
    return pts;
  }
  if (const auto* e = std::get_if<Ellipsoid>(&body)) {
    // The map θ ↦ c + R·S·θ scales surface area by ∏a·|S^{-1}θ|, whose
    // supremum over the sphere is ∏a / min a.
    const double a_min = e->semi_axes.minCoeff();
    RejectionGuard guard;
    for (std::int64_t i = 0; i < n;) {
      guard.attempt();
      uniform_on_sphere(rng, d, theta.data());
      const double jacobian = a_min * theta.cwiseQuotient(e->semi_axes).norm();
      if (rng.uniform() < jacobian) {
        guard.accept();
        pts.col(i++) = e->center + e->rotation * e->semi_axes.cwiseProduct(theta);
      }
    }
    return pts;
  }
  throw std::invalid_argument("sample: boundary sampling is not supported for " + kind_name(body) + " bodies");
}

}  // namespace

SampleCloud sample(const BodySpec& body, SampleMode mode, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  validate(body);
  SampleCloud cloud;
  cloud.body = body;
  cloud.mode = mode;
  cloud.seed = seed;
  cloud.points = mode == SampleMode::interior ? sample_interior(body, n, seed) : sample_boundary(body, n, seed);
  return cloud;
}

double empirical_cap_probability(const SampleCloud& cloud, const Vec& u, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("empirical_cap_probability: eps must be >= 0");
  if (cloud.n() == 0) return 0.0;
  const double level = support(cloud.body, u) - eps;
  std::int64_t hits = 0;
  for (Eigen::Index i = 0; i < cloud.n(); ++i) {
    if (dot(u.data(), cloud.points.col(i).data(), u.size()) >= level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cloud.n());
}

void write_points_csv(std::ostream& out, const Mat& points) {
  char buf[32];
  std::string line;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    line.clear();
    for (Eigen::Index k = 0; k < points.rows(); ++k) {
      if (k) line.push_back(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), points(k, i));
      line.append(buf, res.ptr);
    }
    line.push_back('\n');
    out << line;
  }
}

void write_points_csv(const std::string& path, const Mat& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_points_csv(out, points);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Mat read_points_csv(std::istream& in) {
  std::vector<double> values;
  Eigen::Index dim = -1;
  Eigen::Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    Eigen::Index count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (;;) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw std::runtime_error("points csv: cannot parse number on line " + std::to_string(line_no));
      }
      values.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      if (p == end) break;
      if (*p != ',') throw std::runtime_error("points csv: unexpected character on line " + std::to_string(line_no));
      ++p;
    }
    if (dim < 0) dim = count;
    if (count != dim) throw std::runtime_error("points csv: inconsistent column count on line " + std::to_string(line_no));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error("points csv: no points");
  Mat pts(dim, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) pts(k, i) = values[static_cast<std::size_t>(i * dim + k)];
  }
  return pts;
}

Mat read_points_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_points_csv(in);
}

}  // namespace hulllab
