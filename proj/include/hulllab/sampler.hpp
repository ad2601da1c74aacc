#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "hulllab/geometry.hpp"

namespace hulllab {

enum class SampleMode { interior, boundary };

std::string to_string(SampleMode mode);
SampleMode parse_sample_mode(const std::string& text);

/// n i.i.d. uniform points (columns of `points`) drawn from a body.
struct SampleCloud {
  Mat points;  // d × n
  BodySpec body;
  SampleMode mode = SampleMode::interior;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return points.cols(); }
  Eigen::Index dim() const { return points.rows(); }
};

/// Interior sampling is supported for every body family, boundary sampling
/// for balls and ellipsoids. Rejection samplers throw std::runtime_error when
/// the acceptance rate falls below 1e-6.
SampleCloud sample(const BodySpec& body, SampleMode mode, std::int64_t n, std::uint64_t seed);

/// Fraction of cloud points x with ⟨u,x⟩ >= h_body(u) − eps.
double empirical_cap_probability(const SampleCloud& cloud, const Vec& u, double eps);

void write_points_csv(std::ostream& out, const Mat& points);
void write_points_csv(const std::string& path, const Mat& points);

/// Reads one point per line (comma separated); blank lines and lines
/// starting with '#' are skipped.
Mat read_points_csv(std::istream& in);
Mat read_points_csv(const std::string& path);

}  // namespace hulllab
