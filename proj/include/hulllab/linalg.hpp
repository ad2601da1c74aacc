#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace hulllab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Plain left-to-right dot product. Every support evaluation in the library
// goes through this so that two code paths over the same point give
// bit-identical values.
inline double dot(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

inline double dot(const Vec& a, const Vec& b) { return dot(a.data(), b.data(), a.size()); }

inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

/// A point of the unit sphere S^{d-1}.
///
/// Construction either checks an input that is already unit (tolerance 1e-9,
/// the library-wide acceptance threshold) or normalizes an arbitrary nonzero
/// vector. Either way the stored coordinates have norm 1 within 1e-12.
class Direction {
 public:
  static Direction checked(const Vec& v);
  static Direction normalized(const Vec& v);

  const Vec& vec() const { return v_; }
  Eigen::Index dim() const { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_[i]; }
  Direction operator-() const { return Direction(-v_); }

 private:
  explicit Direction(Vec v) : v_(std::move(v)) {}
  Vec v_;
};

/// Throws std::invalid_argument when |‖u‖ − 1| > 1e-9.
void require_unit(const Vec& u, const char* what);

/// Orthonormal basis of the hyperplane orthogonal to the unit vector u,
/// returned as the columns of a d × (d−1) matrix.
Mat tangent_basis(const Vec& u);

}  // namespace hulllab
