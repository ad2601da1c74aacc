#include "hulllab/linalg.hpp"

#include <stdexcept>
#include <string>

namespace hulllab {

void require_unit(const Vec& u, const char* what) {
  const double norm = std::sqrt(dot(u, u));
  if (!(std::abs(norm - 1.0) <= 1e-9)) {
    throw std::invalid_argument(std::string(what) + ": direction is not a unit vector (norm " +
                                std::to_string(norm) + ")");
  }
}

Direction Direction::checked(const Vec& v) {
  if (v.size() < 1) throw std::invalid_argument("Direction: empty vector");
  require_unit(v, "Direction");
  return Direction(v / std::sqrt(dot(v, v)));
}

Direction Direction::normalized(const Vec& v) {
  if (v.size() < 1) throw std::invalid_argument("Direction: empty vector");
  const double norm = std::sqrt(dot(v, v));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("Direction: cannot normalize a zero or non-finite vector");
  }
  return Direction(v / norm);
}

Mat tangent_basis(const Vec& u) {
  const Eigen::Index d = u.size();
  // Householder reflection mapping e_k to ±u; its remaining columns span u^⊥.
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  Vec w = u;
  w[k] += (u[k] >= 0.0 ? 1.0 : -1.0);
  const double ww = w.squaredNorm();
  Mat basis(d, d - 1);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (j == k) continue;
    Vec e = Vec::Zero(d);
    e[j] = 1.0;
    basis.col(col++) = e - (2.0 * w[j] / ww) * w;
  }
  return basis;
}

}  // namespace hulllab
