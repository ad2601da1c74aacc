#include "hulllab/rng.hpp"

#include <cmath>
#include <numbers>

namespace hulllab {

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void uniform_on_sphere(CounterRng& rng, Eigen::Index d, double* out) {
  for (;;) {
    double norm2 = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      out[k] = rng.normal();
      norm2 += out[k] * out[k];
    }
    if (norm2 > 1e-300) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (Eigen::Index k = 0; k < d; ++k) out[k] *= inv;
      return;
    }
  }
}

Vec uniform_on_sphere(CounterRng& rng, Eigen::Index d) {
  Vec v(d);
  uniform_on_sphere(rng, d, v.data());
  return v;
}

}  // namespace hulllab
