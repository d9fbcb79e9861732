#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace lieforge {

// All randomness flows through one explicitly seeded generator.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline Eigen::VectorXd gaussian_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gaussian(rng);
  return v;
}

inline Eigen::VectorXd random_unit_vector(Rng& rng, int n) {
  Eigen::VectorXd v = gaussian_vector(rng, n);
  while (v.norm() < 1e-12) v = gaussian_vector(rng, n);
  return v / v.norm();
}

// Uniform in the Euclidean ball of given radius.
inline Eigen::VectorXd random_ball_vector(Rng& rng, int n, double radius) {
  Eigen::VectorXd dir = random_unit_vector(rng, n);
  double r = radius * std::pow(uniform(rng), 1.0 / n);
  return r * dir;
}

}  // namespace lieforge
