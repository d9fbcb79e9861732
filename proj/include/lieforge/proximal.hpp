#pragma once

#include <Eigen/Dense>
#include <complex>

#include "lieforge/group.hpp"

namespace lieforge {

enum class ProximalKind { OneProximal, C1Proximal, Neither };

// Spectral data of Ad_g - Id: dominant eigenvalue s, its invariant
// line/plane L(g), and (in the complex case) the invariant complex
// structure J on L(g).
struct ProximalData {
  ProximalKind kind = ProximalKind::Neither;
  std::complex<double> s{0, 0};
  // Orthonormal basis of L(g): 1 column (real case) or 2 (complex case).
  Eigen::MatrixXd eigen_plane;
  Eigen::Matrix2d complex_structure;  // J on L(g) coords, C1Proximal only
  double spectral_gap = 1.0;          // |second| / |largest| over Ad_g - Id
  bool degenerate = false;            // dominance gap below tolerance
  bool in_pi = false;                 // |s| < 1 (membership in Pi / Pi_{C,1})
};

ProximalData classify_proximal(const GroupElement& g);

}  // namespace lieforge
