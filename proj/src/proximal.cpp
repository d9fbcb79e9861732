#include "lieforge/proximal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lieforge {

namespace {
constexpr double kGapTol = 1e-8;
}

ProximalData classify_proximal(const GroupElement& g) {
  require_member(g);
  const int n = g.group->algebra_dim;
  Eigen::MatrixXd M = adjoint(g) - Eigen::MatrixXd::Identity(n, n);

  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  Eigen::VectorXcd lams = es.eigenvalues();

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(lams(a)) > std::abs(lams(b));
  });

  ProximalData out;
  double top = std::abs(lams(order[0]));
  if (top < 1e-12) return out;  // Ad_g = Id

  // Count eigenvalues whose modulus is not separated from the top.
  int dominant_count = 0;
  double second = 0.0;
  for (int i = 0; i < n; ++i) {
    double m = std::abs(lams(order[i]));
    if (m / top > 1.0 - kGapTol)
      ++dominant_count;
    else {
      second = m;
      break;
    }
  }
  out.spectral_gap = second / top;

  std::complex<double> lead = lams(order[0]);
  bool lead_real = std::abs(lead.imag()) <= kGapTol * top;

  if (dominant_count == 1 && lead_real) {
    out.kind = ProximalKind::OneProximal;
    out.s = lead.real();
    Eigen::VectorXcd w = es.eigenvectors().col(order[0]);
    Eigen::VectorXd u = w.real();
    if (u.norm() < 1e-8) u = w.imag();
    out.eigen_plane = u / u.norm();
    out.in_pi = std::abs(out.s) < 1.0;
    return out;
  }

  if (dominant_count == 2 && !lead_real) {
    // Verify the two dominant ones form a conjugate pair.
    std::complex<double> other = lams(order[1]);
    if (std::abs(other - std::conj(lead)) > 1e-6 * top) {
      out.degenerate = true;
      return out;
    }
    std::complex<double> s = lead;
    Eigen::VectorXcd w = es.eigenvectors().col(order[0]);
    if (s.imag() < 0) {  // fix the branch: positive imaginary part
      s = std::conj(s);
      w = w.conjugate();
    }
    Eigen::VectorXd u = w.real(), v = w.imag();
    // Orthonormalize the plane basis; track the change of coordinates.
    Eigen::MatrixXd UV(n, 2);
    UV.col(0) = u;
    UV.col(1) = v;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(UV);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, 2);
    Eigen::Matrix2d R =
        qr.matrixQR().topLeftCorner(2, 2).triangularView<Eigen::Upper>();
    // In the (u, v) basis, M acts as [[a, b], [-b, a]] and multiplication
    // by i acts as [[0, -1], [1, 0]] on complex coordinates t with
    // x(t) = 2 Re(t w); transported to the orthonormal basis by R.
    Eigen::Matrix2d Jt;
    Jt << 0, 1, -1, 0;
    out.kind = ProximalKind::C1Proximal;
    out.s = s;
    out.eigen_plane = Q;
    out.complex_structure = R * Jt * R.inverse();
    out.in_pi = std::abs(s) < 1.0;
    return out;
  }

  out.degenerate = dominant_count > 1;
  return out;
}

}  // namespace lieforge
