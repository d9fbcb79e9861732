#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lieforge/dynamics.hpp"

using namespace lieforge;

namespace {

GroupElement sl2_diag(double t) {
  const GroupSpec& g = GroupSpec::by_id("sl2r");
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = t;
  m(1, 1) = 1.0 / t;
  return {&g, m};
}

GroupElement so3_rot_z(double th) {
  const GroupSpec& g = GroupSpec::by_id("so3");
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 0) = std::cos(th);
  m(0, 1) = -std::sin(th);
  m(1, 0) = std::sin(th);
  m(1, 1) = std::cos(th);
  return {&g, m.cast<std::complex<double>>()};
}

GroupElement small_h(const GroupSpec& g, std::uint64_t seed, double r) {
  Rng rng = make_rng(seed);
  return exp_elem(algebra_from_coords(g, random_ball_vector(rng, g.algebra_dim, r)));
}

}  // namespace

TEST_CASE("identity input has zero limit direction") {
  GroupElement g = sl2_diag(1.2);
  DynamicsReport rep = run_dynamics(g, identity(*g.group), 50);
  CHECK(rep.iterates.empty());
  CHECK(rep.v_estimate.norm() == 0.0);
}

TEST_CASE("orbit of diag(1.2) contracts at exactly s = 0.44") {
  GroupElement g = sl2_diag(1.2);
  ProximalData p = classify_proximal(g);
  REQUIRE(p.kind == ProximalKind::OneProximal);
  CHECK(p.s.real() == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(p.in_pi);

  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    GroupElement h = small_h(*g.group, seed, 0.05);
    DynamicsReport rep = run_dynamics(g, h, 60);
    REQUIRE(rep.iterates.size() >= 31);
    // Norm ratio approaches |s| = 0.44.
    for (int k = 30; k < 35 && k + 1 < static_cast<int>(rep.iterates.size());
         ++k) {
      double ratio = rep.iterates[k].log_norm / rep.iterates[k - 1].log_norm;
      CHECK(std::abs(ratio - 0.44) < 1e-3);
    }
    // Direction aligns with the expansion line L(g); the off-line part
    // decays like (0.3056/0.44)^k, so by k = 30 it is below 1e-4 for any h.
    const Eigen::MatrixXd& P = p.eigen_plane;
    const auto& it25 = rep.iterates[24];
    double off25 =
        (it25.direction - P * (P.transpose() * it25.direction)).norm();
    CHECK(off25 <= 5e-4);
    const auto& it = rep.iterates[29];
    double off = (it.direction - P * (P.transpose() * it.direction)).norm();
    CHECK(off <= 1e-4);
    CHECK(rep.v_plane_residual < 1e-6);
    // Errors shrink past the reported onset.
    REQUIRE(rep.k0 < static_cast<int>(rep.convergence_errors.size()));
  }
}

TEST_CASE("v satisfies the functional equation v(phi_g(h)) = s v(h)") {
  GroupElement g = sl2_diag(1.2);
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    GroupElement h = small_h(*g.group, seed, 0.03);
    AlgebraElement vh = run_dynamics(g, h, 80).v_estimate;
    AlgebraElement vph = run_dynamics(g, comm(g, h), 80).v_estimate;
    CHECK((vph.coords - 0.44 * vh.coords).norm() <=
          1e-6 * std::max(vh.norm(), 1e-12));
  }
}

TEST_CASE("dv at the identity is the identity on L(g)") {
  CHECK(estimate_dv_identity(sl2_diag(1.2), 8, 3) <= 1e-2);
}

TEST_CASE("basin and regime guards") {
  GroupElement g = sl2_diag(1.2);
  Rng rng = make_rng(99);
  GroupElement far = exp_elem(
      algebra_from_coords(*g.group, 0.5 * random_unit_vector(rng, 3)));
  try {
    run_dynamics(g, far, 50);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::Basin);
  }
  try {
    run_dynamics(identity(*g.group), small_h(*g.group, 1, 0.01), 50);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::Regime);
  }
  // |s| >= 1 lies outside Pi.
  GroupElement wide = sl2_diag(2.5);  // s = 2.5^2 - 1 = 5.25
  try {
    run_dynamics(wide, small_h(*wide.group, 1, 0.01), 50);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::Regime);
  }
}

TEST_CASE("complex contraction on an so3 rotation") {
  GroupElement g = so3_rot_z(M_PI / 6);
  ProximalData p = classify_proximal(g);
  REQUIRE(p.kind == ProximalKind::C1Proximal);
  double expect = std::abs(std::polar(1.0, M_PI / 6) - 1.0);
  CHECK(std::abs(p.s) == doctest::Approx(expect).epsilon(1e-10));
  CHECK(p.s.imag() > 0.0);
  CHECK((p.complex_structure * p.complex_structure +
         Eigen::Matrix2d::Identity())
            .norm() < 1e-8);

  GroupElement h = small_h(*g.group, 21, 0.03);
  DynamicsReport rep = run_dynamics(g, h, 60);
  CHECK(rep.v_estimate.norm() > 0.0);
  CHECK(rep.v_plane_residual < 1e-3);
  // Modulus contraction at |s| per step once converged.
  for (int k = 30; k < 34 && k + 1 < static_cast<int>(rep.iterates.size());
       ++k) {
    double ratio = rep.iterates[k].log_norm / rep.iterates[k - 1].log_norm;
    CHECK(std::abs(ratio - std::abs(p.s)) < 1e-3);
  }
}

namespace {

PsiSpec stub_spec() {
  const GroupSpec& g = GroupSpec::by_id("sl2r");
  PsiSpec spec;
  spec.base_pair = make_tuple({sl2_diag(1.2), sl2_diag(1.1)});
  spec.epsilon = 0.05;
  spec.s0 = {std::complex<double>(0.44, 0.0)};
  return spec;
}

}  // namespace

TEST_CASE("m_jk matches the floor law and guards overflow") {
  PsiSpec spec = stub_spec();
  CHECK(m_jk(spec, 0, 10) == 183);  // floor(0.05 * 0.44^-10)
  CHECK(m_jk(spec, 0, 1) == 0);     // floor(0.05 / 0.44) = 0
  spec.s0[0] = std::complex<double>(0.1, 0.0);
  CHECK_THROWS_AS(m_jk(spec, 0, 25), Error);
}

TEST_CASE("k-subsequence drives the phases toward 2 pi Z") {
  PsiSpec spec = stub_spec();
  spec.s0 = {std::polar(0.5, 1.0)};  // irrational angle
  std::vector<int> ks = select_k_subsequence(spec, 5, 2000);
  REQUIRE(ks.size() >= 3);
  double prev = 1e300;
  for (int k : ks) {
    double phase = std::fmod(k * 1.0, 2 * M_PI);
    if (phase < 0) phase += 2 * M_PI;
    double score = std::min(phase, 2 * M_PI - phase);
    CHECK(score < prev);
    prev = score;
  }
}

TEST_CASE("assembled Psi is tangent to eps Omega and realized by omega_k") {
  const GroupSpec& g = GroupSpec::by_id("sl2r");
  Rng rng = make_rng(6021);
  Tuple pair =
      make_tuple({random_element(g, rng, 1.0), random_element(g, rng, 1.0)});
  PsiSpec spec;
  try {
    spec = assemble_psi(pair, 40, false);
  } catch (const Error& e) {
    MESSAGE("assemble_psi declined this pair (acceptable): " << e.what());
    return;
  }
  REQUIRE(spec.accepted);
  CHECK(spec.omega_sv >= 1e-4);
  CHECK(spec.g_words.size() == static_cast<std::size_t>(g.algebra_dim));

  // First-order agreement: |Psi'(0) - Omega| = O(eps^2), so halving eps
  // shrinks the defect by about 4.
  double prev_err = -1.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    PsiSpec se = with_epsilon(spec, eps);
    double err = (psi_jacobian_at_zero(se) - se.omega).norm();
    if (prev_err > 0.0) CHECK(err < prev_err / 2.5);
    prev_err = err;
  }

  // Numeric omega_k realization converges to Psi on a small grid.
  std::vector<PsiConvergence> conv = verify_psi_limit(spec, {8, 16}, 3, 0.2);
  REQUIRE(conv.size() == 2);
  CHECK(conv[1].sup_error < conv[0].sup_error);
  CHECK(conv[0].numeric_realization);
}
