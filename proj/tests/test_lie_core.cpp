#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "lieforge/group.hpp"
#include "lieforge/proximal.hpp"

using namespace lieforge;

TEST_CASE("registry exposes the five groups with the right dimensions") {
  struct Row {
    const char* id;
    int md, ad;
    bool ss;
  };
  const Row rows[] = {{"su2", 2, 3, true},
                      {"so3", 3, 3, true},
                      {"sl2r", 2, 3, true},
                      {"sl3r", 3, 8, true},
                      {"aff1", 2, 2, false}};
  for (const auto& r : rows) {
    const GroupSpec& g = GroupSpec::by_id(r.id);
    CHECK(g.matrix_dim == r.md);
    CHECK(g.algebra_dim == r.ad);
    CHECK(g.semisimple == r.ss);
    CHECK(static_cast<int>(g.basis.size()) == r.ad);
  }
  CHECK_THROWS_AS(GroupSpec::by_id("su3"), Error);
}

TEST_CASE("algebra basis is orthonormal for the Frobenius pairing") {
  for (const auto& id : GroupSpec::registry_ids()) {
    const GroupSpec& g = GroupSpec::by_id(id);
    for (int i = 0; i < g.algebra_dim; ++i)
      for (int j = 0; j < g.algebra_dim; ++j) {
        double ip = (g.basis[i].adjoint() * g.basis[j]).trace().real();
        CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("exp/log round trip in the principal chart") {
  for (const auto& id : GroupSpec::registry_ids()) {
    const GroupSpec& g = GroupSpec::by_id(id);
    Rng rng = make_rng(42);
    for (int i = 0; i < 20; ++i) {
      AlgebraElement x = random_algebra(g, rng, 0.8);
      GroupElement ge = exp_elem(x);
      require_member(ge);
      AlgebraElement back = log_elem(ge);
      CHECK((back.coords - x.coords).norm() < 1e-10);
    }
  }
}

TEST_CASE("log outside the principal chart raises a chart error") {
  const GroupSpec& su2 = GroupSpec::by_id("su2");
  GroupElement minus_id{&su2, -Eigen::MatrixXcd::Identity(2, 2)};
  require_member(minus_id);
  CHECK_THROWS_AS(log_elem(minus_id), Error);
  try {
    log_elem(minus_id);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::Chart);
  }
}

TEST_CASE("group operations against 2x2 integer oracles") {
  const GroupSpec& sl2 = GroupSpec::by_id("sl2r");
  Eigen::MatrixXcd am(2, 2), bm(2, 2);
  am << 2, 0, 0, 0.5;
  bm << 1, 1, 0, 1;
  GroupElement a{&sl2, am}, b{&sl2, bm};
  // a b a^-1 b^-1 = [[1, 3], [0, 1]] by direct arithmetic.
  GroupElement c = comm(a, b);
  CHECK(std::abs(c.m(0, 0).real() - 1.0) < 1e-14);
  CHECK(std::abs(c.m(0, 1).real() - 3.0) < 1e-14);
  CHECK(std::abs(c.m(1, 0)) < 1e-14);
  CHECK(group_op(a, b, GroupOp::Comm).m.isApprox(c.m));
  CHECK(mul(a, inv(a)).m.isApprox(Eigen::MatrixXcd::Identity(2, 2)));
  CHECK(conjugate(a, b).m.isApprox(am * bm * am.inverse()));
}

TEST_CASE("membership residual rejects off-manifold matrices") {
  const GroupSpec& su2 = GroupSpec::by_id("su2");
  GroupElement g = identity(su2);
  CHECK(membership_residual(g) < 1e-14);
  g.m(0, 0) += 0.1;
  CHECK(membership_residual(g) > 1e-3);
  CHECK_THROWS_AS(require_member(g), Error);
}

TEST_CASE("adjoint representation is a homomorphism matching exp(ad)") {
  for (const auto& id : GroupSpec::registry_ids()) {
    const GroupSpec& g = GroupSpec::by_id(id);
    Rng rng = make_rng(7);
    GroupElement a = random_element(g, rng, 0.7);
    GroupElement b = random_element(g, rng, 0.7);
    CHECK((adjoint(mul(a, b)) - adjoint(a) * adjoint(b)).norm() < 1e-10);
    AlgebraElement x = random_algebra(g, rng, 0.5);
    Eigen::MatrixXd lhs = adjoint(exp_elem(x));
    Eigen::MatrixXd rhs = ad(x).exp();
    CHECK((lhs - rhs).norm() < 1e-10);
  }
}

TEST_CASE("ad matches the matrix bracket in coordinates") {
  for (const auto& id : GroupSpec::registry_ids()) {
    const GroupSpec& g = GroupSpec::by_id(id);
    Rng rng = make_rng(3);
    AlgebraElement x = random_algebra(g, rng, 1.0);
    AlgebraElement y = random_algebra(g, rng, 1.0);
    Eigen::MatrixXcd br = algebra_matrix(x) * algebra_matrix(y) -
                          algebra_matrix(y) * algebra_matrix(x);
    double res = 0;
    AlgebraElement want = to_algebra(g, br, &res);
    CHECK(res < 1e-10);
    CHECK((ad(x) * y.coords - want.coords).norm() < 1e-10);
  }
}

TEST_CASE("distance is left-invariant and symmetric") {
  for (const auto& id : GroupSpec::registry_ids()) {
    const GroupSpec& g = GroupSpec::by_id(id);
    Rng rng = make_rng(11);
    GroupElement a = random_element(g, rng, 0.4);
    GroupElement b = random_element(g, rng, 0.4);
    GroupElement h = random_element(g, rng, 0.8);
    double d = distance(a, b);
    CHECK(distance(mul(h, a), mul(h, b)) == doctest::Approx(d).epsilon(1e-9));
    CHECK(distance(b, a) == doctest::Approx(d).epsilon(1e-9));
    CHECK(distance(a, a) < 1e-12);
    CHECK(distance_to_identity(a) ==
          doctest::Approx(log_elem(a).norm()).epsilon(1e-9));
  }
}

TEST_CASE("classify_proximal: hyperbolic sl2r element is 1-proximal") {
  const GroupSpec& sl2 = GroupSpec::by_id("sl2r");
  Eigen::MatrixXcd m(2, 2);
  m << 1.2, 0, 0, 1.0 / 1.2;
  GroupElement g{&sl2, m};
  ProximalData p = classify_proximal(g);
  CHECK(p.kind == ProximalKind::OneProximal);
  // Ad_g spectrum is {t^2, 1, t^-2}; dominant of Ad - Id is t^2 - 1 = 0.44.
  CHECK(p.s.real() == doctest::Approx(0.44).epsilon(1e-12));
  CHECK(std::abs(p.s.imag()) < 1e-12);
  CHECK(p.in_pi);
  CHECK(p.eigen_plane.cols() == 1);
}

TEST_CASE("classify_proximal: so3 rotation is C-1-proximal with J^2 = -I") {
  const GroupSpec& so3 = GroupSpec::by_id("so3");
  double th = M_PI / 6;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3);
  m(0, 0) = std::cos(th);
  m(0, 1) = -std::sin(th);
  m(1, 0) = std::sin(th);
  m(1, 1) = std::cos(th);
  GroupElement g{&so3, m};
  ProximalData p = classify_proximal(g);
  CHECK(p.kind == ProximalKind::C1Proximal);
  std::complex<double> expect = std::polar(1.0, th) - 1.0;
  CHECK(std::abs(std::abs(p.s) - std::abs(expect)) < 1e-12);
  CHECK(p.s.imag() > 0);
  CHECK(p.in_pi);
  CHECK(p.eigen_plane.cols() == 2);
  Eigen::Matrix2d j2 = p.complex_structure * p.complex_structure;
  CHECK((j2 + Eigen::Matrix2d::Identity()).norm() < 1e-9);
}

TEST_CASE("classify_proximal: identity is neither") {
  const GroupSpec& su2 = GroupSpec::by_id("su2");
  CHECK(classify_proximal(identity(su2)).kind == ProximalKind::Neither);
}
