#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lieforge/relation.hpp"

using namespace lieforge;

namespace {

GroupElement rot(const GroupSpec& so3, int axis, double th) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  int i = (axis + 1) % 3, j = (axis + 2) % 3;
  m(i, i) = std::cos(th);
  m(i, j) = -std::sin(th);
  m(j, i) = std::sin(th);
  m(j, j) = std::cos(th);
  return {&so3, m.cast<std::complex<double>>()};
}

SKLevelState so3_engine(int refinements) {
  const GroupSpec& so3 = GroupSpec::by_id("so3");
  Tuple t = make_tuple({rot(so3, 0, 1.0), rot(so3, 2, 1.1)});
  // Region covers all of SO3 so every seed relation word is reachable.
  WordNet base = build_base_net(t, 8, {identity(so3), 4.5}, 0.35, 2024);
  CalibrationRecord cal = calibrate(so3, 5, 400);
  SKLevelState st = init_levels(base, SKMode::Weak, cal, 12);
  for (int m = 0; m < refinements; ++m) refine_level(st, 50, 3 + m);
  return st;
}

}  // namespace

TEST_CASE("pair_distance sums component metrics") {
  const GroupSpec& g = GroupSpec::by_id("so3");
  Tuple a = make_tuple({rot(g, 0, 0.5), rot(g, 1, 0.7)});
  CHECK(pair_distance(a, a) == 0.0);
  Tuple b = make_tuple({rot(g, 0, 0.6), rot(g, 1, 0.7)});
  CHECK(pair_distance(a, b) ==
        doctest::Approx(distance(a.elements[0], b.elements[0])));
  CHECK(pair_distance(a, b) == doctest::Approx(pair_distance(b, a)));
}

TEST_CASE("solvable lift: recursion base, growth bound, identity on aff1") {
  Word a{{1}, 2}, b{{2}, 2};
  Word w = commutator_word(a, b);

  // Base case s = 0: the lift is sigma_{0,1} = [a, w].
  Word lift0 = solvable_lift(w, 0);
  CHECK(lift0 == commutator_word(a, w));

  for (int s = 0; s <= 3; ++s) {
    Word lift = solvable_lift(w, s);
    CHECK(!lift.empty());
    CHECK(lift.length() <= std::pow(4.0, s + 1) * w.length());
  }

  // aff1 is metabelian: any commutator is a translation and translations
  // commute, so every lift with s >= 1 evaluates to the identity there.
  const GroupSpec& aff = GroupSpec::by_id("aff1");
  Rng rng = make_rng(314);
  Tuple pair = make_tuple(
      {random_element(aff, rng, 0.8), random_element(aff, rng, 0.8)});
  CHECK(distance_to_identity(evaluate(w, pair)) > 1e-3);  // w itself nontrivial
  for (int s : {1, 2}) {
    Word lift = solvable_lift(w, s);
    CHECK(!lift.empty());
    CHECK(distance_to_identity(evaluate(lift, pair)) < 1e-10);
  }

  CHECK_THROWS_AS(solvable_lift(Word{{}, 2}, 1), Error);

  // A word in the first generator alone must be conjugated by the other.
  Word lift_a = solvable_lift(concat(a, a), 0);
  CHECK(lift_a == commutator_word(b, concat(a, a)));
}

TEST_CASE("affine relation sequence matches the closed-form table") {
  std::vector<AffineStep> steps = affine_relation_sequence(0.3, 40);
  REQUIRE(steps.size() == 40);
  CHECK(steps[0].m_k == 3);
  CHECK(steps[0].s_k == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(steps[1].m_k == 11);
  CHECK(steps[1].s_k == doctest::Approx(std::pow(11.0, -0.5)).epsilon(1e-9));
  CHECK(steps[1].s_k == doctest::Approx(0.301511).epsilon(1e-5));
  CHECK(steps[2].m_k == 37);
  CHECK(steps[2].s_k == doctest::Approx(std::pow(37.0, -1.0 / 3.0)).epsilon(1e-9));
  CHECK(steps[2].s_k == doctest::Approx(0.3001).epsilon(1e-3));
  for (const auto& st : steps) {
    CHECK(st.relation_residual <= 1e-10);
    CHECK(st.gap < 0.04);
  }
  // The gap decays like O(1/k) overall.
  CHECK(steps[39].gap < steps[0].gap / 10.0);

  CHECK_THROWS_AS(affine_relation_sequence(1.2, 5), Error);
  CHECK_THROWS_AS(affine_relation_sequence(0.0, 5), Error);
  // s0 = 0.5 makes s0^{-k} integral, so the floor is ill-defined.
  CHECK_THROWS_AS(affine_relation_sequence(0.5, 5), Error);
}

TEST_CASE("affine limit profile converges to exp(u / s0)") {
  double e10 = affine_limit_error(0.3, 10);
  double e20 = affine_limit_error(0.3, 20);
  double e40 = affine_limit_error(0.3, 40);
  CHECK(e20 < e10);
  CHECK(e40 < e20);
  // The profile converges at rate O(1/k): doubling k about halves the error.
  CHECK(e20 / e40 == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("net-plus-Newton relation certificates hold their invariants") {
  SKLevelState sk = so3_engine(1);
  const Tuple& pair = sk.pair;
  for (int level : {1, 2}) {
    RelationCertificate cert = find_relation_net_newton(pair, sk, level);
    CHECK(!cert.word.empty());
    CHECK(cert.level == level);
    CHECK(cert.method == RelationMethod::NetNewton);
    CHECK(cert.l_k == static_cast<long long>(cert.word.length()));
    // Oracle: independently re-evaluate the word on the perturbed pair.
    CHECK(distance_to_identity(evaluate(cert.word, cert.perturbed_pair)) <=
          1e-10);
    CHECK(cert.residual <= 1e-10);
    CHECK(cert.non_identical);
    CHECK(cert.pair_dist > 0.0);
    CHECK(cert.jacobian_sv > 0.0);
    // The Newton move is commensurate with the initial defect.
    CHECK(cert.pair_dist <=
          50.0 * cert.initial_residual / std::max(cert.jacobian_sv, 1e-8));
  }
}

TEST_CASE("deeper levels shrink the pair perturbation") {
  SKLevelState sk = so3_engine(1);
  RelationCertificate c1 = find_relation_net_newton(sk.pair, sk, 1);
  RelationCertificate c2 = find_relation_net_newton(sk.pair, sk, 2);
  CHECK(c2.initial_residual <= c1.initial_residual);
  CHECK(c2.pair_dist < c1.pair_dist);
}

TEST_CASE("relation rate curve aggregates certificates") {
  SKLevelState sk = so3_engine(1);
  RelationCurve curve = relation_rate_curve(sk.pair, sk, 2);
  CHECK(curve.failures.empty());
  REQUIRE(curve.certs.size() == 2);
  CHECK(curve.certs[0].level == 1);
  CHECK(curve.certs[1].level == 2);
  CHECK(curve.pass == (curve.c_hat > 0.0));
  CHECK_THROWS_AS(relation_rate_curve(sk.pair, sk, 1), Error);
}

TEST_CASE("torsion pairs are rejected before any search") {
  const GroupSpec& so3 = GroupSpec::by_id("so3");
  Tuple torsion =
      make_tuple({rot(so3, 0, M_PI / 2), rot(so3, 2, M_PI / 2)});
  SKLevelState sk = so3_engine(0);
  try {
    find_relation_net_newton(torsion, sk, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.error_class() == ErrorClass::Search);
  }
}
