#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lieforge/sk.hpp"

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

SKLevelState small_engine(SKMode mode, int max_len, double target_delta) {
  const GroupSpec& so3 = GroupSpec::by_id("so3");
  Tuple t = make_tuple({rot(so3, 0, 1.0), rot(so3, 2, 1.1)});
  WordNet base =
      build_base_net(t, max_len, {identity(so3), 1.0}, target_delta, 2024);
  CalibrationRecord cal = calibrate(so3, 5, 400);
  return init_levels(base, mode, cal, 12);
}

}  // namespace

TEST_CASE("theory exponents") {
  RateReport weak = fit_rate({}, SKMode::Weak);
  RateReport strong = fit_rate({}, SKMode::Strong);
  CHECK(weak.kappa_theory == doctest::Approx(0.184530).epsilon(1e-4));
  CHECK(strong.kappa_theory == doctest::Approx(0.251930).epsilon(1e-4));
  CHECK(weak.kappa_theory == doctest::Approx(std::log(1.5) / std::log(9.0)));
  CHECK(strong.kappa_theory == doctest::Approx(std::log(1.5) / std::log(5.0)));
}

TEST_CASE("fit_rate recovers kappa and c from synthetic data") {
  // err_m = exp(-(c l_m)^kappa) with l_m = 10 * 9^(m-1).
  const double kappa = std::log(1.5) / std::log(9.0);
  const double c = 0.1;
  std::vector<RateLevel> levels;
  long long l = 10;
  for (int m = 1; m <= 5; ++m, l *= 9) {
    RateLevel lv;
    lv.m = m;
    lv.l_m = l;
    lv.max_err = std::exp(-std::pow(c * static_cast<double>(l), kappa));
    lv.median_err = lv.max_err / 2;
    levels.push_back(lv);
  }
  RateReport rep = fit_rate(levels, SKMode::Weak);
  CHECK(rep.kappa_hat == doctest::Approx(kappa).epsilon(1e-3));
  CHECK(rep.kappa_stderr < 1e-6);
  CHECK(rep.c_hat == doctest::Approx(c).epsilon(1e-6));
  CHECK(rep.pass);
}

TEST_CASE("fit_rate rejects curves above the claimed envelope") {
  std::vector<RateLevel> levels;
  levels.push_back({1, 10, 0.5, 0.3});
  levels.push_back({2, 90, 0.49, 0.3});  // barely improves: c_hat collapses
  RateReport rep = fit_rate(levels, SKMode::Weak);
  // The envelope at the fitted c must still bound every level.
  for (const auto& lv : levels)
    CHECK(lv.max_err <=
          std::exp(-std::pow(rep.c_hat * static_cast<double>(lv.l_m),
                             rep.kappa_theory)) *
              (1.0 + 1e-9));
}

TEST_CASE("init_levels records delta_1, l_1, and near-identity entries") {
  SKLevelState st = small_engine(SKMode::Weak, 8, 0.3);
  CHECK(st.levels() == 1);
  CHECK(st.delta[0] == st.base.claimed_radius);
  long long l1 = 0;
  for (const auto& e : st.base.entries)
    l1 = std::max<long long>(l1, e.word.length());
  CHECK(st.length_cap[0] == l1);
  CHECK(!st.omega_tilde1.empty());
  double ball = 2.0 * st.c_prime * std::sqrt(st.delta[0]);
  for (int idx : st.omega_tilde1)
    CHECK(distance_to_identity(st.base.entries[idx].value) <= ball);
  CHECK(st.rd.has_splitting);
}

TEST_CASE("one refinement contracts the error and obeys the length law") {
  SKLevelState st = small_engine(SKMode::Weak, 8, 0.3);
  double d1 = st.delta[0];
  long long l1 = st.length_cap[0];
  refine_level(st, 60, 3);
  REQUIRE(st.levels() == 2);
  CHECK(st.delta[1] < d1);
  CHECK(st.length_cap[1] == 9 * l1);

  // Depth-2 descent beats (or ties) the base net on fresh targets, and a
  // base-net point itself is reproduced almost exactly.
  Rng rng = make_rng(77);
  const GroupSpec& g = st.pair.group();
  for (int i = 0; i < 10; ++i) {
    GroupElement target = random_element(g, rng, 0.9);
    ApproxResult a1 = approximate(st, target, 1);
    ApproxResult a2 = approximate(st, target, 2);
    CHECK(a2.achieved_dist <= a1.achieved_dist + 1e-12);
    CHECK(a2.word.length() <= st.length_cap[1]);
    CHECK((evaluate(a2.word, st.pair).m.norm() > 0));
  }
  GroupElement known = st.base.entries[st.base.entries.size() / 2].value;
  CHECK(approximate(st, known, 2).achieved_dist < 1e-10);
}

TEST_CASE("strong mode uses branch factor 5") {
  SKLevelState st = small_engine(SKMode::Strong, 8, 0.3);
  long long l1 = st.length_cap[0];
  refine_level(st, 40, 9);
  CHECK(st.length_cap[1] == 5 * l1);
  CHECK(st.delta[1] < st.delta[0]);
}

TEST_CASE("approximate rejects out-of-range depths") {
  SKLevelState st = small_engine(SKMode::Weak, 8, 0.3);
  GroupElement t = identity(st.pair.group());
  CHECK_THROWS_AS(approximate(st, t, 0), Error);
  CHECK_THROWS_AS(approximate(st, t, st.levels() + 1), Error);
  CHECK(approximate(st, t, 1).achieved_dist < 1e-12);
}

TEST_CASE("rate_report needs two levels and then fits the curve") {
  SKLevelState st = small_engine(SKMode::Weak, 8, 0.3);
  CHECK_THROWS_AS(rate_report(st, 10, 1), Error);
  refine_level(st, 60, 3);
  RateReport rep = rate_report(st, 40, 123);
  REQUIRE(rep.levels.size() == 2);
  CHECK(rep.levels[0].l_m == st.length_cap[0]);
  CHECK(rep.levels[1].l_m == st.length_cap[1]);
  CHECK(rep.levels[1].max_err < rep.levels[0].max_err);
  CHECK(rep.levels[1].median_err <= rep.levels[1].max_err);
  CHECK(rep.samples == 40);
  CHECK(rep.c_hat > 0.0);
  // Deterministic for a fixed seed.
  RateReport again = rate_report(st, 40, 123);
  CHECK(again.levels[1].max_err == rep.levels[1].max_err);
}

TEST_CASE("degenerate base nets refine trivially") {
  const GroupSpec& so3 = GroupSpec::by_id("so3");
  Tuple t = make_tuple({identity(so3), identity(so3)});
  WordNet base = build_base_net(t, 4, {identity(so3), 0.5}, 0.1, 1);
  CalibrationRecord cal = calibrate(so3, 5, 200);
  SKLevelState st = init_levels(base, SKMode::Weak, cal, 3);
  CHECK(st.degenerate);
  refine_level(st, 10, 1);
  CHECK(st.delta[1] == st.delta[0]);
  CHECK(st.length_cap[1] == st.length_cap[0]);
  GroupElement target = exp_elem(algebra_from_coords(
      so3, 0.3 * Eigen::Vector3d::UnitX()));
  ApproxResult res = approximate(st, target, 2);
  CHECK(res.word.empty());
}
