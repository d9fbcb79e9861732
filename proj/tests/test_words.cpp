#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lieforge/word.hpp"

using namespace lieforge;

namespace {

Tuple random_pair(const std::string& id, std::uint64_t seed) {
  const GroupSpec& g = GroupSpec::by_id(id);
  Rng rng = make_rng(seed);
  return make_tuple(
      {random_element(g, rng, 0.8), random_element(g, rng, 0.8)});
}

}  // namespace

TEST_CASE("free reduction") {
  CHECK(reduce({1, -1}).empty());
  CHECK(reduce({1, 2, -2, -1, 1}).letters == std::vector<int>{1});
  CHECK(reduce({1, 2, -2, 2}).letters == std::vector<int>{1, 2});
  CHECK(reduce({}).empty());
  CHECK_THROWS_AS(reduce({3}, 2), Error);
}

TEST_CASE("invert and concat reduce freely") {
  Word w = reduce({1, 2, -1});
  Word wi = invert(w);
  CHECK(wi.letters == std::vector<int>{1, -2, -1});
  CHECK(concat(w, wi).empty());
  CHECK(concat(reduce({1, 2}), reduce({-2, 1})).letters ==
        std::vector<int>{1, 1});
}

TEST_CASE("shortlex order: length first, then 1 < -1 < 2 < -2") {
  CHECK(shortlex_less(reduce({1}), reduce({1, 2})));
  CHECK(shortlex_less(reduce({1}), reduce({-1})));
  CHECK(shortlex_less(reduce({-1}), reduce({2})));
  CHECK(shortlex_less(reduce({2}), reduce({-2})));
  CHECK(!shortlex_less(reduce({1}), reduce({1})));
}

TEST_CASE("string round trip") {
  Word w = reduce({1, 2, -1, -2});
  CHECK(word_to_string(w) == "a b A B");
  CHECK(word_from_string("a b A B") == w);
  CHECK(word_from_string("").empty());
}

TEST_CASE("evaluation agrees with explicit products") {
  Tuple t = random_pair("sl2r", 5);
  Word w = reduce({1, 2, -1});
  GroupElement expect =
      mul(mul(t.elements[0], t.elements[1]), inv(t.elements[0]));
  CHECK((evaluate(w, t).m - expect.m).norm() < 1e-12);
  CHECK((evaluate(Word{{}, 2}, t).m -
         Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("word derivative matches central finite differences") {
  for (const auto& id : {"su2", "so3", "sl2r", "sl3r"}) {
    Tuple t = random_pair(id, 17);
    const GroupSpec& g = t.group();
    Rng rng = make_rng(99);
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<int> raw;
      int len = 1 + static_cast<int>(uniform(rng, 0, 7));
      for (int i = 0; i < len; ++i)
        raw.push_back((uniform(rng) < 0.5 ? 1 : -1) *
                      (uniform(rng) < 0.5 ? 1 : 2));
      Word w = reduce(raw);
      if (w.empty()) continue;
      std::vector<AlgebraElement> dir{random_algebra(g, rng, 1.0),
                                      random_algebra(g, rng, 1.0)};
      AlgebraElement an = word_derivative(w, t, dir);
      const double h = 1e-6;
      auto moved = [&](double s) {
        Tuple tt = t;
        for (int c = 0; c < 2; ++c) {
          AlgebraElement d = dir[c];
          d.coords *= s;
          tt.elements[c] = mul(tt.elements[c], exp_elem(d));
        }
        return evaluate(w, tt);
      };
      GroupElement w0 = evaluate(w, t);
      Eigen::VectorXd fd =
          (log_elem(mul(inv(w0), moved(h))).coords -
           log_elem(mul(inv(w0), moved(-h))).coords) /
          (2 * h);
      CHECK((an.coords - fd).norm() <=
            1e-5 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("iterated commutator words match numeric iteration") {
  Word g = reduce({1});
  Word h = reduce({2});
  CHECK(iterated_commutator(g, h, 1) == commutator_word(g, h));
  Tuple t = random_pair("su2", 23);
  GroupElement num = t.elements[1];
  for (int k = 0; k < 3; ++k) num = comm(t.elements[0], num);
  Word wk = iterated_commutator(g, h, 3);
  CHECK((evaluate(wk, t).m - num.m).norm() < 1e-12);
  CHECK_THROWS_AS(iterated_commutator(g, h, 40), Error);
}

TEST_CASE("power word") {
  Word w = reduce({1, 2});
  CHECK(power_word(w, 3).letters == std::vector<int>{1, 2, 1, 2, 1, 2});
  CHECK(power_word(w, 0).empty());
  CHECK(power_word(w, -2) == invert(power_word(w, 2)));
}

TEST_CASE("nested product commutator") {
  std::vector<Word> ws{reduce({1}), reduce({2}), reduce({1, 2})};
  Word n = nested_product_commutator(ws);
  CHECK(!n.empty());
  CHECK_THROWS_AS(nested_product_commutator({reduce({1})}), Error);
}
