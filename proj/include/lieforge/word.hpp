#pragma once

#include <string>
#include <vector>

#include "lieforge/group.hpp"

namespace lieforge {

// Reduced word over symbols {1..M}; negative letters are inverses.
struct Word {
  std::vector<int> letters;
  int alphabet = 2;

  int length() const { return static_cast<int>(letters.size()); }
  bool empty() const { return letters.empty(); }
  bool operator==(const Word& o) const {
    return alphabet == o.alphabet && letters == o.letters;
  }
};

// M-tuple of elements of one group; words evaluate against tuples.
struct Tuple {
  std::vector<GroupElement> elements;
  int size() const { return static_cast<int>(elements.size()); }
  const GroupSpec& group() const { return *elements.at(0).group; }
};

Tuple make_tuple(std::vector<GroupElement> elems);

Word reduce(std::vector<int> raw, int alphabet = 2);
Word invert(const Word& w);
Word concat(const Word& a, const Word& b);  // freely reduced

// Shortlex with 1 < -1 < 2 < -2 < ...; ties in nets break on this order.
bool shortlex_less(const Word& a, const Word& b);

std::string word_to_string(const Word& w);        // "a b A B" form
Word word_from_string(const std::string& s, int alphabet = 2);

GroupElement evaluate(const Word& w, const Tuple& t);

// Left-trivialized derivative of u -> w(t . exp(u dir)) at u = 0,
// accumulated by d(ab)/dv = db/dv + Ad_{b(0)}^{-1} da/dv.
AlgebraElement word_derivative(const Word& w, const Tuple& t,
                               const std::vector<AlgebraElement>& dir);

// Symbolic phi_g^k(h): w_0 = h, w_k = g w_{k-1} g^-1 w_{k-1}^-1.
Word iterated_commutator(const Word& g, const Word& h, int k);

Word commutator_word(const Word& a, const Word& b);
Word nested_product_commutator(const std::vector<Word>& ws);

Word power_word(const Word& w, long long m);

}  // namespace lieforge
