#include "lieforge/word.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace lieforge {

Tuple make_tuple(std::vector<GroupElement> elems) {
  if (elems.empty()) throw Error(ErrorClass::Usage, "empty tuple");
  const GroupSpec* g = elems[0].group;
  for (const auto& e : elems) {
    if (e.group != g) throw Error(ErrorClass::Usage, "mixed-group tuple");
    require_member(e, 1e-10);
  }
  return {std::move(elems)};
}

Word reduce(std::vector<int> raw, int alphabet) {
  std::vector<int> out;
  out.reserve(raw.size());
  for (int letter : raw) {
    if (letter == 0 || std::abs(letter) > alphabet)
      throw Error(ErrorClass::Usage,
                  "letter out of range: " + std::to_string(letter));
    if (!out.empty() && out.back() == -letter)
      out.pop_back();
    else
      out.push_back(letter);
  }
  return {std::move(out), alphabet};
}

Word invert(const Word& w) {
  std::vector<int> out(w.letters.rbegin(), w.letters.rend());
  for (int& l : out) l = -l;
  return {std::move(out), w.alphabet};
}

Word concat(const Word& a, const Word& b) {
  if (a.alphabet != b.alphabet)
    throw Error(ErrorClass::Usage, "alphabet mismatch");
  std::vector<int> raw = a.letters;
  raw.insert(raw.end(), b.letters.begin(), b.letters.end());
  return reduce(std::move(raw), a.alphabet);
}

namespace {
// 1 < -1 < 2 < -2 < ...
int letter_rank(int l) { return l > 0 ? 2 * l - 2 : -2 * l - 1; }
}  // namespace

bool shortlex_less(const Word& a, const Word& b) {
  if (a.length() != b.length()) return a.length() < b.length();
  for (int i = 0; i < a.length(); ++i)
    if (a.letters[i] != b.letters[i])
      return letter_rank(a.letters[i]) < letter_rank(b.letters[i]);
  return false;
}

std::string word_to_string(const Word& w) {
  std::string s;
  for (int l : w.letters) {
    char c = static_cast<char>((l > 0 ? 'a' : 'A') + std::abs(l) - 1);
    if (!s.empty()) s += ' ';
    s += c;
  }
  return s;
}

Word word_from_string(const std::string& s, int alphabet) {
  std::vector<int> raw;
  for (char c : s) {
    if (c == ' ' || c == '\t') continue;
    int letter;
    if (c >= 'a' && c <= 'z')
      letter = c - 'a' + 1;
    else if (c >= 'A' && c <= 'Z')
      letter = -(c - 'A' + 1);
    else
      throw Error(ErrorClass::Usage, std::string("bad word character: ") + c);
    raw.push_back(letter);
  }
  return reduce(std::move(raw), alphabet);
}

GroupElement evaluate(const Word& w, const Tuple& t) {
  GroupElement acc = identity(t.group());
  for (int l : w.letters) {
    const GroupElement& gen = t.elements.at(std::abs(l) - 1);
    acc = l > 0 ? mul(acc, gen) : mul(acc, inv(gen));
  }
  return acc;
}

AlgebraElement word_derivative(const Word& w, const Tuple& t,
                               const std::vector<AlgebraElement>& dir) {
  const GroupSpec& spec = t.group();
  if (static_cast<int>(dir.size()) != t.size())
    throw Error(ErrorClass::Usage, "direction arity mismatch");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(spec.algebra_dim);
  std::vector<Eigen::MatrixXd> ad_gen(t.size()), ad_gen_inv(t.size());
  for (int i = 0; i < t.size(); ++i) {
    ad_gen[i] = adjoint(t.elements[i]);
    ad_gen_inv[i] = adjoint(inv(t.elements[i]));
  }
  // Letter-by-letter product rule; acc holds the left-trivialized
  // derivative of the prefix evaluated so far.
  for (int l : w.letters) {
    int idx = std::abs(l) - 1;
    if (l > 0)
      acc = dir[idx].coords + ad_gen_inv[idx] * acc;
    else
      acc = -(ad_gen[idx] * dir[idx].coords) + ad_gen[idx] * acc;
  }
  return {&spec, acc};
}

Word iterated_commutator(const Word& g, const Word& h, int k) {
  if (g.alphabet != h.alphabet)
    throw Error(ErrorClass::Usage, "alphabet mismatch");
  if (k < 0) throw Error(ErrorClass::Usage, "negative iteration count");
  if (k > 30) {
    double projected = 2.0 * k * g.length() +
                       std::ldexp(double(h.length() + 2 * g.length()), k);
    throw Error(ErrorClass::Size,
                "iterated commutator too deep; projected length " +
                    std::to_string(projected));
  }
  Word w = h;
  for (int i = 0; i < k; ++i) w = commutator_word(g, w);
  return w;
}

Word commutator_word(const Word& a, const Word& b) {
  return concat(concat(a, b), concat(invert(a), invert(b)));
}

Word nested_product_commutator(const std::vector<Word>& ws) {
  if (ws.size() < 2)
    throw Error(ErrorClass::Usage, "need at least 2 words to nest");
  Word acc = ws[0];
  for (std::size_t i = 1; i < ws.size(); ++i)
    acc = commutator_word(acc, ws[i]);
  return acc;
}

Word power_word(const Word& w, long long m) {
  if (m == 0) return {{}, w.alphabet};
  Word base = m > 0 ? w : invert(w);
  long long reps = std::llabs(m);
  std::vector<int> raw;
  raw.reserve(base.letters.size() * reps);
  for (long long i = 0; i < reps; ++i)
    raw.insert(raw.end(), base.letters.begin(), base.letters.end());
  return reduce(std::move(raw), w.alphabet);
}

}  // namespace lieforge
