#include "lieforge/relation.hpp"

#include <algorithm>
#include <cmath>

namespace lieforge {

namespace {

// Move the pair to make the word evaluate to the identity: damped
// least-norm Newton over the 2n-dimensional pair space, with Exp
// retraction of the left-trivialized step.
struct NewtonResult {
  Tuple pair;
  double residual = 0.0;
  double jacobian_sv = 0.0;
  bool converged = false;
};

NewtonResult newton_correct(const Word& w, const Tuple& start) {
  const GroupSpec& g = start.group();
  const int n = g.algebra_dim;
  const int M = start.size();
  NewtonResult out;
  out.pair = start;
  auto residual_vec = [&](const Tuple& t) {
    return log_elem(evaluate(w, t)).coords;
  };
  Eigen::VectorXd r = residual_vec(out.pair);
  for (int it = 0; it < 50 && r.norm() > 1e-12; ++it) {
    Eigen::MatrixXd J(n, M * n);
    for (int comp = 0; comp < M; ++comp)
      for (int b = 0; b < n; ++b) {
        std::vector<AlgebraElement> dir(M, zero_algebra(g));
        dir[comp].coords(b) = 1.0;
        J.col(comp * n + b) = word_derivative(w, out.pair, dir).coords;
      }
    if (it == 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
      out.jacobian_sv = svd.singularValues().tail(1)(0);
    }
    Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half, t *= 0.5) {
      Tuple cand = out.pair;
      for (int comp = 0; comp < M; ++comp)
        cand.elements[comp] = mul(
            cand.elements[comp],
            exp_elem(algebra_from_coords(
                g, t * step.segment(comp * n, n))));
      Eigen::VectorXd r2 = residual_vec(cand);
      if (r2.norm() < r.norm()) {
        out.pair = std::move(cand);
        r = std::move(r2);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.residual = distance_to_identity(evaluate(w, out.pair));
  out.converged = out.residual <= 1e-10;
  return out;
}

bool probe_non_identical(const Word& w, const Tuple& base,
                         std::uint64_t seed) {
  const GroupSpec& g = base.group();
  Rng rng = make_rng(seed);
  Tuple probe = base;
  double budget = 0.1 / base.size();
  for (auto& e : probe.elements)
    e = mul(e, exp_elem(algebra_from_coords(
                 g, random_ball_vector(rng, g.algebra_dim, budget))));
  return distance_to_identity(evaluate(w, probe)) >= 1e-4;
}

std::vector<Word> seed_words() {
  Word a{{1}, 2}, b{{2}, 2};
  Word ab = commutator_word(a, b);
  std::vector<Word> seeds;
  seeds.push_back(ab);                                   // [a,b]
  seeds.push_back(commutator_word(a, ab));               // [a,[a,b]]
  seeds.push_back(commutator_word(b, ab));               // [b,[a,b]]
  seeds.push_back(reduce({1, 2, 1, -2}, 2));             // a b a b^-1
  seeds.push_back(concat(ab, ab));                       // [a,b]^2
  seeds.push_back(commutator_word(concat(a, a), b));     // [a^2,b]
  seeds.push_back(commutator_word(a, concat(b, b)));     // [a,b^2]
  seeds.push_back(reduce({1, 1, 2, -1, -2}, 2));
  seeds.push_back(reduce({1, -2, 1, 2}, 2));
  return seeds;
}

}  // namespace

double pair_distance(const Tuple& a, const Tuple& b) {
  double d = 0.0;
  for (int i = 0; i < a.size(); ++i)
    d += distance(a.elements[i], b.elements[i]);
  return d;
}

RelationCertificate find_relation_net_newton(const Tuple& pair,
                                             const SKLevelState& sk,
                                             int level) {
  if (!irrationality_screen(pair, 6))
    throw Error(ErrorClass::Search, "pair fails the irrationality screen");
  double max_target = 0.9 * sk.base.region.radius;
  for (const Word& w_r : seed_words()) {
    GroupElement val = evaluate(w_r, pair);
    double d = distance_to_identity(val);
    if (d > max_target) continue;
    Word w_prime = w_r;
    double init_res = d;
    if (d > 1e-13) {
      ApproxResult appr = approximate(sk, inv(val), level);
      w_prime = concat(w_r, appr.word);
      if (w_prime.empty()) continue;
      init_res = distance_to_identity(evaluate(w_prime, pair));
    }
    NewtonResult nr = newton_correct(w_prime, pair);
    if (!nr.converged)
      throw Error(ErrorClass::Correction,
                  "Newton stalled at residual " + std::to_string(nr.residual));
    RelationCertificate cert;
    cert.base_pair = pair;
    cert.word = w_prime;
    cert.perturbed_pair = nr.pair;
    cert.residual = nr.residual;
    cert.pair_dist = pair_distance(pair, nr.pair);
    cert.l_k = w_prime.length();
    cert.level = level;
    cert.method = RelationMethod::NetNewton;
    cert.initial_residual = init_res;
    cert.jacobian_sv = nr.jacobian_sv;
    cert.non_identical =
        probe_non_identical(w_prime, pair, 0x9e3779b9ULL + level);
    if (cert.word.empty() || cert.residual > 1e-10 || !cert.non_identical)
      throw Error(ErrorClass::Integrity,
                  "certificate failed its own invariants");
    return cert;
  }
  throw Error(ErrorClass::Search, "all relation seed words were trivial");
}

RelationCurve relation_rate_curve(const Tuple& pair, const SKLevelState& sk,
                                  int levels) {
  if (levels < 2)
    throw Error(ErrorClass::Usage, "relation_rate_curve needs >= 2 levels");
  RelationCurve curve;
  std::vector<RateLevel> pts;
  for (int k = 1; k <= levels; ++k) {
    try {
      RelationCertificate c = find_relation_net_newton(pair, sk, k);
      pts.push_back({k, c.l_k, c.pair_dist, c.pair_dist});
      curve.certs.push_back(std::move(c));
    } catch (const Error& e) {
      curve.failures.push_back("level " + std::to_string(k) + ": " + e.what());
    }
  }
  RateReport rep = fit_rate(pts, sk.mode);
  curve.kappa_hat = rep.kappa_hat;
  curve.c_hat = rep.c_hat;
  curve.pass = rep.pass && curve.failures.empty();
  return curve;
}

RelationCertificate find_relation_commutator_power(const PsiSpec& spec,
                                                   const Word& w, int k,
                                                   double delta) {
  if (!spec.accepted)
    throw Error(ErrorClass::Usage, "commutator-power needs an accepted spec");
  const int n = static_cast<int>(spec.slice_a.size());
  auto residual_vec = [&](const Eigen::VectorXd& u) {
    Tuple pu = psi_alpha(spec, u / static_cast<double>(k));
    GroupElement diff = mul(inv(evaluate(w, pu)), omega_k_value(spec, k, pu));
    return log_elem(diff).coords;
  };
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = residual_vec(u);
  const double fd = 1e-6;
  for (int it = 0; it < 60 && r.norm() > 1e-12; ++it) {
    Eigen::MatrixXd J(r.size(), n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd up = u, um = u;
      up(i) += fd;
      um(i) -= fd;
      J.col(i) = (residual_vec(up) - residual_vec(um)) / (2 * fd);
    }
    Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
    double t = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half, t *= 0.5) {
      Eigen::VectorXd cand = u + t * step;
      if (cand.norm() > delta)
        throw Error(ErrorClass::Basin,
                    "Newton left the slice ball; k too small");
      Eigen::VectorXd r2 = residual_vec(cand);
      if (r2.norm() < r.norm()) {
        u = cand;
        r = r2;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (r.norm() > 1e-10)
    throw Error(ErrorClass::Correction,
                "commutator-power Newton stalled at " +
                    std::to_string(r.norm()));

  // Explicit word w_k = w^-1 prod_j (phi_{g_j}^k(h))^{m_jk}.
  long long projected = w.length();
  std::vector<Word> wjk;
  for (std::size_t j = 0; j < spec.g_words.size(); ++j) {
    Word c = iterated_commutator(spec.g_words[j], spec.h_word, k);
    projected += m_jk(spec, static_cast<int>(j), k) *
                 static_cast<long long>(c.length());
    if (projected > 5'000'000)
      throw Error(ErrorClass::Size,
                  "certificate word too large; reduce k");
    wjk.push_back(std::move(c));
  }
  Word word = invert(w);
  for (std::size_t j = 0; j < wjk.size(); ++j)
    word = concat(word, power_word(wjk[j], m_jk(spec, static_cast<int>(j), k)));
  if (word.empty())
    throw Error(ErrorClass::Integrity, "commutator-power word reduced away");

  RelationCertificate cert;
  cert.base_pair = spec.base_pair;
  cert.word = word;
  cert.perturbed_pair = psi_alpha(spec, u / static_cast<double>(k));
  cert.residual = r.norm();
  cert.pair_dist = pair_distance(spec.base_pair, cert.perturbed_pair);
  cert.l_k = word.length();
  cert.level = k;
  cert.method = RelationMethod::CommutatorPower;
  cert.non_identical =
      probe_non_identical(word, spec.base_pair, 0x517cc1b7ULL + k);
  return cert;
}

Word solvable_lift(const Word& w, int s) {
  if (w.empty())
    throw Error(ErrorClass::Usage, "solvable_lift needs a nontrivial word");
  bool all_first = true;
  for (int l : w.letters)
    if (std::abs(l) != 1) all_first = false;
  Word a{{all_first ? 2 : 1}, w.alphabet};
  Word s0 = w;
  Word s1 = commutator_word(a, w);
  for (int i = 0; i < s; ++i) {
    Word n0 = commutator_word(s0, s1);
    Word n1 = commutator_word(s0, invert(s1));
    s0 = std::move(n0);
    s1 = std::move(n1);
  }
  if (s1.empty())
    throw Error(ErrorClass::Integrity, "solvable lift reduced to identity");
  double bound = std::pow(4.0, s + 1) * w.length();
  if (s1.length() > bound)
    throw Error(ErrorClass::Size, "solvable lift exceeds the 4^{s+1} bound");
  return s1;
}

std::vector<AffineStep> affine_relation_sequence(double s0, int k_max) {
  if (!(s0 > 0.0 && s0 < 1.0))
    throw Error(ErrorClass::Usage, "s0 must lie in (0, 1)");
  const GroupSpec& aff = GroupSpec::by_id("aff1");
  std::vector<AffineStep> out;
  for (int k = 1; k <= k_max; ++k) {
    long double x = std::pow(1.0L / static_cast<long double>(s0), k);
    // The ambiguity test needs the fractional part, which long double only
    // resolves below 2^63; past that the rounded floor is used as-is.
    if (x < 9.2e18L &&
        std::abs(static_cast<double>(x - std::nearbyint(x))) < 1e-9)
      throw Error(ErrorClass::Usage,
                  "s0^{-k} is integral at k = " + std::to_string(k) +
                      "; floor is ambiguous");
    long double m = std::floor(x);
    AffineStep step;
    step.k = k;
    step.m_k = static_cast<long long>(std::min<long double>(m, 9e18L));
    double sk = static_cast<double>(std::pow(m, -1.0L / k));
    step.s_k = sk;
    step.gap = std::abs(sk - s0);

    // (g^k t g^-k)^{m_k} = t with g = scaling by s_k, t = unit translation.
    Eigen::MatrixXcd gm(2, 2), tm(2, 2);
    gm << sk, 0, 0, 1;
    tm << 1, 1, 0, 1;
    GroupElement ge{&aff, gm}, te{&aff, tm};
    GroupElement conjk = te;
    for (int i = 0; i < k; ++i) conjk = conjugate(ge, conjk);
    // Power by m_k: the conjugate is unipotent, so the translation part
    // just scales; exact squaring would overflow for large m_k.
    Eigen::MatrixXcd powm = Eigen::MatrixXcd::Identity(2, 2);
    powm(0, 1) = conjk.m(0, 1) * static_cast<double>(m);
    step.relation_residual = (powm - tm).norm();
    out.push_back(step);
  }
  return out;
}

double affine_limit_error(double s0, int k, int grid) {
  double worst = 0.0;
  long double m = std::floor(std::pow(1.0L / static_cast<long double>(s0), k));
  for (int i = 0; i < grid; ++i) {
    double u = -1.0 + 2.0 * i / (grid - 1);
    long double val =
        m * std::pow(static_cast<long double>(s0) + u / k, k);
    worst = std::max(
        worst, std::abs(static_cast<double>(val) - std::exp(u / s0)));
  }
  return worst;
}

}  // namespace lieforge
