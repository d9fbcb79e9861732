#pragma once
#include <vector>
#include "lieforge/dynamics.hpp"
#include "lieforge/sk.hpp"
namespace lieforge {

enum class RelationMethod { NetNewton, CommutatorPower, AffineClosedForm };

// A nontrivial reduced word together with a nearby pair on which it
// evaluates to the identity.
struct RelationCertificate {
  Tuple base_pair;
  Word word;
  Tuple perturbed_pair;
  double residual = 0.0;    // d(word(perturbed_pair), I)
  double pair_dist = 0.0;   // sum of component distances to the base pair
  long long l_k = 0;
  int level = 0;
  RelationMethod method = RelationMethod::NetNewton;
  bool non_identical = false;
  double initial_residual = 0.0;  // before the Newton correction
  double jacobian_sv = 0.0;       // smallest word-Jacobian singular value
};

struct RelationCurve {
  std::vector<RelationCertificate> certs;
  double kappa_hat = 0.0;
  double c_hat = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

struct AffineStep {
  int k = 0;
  long long m_k = 0;
  double s_k = 0.0;
  double gap = 0.0;                // |s_k - s0|
  double relation_residual = 0.0;  // (g^k t g^-k)^{m_k} vs t, in AFF1
};

double pair_distance(const Tuple& a, const Tuple& b);

RelationCertificate find_relation_net_newton(const Tuple& pair,
                                             const SKLevelState& sk,
                                             int level);
RelationCurve relation_rate_curve(const Tuple& pair, const SKLevelState& sk,
                                  int levels);
// w must evaluate into Psi's image; solves w_k(alpha(u/k)) = 1 for u in the
// slice ball of radius delta.
RelationCertificate find_relation_commutator_power(const PsiSpec& spec,
                                                   const Word& w, int k,
                                                   double delta = 0.5);
Word solvable_lift(const Word& w, int s);
std::vector<AffineStep> affine_relation_sequence(double s0, int k_max);
// Sup error of psi_k(u) = m_k (s0 + u/k)^k against e^{u/s0} on [-1, 1].
double affine_limit_error(double s0, int k, int grid = 41);

}  // namespace lieforge
