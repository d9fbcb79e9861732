#pragma once
#include <complex>
#include <vector>
#include "lieforge/net.hpp"
#include "lieforge/proximal.hpp"
#include "lieforge/word.hpp"
namespace lieforge {

// Trace of the iterated-commutator orbit phi_g^k(h) = g phi^{k-1} g^-1
// phi^{-(k-1)} together with the fitted limit direction v_g(h).
struct DynamicsReport {
  GroupElement g, h;
  ProximalData prox;
  struct Iterate {
    int k = 0;
    GroupElement value;
    double log_norm = 0.0;
    Eigen::VectorXd direction;  // unit log coordinates
  };
  std::vector<Iterate> iterates;
  AlgebraElement v_estimate;
  double v_plane_residual = 0.0;   // off-L(g) part of v_estimate
  std::vector<double> convergence_errors;  // ||Log phi^k - s^k v|| / |s|^k
  int k0 = 0;  // errors decrease for k >= k0
};

DynamicsReport run_dynamics(const GroupElement& g, const GroupElement& h,
                            int k_max);
// Max relative deviation of v_g(Exp(t xi)) from t xi over probes xi in L(g).
double estimate_dv_identity(const GroupElement& g, int probe_count,
                            std::uint64_t seed = 1, double t = 1e-3);

// The limit map Psi(u) = prod_j exp(eps e^{sigma_j . u} nu_j) and the data
// needed to evaluate the commutator-power words omega_k.
struct PsiSpec {
  Tuple base_pair;
  bool complex_mode = false;
  std::vector<Word> g_words;
  Word h_word;
  double epsilon = 0.05;
  std::vector<int> l_offsets;
  std::vector<std::complex<double>> s0;
  std::vector<Eigen::VectorXd> sigma;      // d ln|s_j|(0) over the slice
  std::vector<Eigen::VectorXd> sigma_arg;  // d arg s_j(0), complex mode
  std::vector<AlgebraElement> nu;          // nu_j = v_{g_j}(h)
  std::vector<ProximalData> prox;
  // Fixed random slice of G x G through the base pair: alpha(u) =
  // (A exp(sum u_i a_i), B exp(sum u_i b_i)).
  std::vector<AlgebraElement> slice_a, slice_b;
  Eigen::MatrixXd omega;  // eps * sum nu_j sigma_j
  double omega_sv = 0.0;
  bool accepted = false;
};

Tuple psi_alpha(const PsiSpec& spec, const Eigen::VectorXd& u);
GroupElement psi_value(const PsiSpec& spec, const Eigen::VectorXd& u);
// Left-trivialized Jacobian of Psi at 0 (central differences).
Eigen::MatrixXd psi_jacobian_at_zero(const PsiSpec& spec, double step = 1e-6);
// Recompute omega for a different epsilon (construction is linear in eps).
PsiSpec with_epsilon(PsiSpec spec, double epsilon);

PsiSpec assemble_psi(const Tuple& pair, std::uint64_t seed, bool complex_mode);

// Numeric value of omega_k = prod_j w_jk^{m_jk} at the pair alpha(u).
GroupElement omega_k_value(const PsiSpec& spec, int k, const Tuple& pair_u);
long long m_jk(const PsiSpec& spec, int j, int k);

struct PsiConvergence {
  int k = 0;
  double sup_error = 0.0;        // sup-grid |omega_k(alpha(u/k)) - Psi(u)|_F
  bool numeric_realization = false;
};
std::vector<PsiConvergence> verify_psi_limit(const PsiSpec& spec,
                                             const std::vector<int>& k_list,
                                             int grid_per_axis, double delta);
// Complex mode: subsequence k_r with k_r * arg(s_j) -> 0 (mod 2pi).
std::vector<int> select_k_subsequence(const PsiSpec& spec, int count,
                                      int k_max);

}  // namespace lieforge
