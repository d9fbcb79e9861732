#pragma once
#include <string>
#include <utility>
#include <vector>
#include "lieforge/group.hpp"
namespace lieforge {

enum class SKMode { Strong, Weak };

// Cartan subalgebra h = ker(ad_x) for a regular x, complement E spanned by
// the nonzero root spaces, and the splitting g = E + Ad_g E data used by the
// weak commutator solver.
struct RootDecomposition {
  const GroupSpec* group = nullptr;
  AlgebraElement regular_x;
  Eigen::MatrixXd cartan_basis;      // n x dim_h, orthonormal
  Eigen::MatrixXd complement_basis;  // n x dim_E, orthonormal (E = im ad_x)
  Eigen::MatrixXd projector_h;       // projection onto h along E
  double cond_ad_E = 0.0;            // condition number of ad_x|_E

  bool has_splitting = false;
  GroupElement splitting_g;
  double splitting_sv = 0.0;  // smallest singular value of [E | Ad_g E]
  Eigen::MatrixXd t_basis;    // complement T of E inside Ad_g E
  Eigen::MatrixXd split_inverse;  // inverse of [E basis | T basis]
  Eigen::MatrixXd ad_E;           // ad_x restricted to E (coordinates)
  Eigen::MatrixXd adjoint_g, adjoint_g_inv;
};

struct SKSolution {
  SKMode mode = SKMode::Weak;
  std::vector<std::pair<AlgebraElement, AlgebraElement>> parts;
  double residual = 0.0;
  double norm_ratio = 0.0;  // max_j |x_j| / sqrt(|z|)
};

struct CommutatorFactorization {
  std::vector<std::pair<GroupElement, GroupElement>> pairs;
  double achieved_dist = 0.0;
};

struct CalibrationRecord {
  std::string group;
  double c_weak = 0.0;       // max norm_ratio of weak solves
  double c_strong = 0.0;     // max norm_ratio of strong solves
  double c_contraction = 0.0;  // max achieved_dist / delta^{3/2}
  std::uint64_t seed = 0;
  int samples = 0;
};

// Bracket in algebra coordinates.
AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b);

RootDecomposition root_decompose(const GroupSpec& g, std::uint64_t seed);
GroupElement find_splitting_element(RootDecomposition& rd, std::uint64_t seed);
RootDecomposition conjugate_decomposition(const RootDecomposition& rd,
                                          const GroupElement& h);
SKSolution weak_sk_solve(const RootDecomposition& rd, const AlgebraElement& z);
SKSolution strong_sk_solve(const GroupSpec& g, const AlgebraElement& z);
CommutatorFactorization group_commutator_factor(const RootDecomposition& rd,
                                                const GroupElement& z,
                                                SKMode mode);
CalibrationRecord calibrate(const GroupSpec& g, std::uint64_t seed,
                            int samples = 10000);

}  // namespace lieforge
