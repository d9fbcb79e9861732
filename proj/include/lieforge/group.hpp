#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lieforge/errors.hpp"
#include "lieforge/rng.hpp"

namespace lieforge {

enum class GroupName { SU2, SO3, SL2R, SL3R, AFF1 };
enum class GroupOp { Mul, Inv, Conj, Comm };

// Immutable description of one of the five registered matrix groups.
// The algebra basis is stored orthonormalized with respect to the
// Frobenius pairing <X,Y> = Re tr(X^H Y), so algebra coordinates carry
// the Euclidean norm.
class GroupSpec {
 public:
  GroupName name;
  std::string id;  // "su2", "so3", "sl2r", "sl3r", "aff1"
  int matrix_dim = 0;
  int algebra_dim = 0;
  bool semisimple = false;
  std::vector<Eigen::MatrixXcd> basis;

  static const GroupSpec& get(GroupName name);
  static const GroupSpec& by_id(const std::string& id);
  static const std::vector<std::string>& registry_ids();
};

struct GroupElement {
  const GroupSpec* group = nullptr;
  Eigen::MatrixXcd m;
};

struct AlgebraElement {
  const GroupSpec* group = nullptr;
  Eigen::VectorXd coords;
  double norm() const { return coords.norm(); }
};

GroupElement identity(const GroupSpec& g);
AlgebraElement zero_algebra(const GroupSpec& g);
AlgebraElement algebra_from_coords(const GroupSpec& g, Eigen::VectorXd coords);

// Deviation from the group membership constraints (unitarity, det = 1, ...).
double membership_residual(const GroupElement& g);
void require_member(const GroupElement& g, double tol = 1e-8);

GroupElement mul(const GroupElement& a, const GroupElement& b);
GroupElement inv(const GroupElement& a);
GroupElement conjugate(const GroupElement& a, const GroupElement& b);  // a b a^-1
GroupElement comm(const GroupElement& a, const GroupElement& b);       // a b a^-1 b^-1
GroupElement group_op(const GroupElement& a, const GroupElement& b, GroupOp op);

Eigen::MatrixXcd algebra_matrix(const AlgebraElement& x);
// Expands X in the orthonormal basis; *residual receives the off-span part.
AlgebraElement to_algebra(const GroupSpec& g, const Eigen::MatrixXcd& X,
                          double* residual = nullptr);

bool in_principal_chart(const GroupElement& g);
GroupElement exp_elem(const AlgebraElement& x);
AlgebraElement log_elem(const GroupElement& g);  // throws Chart error outside the chart

// Adjoint representation on algebra coordinates.
Eigen::MatrixXd adjoint(const GroupElement& g);
Eigen::MatrixXd ad(const AlgebraElement& x);
AlgebraElement ad_apply(const Eigen::MatrixXd& Ad, const AlgebraElement& x);

// Left-invariant metric: ||log(a^-1 b)|| in the principal chart, with a
// left-invariant Frobenius fallback ||a^-1 b - I||_F + pi outside it.
double distance(const GroupElement& a, const GroupElement& b);
double distance_to_identity(const GroupElement& g);

GroupElement random_element(const GroupSpec& g, Rng& rng, double radius);
AlgebraElement random_algebra(const GroupSpec& g, Rng& rng, double radius);

}  // namespace lieforge
