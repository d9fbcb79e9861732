#include "lieforge/group.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace lieforge {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using cd = std::complex<double>;

double frob_inner(const MatrixXcd& a, const MatrixXcd& b) {
  return (a.adjoint() * b).trace().real();
}

void orthonormalize(std::vector<MatrixXcd>& basis) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      basis[i] -= frob_inner(basis[j], basis[i]) * basis[j];
    basis[i] /= std::sqrt(frob_inner(basis[i], basis[i]));
  }
}

MatrixXcd m2(cd a, cd b, cd c, cd d) {
  MatrixXcd m(2, 2);
  m << a, b, c, d;
  return m;
}

std::unique_ptr<GroupSpec> make_spec(GroupName name) {
  auto s = std::make_unique<GroupSpec>();
  s->name = name;
  const cd I(0, 1);
  switch (name) {
    case GroupName::SU2: {
      s->id = "su2";
      s->matrix_dim = 2;
      s->algebra_dim = 3;
      s->semisimple = true;
      s->basis = {m2(I, 0, 0, -I), m2(0, 1, -1, 0), m2(0, I, I, 0)};
      break;
    }
    case GroupName::SO3: {
      s->id = "so3";
      s->matrix_dim = 3;
      s->algebra_dim = 3;
      s->semisimple = true;
      for (int k = 0; k < 3; ++k) {
        MatrixXcd L = MatrixXcd::Zero(3, 3);
        int i = (k + 1) % 3, j = (k + 2) % 3;
        L(j, i) = 1;
        L(i, j) = -1;
        s->basis.push_back(L);
      }
      break;
    }
    case GroupName::SL2R: {
      s->id = "sl2r";
      s->matrix_dim = 2;
      s->algebra_dim = 3;
      s->semisimple = true;
      s->basis = {m2(1, 0, 0, -1), m2(0, 1, 0, 0), m2(0, 0, 1, 0)};
      break;
    }
    case GroupName::SL3R: {
      s->id = "sl3r";
      s->matrix_dim = 3;
      s->algebra_dim = 8;
      s->semisimple = true;
      MatrixXcd d1 = MatrixXcd::Zero(3, 3), d2 = MatrixXcd::Zero(3, 3);
      d1(0, 0) = 1;
      d1(1, 1) = -1;
      d2(1, 1) = 1;
      d2(2, 2) = -1;
      s->basis = {d1, d2};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (i != j) {
            MatrixXcd e = MatrixXcd::Zero(3, 3);
            e(i, j) = 1;
            s->basis.push_back(e);
          }
      break;
    }
    case GroupName::AFF1: {
      s->id = "aff1";
      s->matrix_dim = 2;
      s->algebra_dim = 2;
      s->semisimple = false;
      s->basis = {m2(1, 0, 0, 0), m2(0, 1, 0, 0)};
      break;
    }
  }
  orthonormalize(s->basis);
  return s;
}

const std::vector<std::unique_ptr<GroupSpec>>& all_specs() {
  static const auto specs = [] {
    std::vector<std::unique_ptr<GroupSpec>> v;
    for (auto n : {GroupName::SU2, GroupName::SO3, GroupName::SL2R,
                   GroupName::SL3R, GroupName::AFF1})
      v.push_back(make_spec(n));
    return v;
  }();
  return specs;
}

}  // namespace

const GroupSpec& GroupSpec::get(GroupName name) {
  for (const auto& s : all_specs())
    if (s->name == name) return *s;
  throw Error(ErrorClass::Usage, "unknown group");
}

const GroupSpec& GroupSpec::by_id(const std::string& id) {
  for (const auto& s : all_specs())
    if (s->id == id) return *s;
  throw Error(ErrorClass::Usage, "unknown group id: " + id);
}

const std::vector<std::string>& GroupSpec::registry_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& s : all_specs()) v.push_back(s->id);
    return v;
  }();
  return ids;
}

GroupElement identity(const GroupSpec& g) {
  return {&g, Eigen::MatrixXcd::Identity(g.matrix_dim, g.matrix_dim)};
}

AlgebraElement zero_algebra(const GroupSpec& g) {
  return {&g, Eigen::VectorXd::Zero(g.algebra_dim)};
}

AlgebraElement algebra_from_coords(const GroupSpec& g, Eigen::VectorXd coords) {
  if (coords.size() != g.algebra_dim)
    throw Error(ErrorClass::Usage, "coordinate dimension mismatch");
  return {&g, std::move(coords)};
}

double membership_residual(const GroupElement& g) {
  const auto& m = g.m;
  const int n = g.group->matrix_dim;
  double imag_part = m.imag().norm();
  switch (g.group->name) {
    case GroupName::SU2:
      return (m.adjoint() * m - Eigen::MatrixXcd::Identity(n, n)).norm() +
             std::abs(m.determinant() - 1.0);
    case GroupName::SO3:
      return (m.adjoint() * m - Eigen::MatrixXcd::Identity(n, n)).norm() +
             std::abs(m.determinant() - 1.0) + imag_part;
    case GroupName::SL2R:
    case GroupName::SL3R:
      return std::abs(m.determinant() - 1.0) + imag_part;
    case GroupName::AFF1: {
      double r = std::abs(m(1, 0)) + std::abs(m(1, 1) - 1.0) + imag_part;
      if (m(0, 0).real() <= 0) r += 1.0;
      return r;
    }
  }
  return 0.0;
}

void require_member(const GroupElement& g, double tol) {
  if (!g.group) throw Error(ErrorClass::Usage, "element without group");
  if (membership_residual(g) > tol)
    throw Error(ErrorClass::InvalidElement,
                "element violates membership invariant of " + g.group->id);
}

GroupElement mul(const GroupElement& a, const GroupElement& b) {
  if (a.group != b.group) throw Error(ErrorClass::Usage, "group mismatch");
  return {a.group, a.m * b.m};
}

GroupElement inv(const GroupElement& a) {
  switch (a.group->name) {
    case GroupName::SU2:
    case GroupName::SO3:
      return {a.group, a.m.adjoint()};
    default:
      return {a.group, a.m.inverse()};
  }
}

GroupElement conjugate(const GroupElement& a, const GroupElement& b) {
  return mul(mul(a, b), inv(a));
}

GroupElement comm(const GroupElement& a, const GroupElement& b) {
  return mul(mul(a, b), mul(inv(a), inv(b)));
}

GroupElement group_op(const GroupElement& a, const GroupElement& b, GroupOp op) {
  require_member(a);
  require_member(b);
  switch (op) {
    case GroupOp::Mul: return mul(a, b);
    case GroupOp::Inv: return inv(a);
    case GroupOp::Conj: return conjugate(a, b);
    case GroupOp::Comm: return comm(a, b);
  }
  throw Error(ErrorClass::Usage, "unknown op");
}

Eigen::MatrixXcd algebra_matrix(const AlgebraElement& x) {
  const auto& g = *x.group;
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(g.matrix_dim, g.matrix_dim);
  for (int i = 0; i < g.algebra_dim; ++i) X += x.coords(i) * g.basis[i];
  return X;
}

AlgebraElement to_algebra(const GroupSpec& g, const Eigen::MatrixXcd& X,
                          double* residual) {
  Eigen::VectorXd coords(g.algebra_dim);
  Eigen::MatrixXcd rest = X;
  for (int i = 0; i < g.algebra_dim; ++i) {
    coords(i) = frob_inner(g.basis[i], X);
    rest -= coords(i) * g.basis[i];
  }
  if (residual) *residual = rest.norm();
  return {&g, coords};
}

bool in_principal_chart(const GroupElement& g) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g.m, false);
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    cd lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1e-14) return false;
    if (M_PI - std::abs(std::arg(lam)) < 1e-6) return false;
  }
  return true;
}

GroupElement exp_elem(const AlgebraElement& x) {
  Eigen::MatrixXcd X = algebra_matrix(x);
  return {x.group, X.exp()};
}

AlgebraElement log_elem(const GroupElement& g) {
  if (!in_principal_chart(g)) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(g.m, false);
    std::string spec = "[";
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      cd l = es.eigenvalues()(i);
      spec += std::to_string(l.real()) + (l.imag() < 0 ? "-" : "+") +
              std::to_string(std::abs(l.imag())) + "i ";
    }
    throw Error(ErrorClass::Chart,
                "element outside the principal chart; spectrum " + spec + "]");
  }
  Eigen::MatrixXcd L = g.m.log();
  double res = 0;
  AlgebraElement x = to_algebra(*g.group, L, &res);
  if (res > 1e-8)
    throw Error(ErrorClass::Chart, "log does not lie in the algebra span");
  return x;
}

Eigen::MatrixXd adjoint(const GroupElement& g) {
  const auto& spec = *g.group;
  Eigen::MatrixXd A(spec.algebra_dim, spec.algebra_dim);
  Eigen::MatrixXcd gi = inv(g).m;
  for (int j = 0; j < spec.algebra_dim; ++j) {
    Eigen::MatrixXcd conj = g.m * spec.basis[j] * gi;
    AlgebraElement col = to_algebra(spec, conj);
    A.col(j) = col.coords;
  }
  return A;
}

Eigen::MatrixXd ad(const AlgebraElement& x) {
  const auto& spec = *x.group;
  Eigen::MatrixXcd X = algebra_matrix(x);
  Eigen::MatrixXd A(spec.algebra_dim, spec.algebra_dim);
  for (int j = 0; j < spec.algebra_dim; ++j) {
    Eigen::MatrixXcd br = X * spec.basis[j] - spec.basis[j] * X;
    A.col(j) = to_algebra(spec, br).coords;
  }
  return A;
}

AlgebraElement ad_apply(const Eigen::MatrixXd& Ad, const AlgebraElement& x) {
  return {x.group, Ad * x.coords};
}

namespace {

double clamp1(double x) { return std::min(1.0, std::max(-1.0, x)); }

// Closed forms for the compact groups; these agree with ||log(a^-1 b)||
// in the orthonormalized basis (basis matrices have Frobenius norm 1).
double fast_distance_to_identity(const GroupSpec& g, const MatrixXcd& m,
                                 bool* handled) {
  *handled = true;
  switch (g.name) {
    case GroupName::SO3: {
      double theta = std::acos(clamp1((m.trace().real() - 1.0) / 2.0));
      return std::sqrt(2.0) * theta;
    }
    case GroupName::SU2: {
      double alpha = std::acos(clamp1(m.trace().real() / 2.0));
      return std::sqrt(2.0) * alpha;
    }
    default:
      *handled = false;
      return 0.0;
  }
}

}  // namespace

double distance_to_identity(const GroupElement& g) {
  bool handled = false;
  double d = fast_distance_to_identity(*g.group, g.m, &handled);
  if (handled) return d;
  GroupElement c = g;
  if (in_principal_chart(c)) {
    Eigen::MatrixXcd L = c.m.log();
    double res = 0;
    AlgebraElement x = to_algebra(*g.group, L, &res);
    if (res <= 1e-8) return x.norm();
  }
  const int n = g.group->matrix_dim;
  return (c.m - Eigen::MatrixXcd::Identity(n, n)).norm() + M_PI;
}

double distance(const GroupElement& a, const GroupElement& b) {
  if (a.group != b.group) throw Error(ErrorClass::Usage, "group mismatch");
  return distance_to_identity(mul(inv(a), b));
}

GroupElement random_element(const GroupSpec& g, Rng& rng, double radius) {
  return exp_elem(random_algebra(g, rng, radius));
}

AlgebraElement random_algebra(const GroupSpec& g, Rng& rng, double radius) {
  return {&g, random_ball_vector(rng, g.algebra_dim, radius)};
}

}  // namespace lieforge
