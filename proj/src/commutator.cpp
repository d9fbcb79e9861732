#include "lieforge/commutator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lieforge {

namespace {

constexpr double kKernelTol = 1e-7;

int kernel_dimension(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  double top = s(0);
  if (top < 1e-14) return static_cast<int>(M.cols());
  int dim = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) < kKernelTol * top) ++dim;
  return dim;
}

double smallest_sv(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  return s(std::min(M.rows(), M.cols()) - 1);
}

// Balance one pair to |x| = |y| without changing [x, y].
void balance_pair(AlgebraElement& x, AlgebraElement& y) {
  double nx = x.norm(), ny = y.norm();
  if (nx < 1e-300 || ny < 1e-300) {
    x.coords.setZero();
    y.coords.setZero();
    return;
  }
  double r = std::sqrt(ny / nx);
  x.coords *= r;
  y.coords /= r;
}

void finish_solution(const GroupSpec& g, const AlgebraElement& z,
                     SKSolution& sol) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.algebra_dim);
  double max_x = 0.0;
  for (auto& [x, y] : sol.parts) {
    balance_pair(x, y);
    acc += bracket(x, y).coords;
    max_x = std::max(max_x, x.norm());
  }
  sol.residual = (acc - z.coords).norm();
  double nz = z.norm();
  sol.norm_ratio = nz > 0 ? max_x / std::sqrt(nz) : 0.0;
}

SKSolution strong_closed_form_3d(const GroupSpec& g, const AlgebraElement& z,
                                 double nz) {
  // Orthonormal rank-1 compact bases satisfy [e_i, e_j] = k0 eps_ijk e_k;
  // the coordinate bracket is a scaled cross product.
  Eigen::Vector3d e1 = Eigen::Vector3d::UnitX(), e2 = Eigen::Vector3d::UnitY();
  double k0 = (ad(algebra_from_coords(g, e1)) * e2)(2);
  Eigen::Vector3d zhat = z.coords / nz;
  Eigen::Vector3d u = zhat.cross(std::abs(zhat(0)) < 0.9
                                     ? Eigen::Vector3d::UnitX()
                                     : Eigen::Vector3d::UnitY())
                          .normalized();
  double t = std::sqrt(nz / std::abs(k0));
  AlgebraElement x = algebra_from_coords(g, t * u);
  Eigen::MatrixXd A = ad(x);
  Eigen::VectorXd yc = A.completeOrthogonalDecomposition().solve(z.coords);
  SKSolution sol;
  sol.mode = SKMode::Strong;
  sol.parts.emplace_back(x, algebra_from_coords(g, yc));
  finish_solution(g, z, sol);
  return sol;
}

SKSolution strong_newton(const GroupSpec& g, const AlgebraElement& z,
                         double nz) {
  // Solve [x, y] = z/|z| by damped least-norm Newton, then scale by sqrt|z|
  // so the construction is exactly sqrt-homogeneous.
  const int n = g.algebra_dim;
  Eigen::VectorXd zu = z.coords / nz;
  Rng rng = make_rng(0x5eed5eedULL);
  double best_res = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 20; ++restart) {
    Eigen::VectorXd x = random_unit_vector(rng, n);
    Eigen::VectorXd y = random_unit_vector(rng, n);
    auto resid = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return (ad(algebra_from_coords(g, a)) * b - zu).eval();
    };
    Eigen::VectorXd r = resid(x, y);
    for (int it = 0; it < 200 && r.norm() > 1e-13; ++it) {
      Eigen::MatrixXd J(n, 2 * n);
      J.leftCols(n) = -ad(algebra_from_coords(g, y));
      J.rightCols(n) = ad(algebra_from_coords(g, x));
      Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
      double t = 1.0;
      for (int half = 0; half < 40; ++half, t *= 0.5) {
        Eigen::VectorXd r2 = resid(x + t * step.head(n), y + t * step.tail(n));
        if (r2.norm() < r.norm()) {
          x += t * step.head(n);
          y += t * step.tail(n);
          r = r2;
          break;
        }
      }
    }
    best_res = std::min(best_res, r.norm());
    if (r.norm() <= 1e-13) {
      double s = std::sqrt(nz);
      SKSolution sol;
      sol.mode = SKMode::Strong;
      sol.parts.emplace_back(algebra_from_coords(g, s * x),
                             algebra_from_coords(g, s * y));
      finish_solution(g, z, sol);
      return sol;
    }
  }
  throw Error(ErrorClass::Solver, "strong commutator solve stalled at residual " +
                                      std::to_string(best_res * nz));
}

}  // namespace

AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b) {
  return algebra_from_coords(*a.group, ad(a) * b.coords);
}

RootDecomposition root_decompose(const GroupSpec& g, std::uint64_t seed) {
  if (!g.semisimple)
    throw Error(ErrorClass::Usage, "root_decompose needs a semisimple group");
  Rng rng = make_rng(seed);
  const int n = g.algebra_dim;

  int best_dim = n + 1;
  int best_count = 0;
  AlgebraElement best_x = zero_algebra(g);
  for (int trial = 0; trial < 20; ++trial) {
    AlgebraElement x = random_algebra(g, rng, 1.0);
    int dim = kernel_dimension(ad(x));
    if (dim < best_dim) {
      best_dim = dim;
      best_count = 1;
      best_x = x;
    } else if (dim == best_dim) {
      ++best_count;
    }
  }
  if (best_dim == 0 || best_count < 10)
    throw Error(ErrorClass::Decomposition,
                "unstable kernel dimension across regular-element samples");

  RootDecomposition rd;
  rd.group = &g;
  rd.regular_x = best_x;

  Eigen::MatrixXd M = ad(best_x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < n; ++i)
    if (s(i) >= kKernelTol * s(0)) ++rank;
  if (rank != n - best_dim)
    throw Error(ErrorClass::Decomposition, "rank/kernel mismatch in ad_x");
  // E = im(ad_x) is the sum of the nonzero root spaces; h = ker(ad_x).
  rd.complement_basis = svd.matrixU().leftCols(rank);
  rd.cartan_basis = svd.matrixV().rightCols(best_dim);

  rd.ad_E = rd.complement_basis.transpose() * M * rd.complement_basis;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> se(rd.ad_E);
    double lo = se.singularValues()(rank - 1);
    if (lo < 1e-10)
      throw Error(ErrorClass::Decomposition, "ad_x not invertible on E");
    rd.cond_ad_E = se.singularValues()(0) / lo;
  }

  Eigen::MatrixXd P(n, n);
  P.leftCols(best_dim) = rd.cartan_basis;
  P.rightCols(rank) = rd.complement_basis;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  D.topLeftCorner(best_dim, best_dim).setIdentity();
  rd.projector_h = P * D * P.inverse();
  return rd;
}

GroupElement find_splitting_element(RootDecomposition& rd,
                                    std::uint64_t seed) {
  const GroupSpec& g = *rd.group;
  const int n = g.algebra_dim;
  const Eigen::MatrixXd& BE = rd.complement_basis;
  const int dim_e = static_cast<int>(BE.cols());
  Rng rng = make_rng(seed);
  // Keep the candidate with the most transverse Ad_g E: the smallest
  // singular value of [E | Ad_g E] controls how much the weak split can
  // inflate the two components, and with them the contraction constant.
  GroupElement best_g = identity(g);
  double best_sv = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    double t = 0.1 * (1 + trial % 10);
    AlgebraElement v = random_algebra(g, rng, 1.0);
    v.coords *= t / v.norm();
    GroupElement cand = exp_elem(v);
    Eigen::MatrixXd Ad = adjoint(cand);
    Eigen::MatrixXd both(n, 2 * dim_e);
    both.leftCols(dim_e) = BE;
    both.rightCols(dim_e) = Ad * BE;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(both);
    if (svd.singularValues().size() < n) continue;
    double sv = svd.singularValues()(n - 1);
    if (sv > best_sv) {
      best_sv = sv;
      best_g = cand;
    }
  }
  {
    double sv = best_sv;
    if (sv < 1e-3)
      throw Error(ErrorClass::Search, "no splitting element found in 1000 trials");
    const GroupElement& cand = best_g;
    Eigen::MatrixXd Ad = adjoint(cand);
    Eigen::MatrixXd both(n, 2 * dim_e);
    both.leftCols(dim_e) = BE;
    both.rightCols(dim_e) = Ad * BE;

    rd.splitting_g = cand;
    rd.splitting_sv = sv;
    rd.adjoint_g = Ad;
    rd.adjoint_g_inv = adjoint(inv(cand));
    // T: complement of E inside Ad_g E, picked by column-pivoted QR of the
    // off-E part of the Ad_g E basis.
    Eigen::MatrixXd off = both.rightCols(dim_e) -
                          BE * (BE.transpose() * both.rightCols(dim_e));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(off);
    rd.t_basis.resize(n, n - dim_e);
    for (int j = 0; j < n - dim_e; ++j)
      rd.t_basis.col(j) = both.rightCols(dim_e).col(
          qr.colsPermutation().indices()(j));
    Eigen::MatrixXd split(n, n);
    split.leftCols(dim_e) = BE;
    split.rightCols(n - dim_e) = rd.t_basis;
    rd.split_inverse = split.inverse();
    rd.has_splitting = true;
    return cand;
  }
}

RootDecomposition conjugate_decomposition(const RootDecomposition& rd,
                                          const GroupElement& h) {
  RootDecomposition out = rd;
  Eigen::MatrixXd Ah = adjoint(h);
  Eigen::MatrixXd Ah_inv = adjoint(inv(h));
  out.regular_x = ad_apply(Ah, rd.regular_x);
  out.cartan_basis = Ah * rd.cartan_basis;
  out.complement_basis = Ah * rd.complement_basis;
  out.projector_h = Ah * rd.projector_h * Ah_inv;
  out.ad_E = rd.complement_basis.transpose() * Ah.transpose() *
             ad(out.regular_x) * out.complement_basis;
  if (rd.has_splitting) {
    out.splitting_g = conjugate(h, rd.splitting_g);
    out.adjoint_g = Ah * rd.adjoint_g * Ah_inv;
    out.adjoint_g_inv = Ah * rd.adjoint_g_inv * Ah_inv;
    out.t_basis = Ah * rd.t_basis;
    Eigen::MatrixXd split(out.t_basis.rows(),
                          out.complement_basis.cols() + out.t_basis.cols());
    split.leftCols(out.complement_basis.cols()) = out.complement_basis;
    split.rightCols(out.t_basis.cols()) = out.t_basis;
    out.split_inverse = split.inverse();
  }
  return out;
}

SKSolution weak_sk_solve(const RootDecomposition& rd,
                         const AlgebraElement& z) {
  if (!rd.has_splitting)
    throw Error(ErrorClass::Usage, "weak_sk_solve needs a splitting element");
  const GroupSpec& g = *rd.group;
  SKSolution sol;
  sol.mode = SKMode::Weak;
  if (z.norm() < 1e-14) {
    sol.parts.assign(2, {zero_algebra(g), zero_algebra(g)});
    sol.residual = z.norm();
    return sol;
  }
  const Eigen::MatrixXd& BE = rd.complement_basis;
  const int dim_e = static_cast<int>(BE.cols());
  // z = z1 + z2, z1 in E, z2 in T (T inside Ad_g E).
  Eigen::VectorXd c = rd.split_inverse * z.coords;
  Eigen::VectorXd z2 = rd.t_basis * c.tail(c.size() - dim_e);
  Eigen::VectorXd z1 = z.coords - z2;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(rd.ad_E);
  // [regular_x, y1] = z1 with y1 in E.
  Eigen::VectorXd y1 = BE * lu.solve(BE.transpose() * z1);
  // [Ad_g x, y2] = z2: pull back by Ad_g, solve in E, push forward.
  Eigen::VectorXd w2 = rd.adjoint_g_inv * z2;
  Eigen::VectorXd y2 = rd.adjoint_g * (BE * lu.solve(BE.transpose() * w2));

  sol.parts.emplace_back(rd.regular_x, algebra_from_coords(g, y1));
  sol.parts.emplace_back(
      algebra_from_coords(g, rd.adjoint_g * rd.regular_x.coords),
      algebra_from_coords(g, y2));
  finish_solution(g, z, sol);
  return sol;
}

SKSolution strong_sk_solve(const GroupSpec& g, const AlgebraElement& z) {
  if (!g.semisimple)
    throw Error(ErrorClass::Usage, "strong_sk_solve needs a semisimple group");
  double nz = z.norm();
  if (nz < 1e-14) {
    SKSolution sol;
    sol.mode = SKMode::Strong;
    sol.parts.emplace_back(zero_algebra(g), zero_algebra(g));
    sol.residual = nz;
    return sol;
  }
  if (g.name == GroupName::SU2 || g.name == GroupName::SO3)
    return strong_closed_form_3d(g, z, nz);
  return strong_newton(g, z, nz);
}

CommutatorFactorization group_commutator_factor(const RootDecomposition& rd,
                                                const GroupElement& z,
                                                SKMode mode) {
  double delta = distance_to_identity(z);
  if (delta > 0.3)
    throw Error(ErrorClass::Regime,
                "commutator factoring needs d(z, I) <= 0.3, got " +
                    std::to_string(delta));
  CommutatorFactorization out;
  if (delta < 1e-14) return out;
  AlgebraElement v = log_elem(z);
  SKSolution sol = mode == SKMode::Strong ? strong_sk_solve(*rd.group, v)
                                          : weak_sk_solve(rd, v);
  GroupElement prod = identity(*rd.group);
  for (const auto& [x, y] : sol.parts) {
    GroupElement X = exp_elem(x), Y = exp_elem(y);
    out.pairs.emplace_back(X, Y);
    prod = mul(prod, comm(X, Y));
  }
  out.achieved_dist = distance(prod, z);
  return out;
}

CalibrationRecord calibrate(const GroupSpec& g, std::uint64_t seed,
                            int samples) {
  CalibrationRecord rec;
  rec.group = g.id;
  rec.seed = seed;
  rec.samples = samples;
  RootDecomposition rd = root_decompose(g, seed);
  find_splitting_element(rd, seed + 1);
  Rng rng = make_rng(seed + 2);
  const double norms[] = {1e-4, 1e-2, 1.0, 1e2};
  for (int i = 0; i < samples; ++i) {
    AlgebraElement z = algebra_from_coords(
        g, norms[i % 4] * random_unit_vector(rng, g.algebra_dim));
    rec.c_weak = std::max(rec.c_weak, weak_sk_solve(rd, z).norm_ratio);
  }
  int strong_samples = std::min(samples, g.matrix_dim > 2 ? 200 : samples);
  for (int i = 0; i < strong_samples; ++i) {
    AlgebraElement z = algebra_from_coords(
        g, norms[i % 4] * random_unit_vector(rng, g.algebra_dim));
    rec.c_strong = std::max(rec.c_strong, strong_sk_solve(g, z).norm_ratio);
  }
  for (double delta : {1e-1, 1e-2, 1e-3})
    for (int i = 0; i < 20; ++i) {
      GroupElement z = exp_elem(
          algebra_from_coords(g, delta * random_unit_vector(rng, g.algebra_dim)));
      auto f = group_commutator_factor(rd, z, SKMode::Weak);
      rec.c_contraction =
          std::max(rec.c_contraction, f.achieved_dist / std::pow(delta, 1.5));
    }
  return rec;
}

}  // namespace lieforge
