#include "lieforge/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace lieforge {

namespace {

// 2x2 real matrix realizing multiplication by s on L(g) coordinates.
Eigen::Matrix2d plane_mult(const ProximalData& p, std::complex<double> z) {
  return z.real() * Eigen::Matrix2d::Identity() + z.imag() * p.complex_structure;
}

Eigen::MatrixXd power_matrix(Eigen::MatrixXd M, long long e) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(M.rows(), M.cols());
  for (; e > 0; e >>= 1, M = M * M)
    if (e & 1) acc = acc * M;
  return acc;
}

Eigen::MatrixXcd power_matrix(Eigen::MatrixXcd M, long long e) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(M.rows(), M.cols());
  for (; e > 0; e >>= 1, M = M * M)
    if (e & 1) acc = acc * M;
  return acc;
}

// Nearest group element for the compact groups (polar projection). The
// commutator iteration feeds its output back in; without re-projection the
// off-manifold rounding drift doubles each step and eventually swamps the
// contracting rotation part.
GroupElement project_compact(GroupElement x) {
  if (x.group->name == GroupName::SU2 || x.group->name == GroupName::SO3) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
        x.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    x.m = svd.matrixU() * svd.matrixV().adjoint();
  }
  return x;
}

// Dominant eigenvalue of Ad_g - Id, branch-matched to a reference value.
std::complex<double> dominant_s(const GroupElement& g,
                                std::complex<double> ref) {
  Eigen::MatrixXd M =
      adjoint(g) - Eigen::MatrixXd::Identity(g.group->algebra_dim,
                                             g.group->algebra_dim);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M);
  std::complex<double> best = es.eigenvalues()(0);
  for (int i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - ref) < std::abs(best - ref))
      best = es.eigenvalues()(i);
  return best;
}

}  // namespace

DynamicsReport run_dynamics(const GroupElement& g, const GroupElement& h,
                            int k_max) {
  DynamicsReport rep;
  rep.g = g;
  rep.h = h;
  rep.prox = classify_proximal(g);
  if (rep.prox.kind == ProximalKind::Neither)
    throw Error(ErrorClass::Regime, "g is not (C-)1-proximal");
  if (!rep.prox.in_pi)
    throw Error(ErrorClass::Regime, "|s(g)| >= 1: outside Pi");
  const GroupSpec& spec = *g.group;
  double d0 = distance_to_identity(h);
  rep.v_estimate = zero_algebra(spec);
  if (d0 < 1e-13) return rep;
  if (d0 > 0.2)
    throw Error(ErrorClass::Basin, "h outside the d(h, I) <= 0.2 basin proxy");

  GroupElement cur = h;
  for (int k = 1; k <= k_max; ++k) {
    cur = project_compact(comm(g, cur));
    double d = distance_to_identity(cur);
    if (d > std::max(10.0 * d0, 0.5))
      throw Error(ErrorClass::Basin, "iterates escape the contraction basin");
    DynamicsReport::Iterate it;
    it.k = k;
    it.value = cur;
    AlgebraElement L = log_elem(cur);
    it.log_norm = L.norm();
    it.direction = it.log_norm > 1e-300
                       ? Eigen::VectorXd(L.coords / it.log_norm)
                       : Eigen::VectorXd::Zero(spec.algebra_dim);
    rep.iterates.push_back(std::move(it));
    if (it.log_norm < 1e-13) break;
  }
  if (rep.iterates.empty()) return rep;

  // Fit Log phi^k = s^k (v + s^k w) on a window after convergence onset.
  int first = 0;
  while (first < static_cast<int>(rep.iterates.size()) - 1 &&
         rep.iterates[first].log_norm >= 1e-4)
    ++first;
  int last = std::min<int>(first + 7, rep.iterates.size() - 1);
  first = std::max(0, last - 7);
  const int K = last - first + 1;
  const int n = spec.algebra_dim;
  const std::complex<double> s = rep.prox.s;

  if (rep.prox.kind == ProximalKind::OneProximal) {
    double sr = s.real();
    // Decay-rate basis: the real eigenvalues of Ad_g - Id plus their pairwise
    // products, i.e. every rate present in Log phi^k through second order.
    std::vector<double> rates{sr};
    {
      Eigen::MatrixXd M = adjoint(g) - Eigen::MatrixXd::Identity(n, n);
      Eigen::EigenSolver<Eigen::MatrixXd> es(M);
      std::vector<double> lam;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i).imag()) < 1e-9)
          lam.push_back(es.eigenvalues()(i).real());
      std::vector<double> cand = lam;
      for (std::size_t i = 0; i < lam.size(); ++i)
        for (std::size_t j = i; j < lam.size(); ++j)
          cand.push_back(lam[i] * lam[j]);
      std::sort(cand.begin(), cand.end(),
                [](double a, double b) { return std::abs(a) > std::abs(b); });
      for (double r : cand) {
        if (std::abs(r) < 1e-8 || std::abs(r) >= 1.0) continue;
        bool dup = false;
        for (double q : rates) dup = dup || std::abs(q - r) < 1e-10;
        if (!dup) rates.push_back(r);
        if (static_cast<int>(rates.size()) >= std::max(2, K - 2)) break;
      }
    }
    const int R = static_cast<int>(rates.size());
    Eigen::MatrixXd A(K, R);
    Eigen::MatrixXd Y(K, n);
    for (int i = 0; i < K; ++i) {
      int k = rep.iterates[first + i].k;
      for (int j = 0; j < R; ++j) A(i, j) = std::pow(rates[j], k);
      Y.row(i) = log_elem(rep.iterates[first + i].value).coords.transpose();
    }
    Eigen::MatrixXd vw = A.completeOrthogonalDecomposition().solve(Y);
    rep.v_estimate = algebra_from_coords(spec, vw.row(0).transpose());
    const Eigen::MatrixXd& P = rep.prox.eigen_plane;
    rep.v_plane_residual =
        (rep.v_estimate.coords - P * (P.transpose() * rep.v_estimate.coords))
            .norm();
    for (const auto& it : rep.iterates)
      rep.convergence_errors.push_back(
          (log_elem(it.value).coords - std::pow(sr, it.k) * rep.v_estimate.coords)
              .norm() /
          std::pow(std::abs(sr), it.k));
  } else {
    const Eigen::MatrixXd& P = rep.prox.eigen_plane;
    Eigen::MatrixXd A(2 * K, 4);
    Eigen::VectorXd Y(2 * K);
    for (int i = 0; i < K; ++i) {
      int k = rep.iterates[first + i].k;
      Eigen::Matrix2d Sk = plane_mult(rep.prox, std::pow(s, k));
      Eigen::Matrix2d S2k = plane_mult(rep.prox, std::pow(s, 2 * k));
      A.block<2, 2>(2 * i, 0) = Sk;
      A.block<2, 2>(2 * i, 2) = S2k;
      Y.segment<2>(2 * i) =
          P.transpose() * log_elem(rep.iterates[first + i].value).coords;
    }
    Eigen::VectorXd vw = A.completeOrthogonalDecomposition().solve(Y);
    rep.v_estimate = algebra_from_coords(spec, P * vw.head<2>());
    double off = 0;
    for (int i = 0; i < K; ++i) {
      Eigen::VectorXd L = log_elem(rep.iterates[first + i].value).coords;
      off = std::max(off, (L - P * (P.transpose() * L)).norm() /
                              std::max(L.norm(), 1e-300));
    }
    rep.v_plane_residual = off;
    for (const auto& it : rep.iterates) {
      Eigen::VectorXd pred =
          P * (plane_mult(rep.prox, std::pow(s, it.k)) * vw.head<2>());
      rep.convergence_errors.push_back(
          (log_elem(it.value).coords - pred).norm() /
          std::pow(std::abs(s), it.k));
    }
  }

  // Start of the monotone decreasing run that reaches the smallest error.
  int imin = 0;
  for (int i = 1; i < static_cast<int>(rep.convergence_errors.size()); ++i)
    if (rep.convergence_errors[i] < rep.convergence_errors[imin]) imin = i;
  int start = imin;
  while (start > 0 &&
         rep.convergence_errors[start - 1] > rep.convergence_errors[start])
    --start;
  rep.k0 = rep.iterates[start].k;
  return rep;
}

double estimate_dv_identity(const GroupElement& g, int probe_count,
                            std::uint64_t seed, double t) {
  ProximalData p = classify_proximal(g);
  if (p.kind == ProximalKind::Neither || !p.in_pi)
    throw Error(ErrorClass::Regime, "g is not proximal with |s| < 1");
  Rng rng = make_rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probe_count; ++i) {
    Eigen::VectorXd plane_dir =
        random_unit_vector(rng, static_cast<int>(p.eigen_plane.cols()));
    Eigen::VectorXd xi = p.eigen_plane * plane_dir;
    GroupElement h = exp_elem(algebra_from_coords(*g.group, t * xi));
    AlgebraElement v = run_dynamics(g, h, 200).v_estimate;
    worst = std::max(worst, (v.coords - t * xi).norm() / t);
  }
  return worst;
}

Tuple psi_alpha(const PsiSpec& spec, const Eigen::VectorXd& u) {
  const GroupSpec& g = spec.base_pair.group();
  AlgebraElement da = zero_algebra(g), db = zero_algebra(g);
  for (int i = 0; i < u.size(); ++i) {
    da.coords += u(i) * spec.slice_a[i].coords;
    db.coords += u(i) * spec.slice_b[i].coords;
  }
  return make_tuple({mul(spec.base_pair.elements[0], exp_elem(da)),
                     mul(spec.base_pair.elements[1], exp_elem(db))});
}

GroupElement psi_value(const PsiSpec& spec, const Eigen::VectorXd& u) {
  const GroupSpec& g = spec.base_pair.group();
  GroupElement acc = identity(g);
  for (std::size_t j = 0; j < spec.g_words.size(); ++j) {
    Eigen::VectorXd arg;
    if (!spec.complex_mode) {
      arg = spec.epsilon * std::exp(spec.sigma[j].dot(u)) * spec.nu[j].coords;
    } else {
      std::complex<double> z =
          std::pow(spec.s0[j], spec.l_offsets[j]) *
          std::exp(std::complex<double>(spec.sigma[j].dot(u),
                                        spec.sigma_arg[j].dot(u)));
      const Eigen::MatrixXd& P = spec.prox[j].eigen_plane;
      arg = spec.epsilon *
            (P * (plane_mult(spec.prox[j], z) *
                  (P.transpose() * spec.nu[j].coords)));
    }
    acc = mul(acc, exp_elem(algebra_from_coords(g, arg)));
  }
  return acc;
}

Eigen::MatrixXd psi_jacobian_at_zero(const PsiSpec& spec, double step) {
  const int n = static_cast<int>(spec.slice_a.size());
  const GroupSpec& g = spec.base_pair.group();
  GroupElement at0 = psi_value(spec, Eigen::VectorXd::Zero(n));
  Eigen::MatrixXd J(g.algebra_dim, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    u(i) = step;
    AlgebraElement plus = log_elem(mul(inv(at0), psi_value(spec, u)));
    u(i) = -step;
    AlgebraElement minus = log_elem(mul(inv(at0), psi_value(spec, u)));
    J.col(i) = (plus.coords - minus.coords) / (2 * step);
  }
  return J;
}

namespace {

Eigen::MatrixXd assemble_omega(const PsiSpec& spec) {
  const GroupSpec& g = spec.base_pair.group();
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(
      g.algebra_dim, static_cast<int>(spec.slice_a.size()));
  for (std::size_t j = 0; j < spec.g_words.size(); ++j) {
    omega += spec.nu[j].coords * spec.sigma[j].transpose();
    if (spec.complex_mode) {
      const Eigen::MatrixXd& P = spec.prox[j].eigen_plane;
      Eigen::VectorXd jnu = P * (spec.prox[j].complex_structure *
                                 (P.transpose() * spec.nu[j].coords));
      omega += jnu * spec.sigma_arg[j].transpose();
    }
  }
  return spec.epsilon * omega;
}

}  // namespace

PsiSpec with_epsilon(PsiSpec spec, double epsilon) {
  spec.epsilon = epsilon;
  spec.omega = assemble_omega(spec);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spec.omega / spec.epsilon);
  spec.omega_sv = svd.singularValues().tail(1)(0);
  return spec;
}

PsiSpec assemble_psi(const Tuple& pair, std::uint64_t seed,
                     bool complex_mode) {
  const GroupSpec& g = pair.group();
  const int n = g.algebra_dim;
  if (!irrationality_screen(pair, 6))
    throw Error(ErrorClass::Search, "pair fails the irrationality screen");

  PsiSpec spec;
  spec.base_pair = pair;
  spec.complex_mode = complex_mode;
  spec.epsilon = 0.05;
  Rng rng = make_rng(seed);
  for (int i = 0; i < n; ++i) {
    spec.slice_a.push_back(
        algebra_from_coords(g, random_unit_vector(rng, n)));
    spec.slice_b.push_back(
        algebra_from_coords(g, random_unit_vector(rng, n)));
  }

  // Candidate proximal words and near-identity h words, shortlex order.
  ProximalKind want =
      complex_mode ? ProximalKind::C1Proximal : ProximalKind::OneProximal;
  struct Cand {
    Word w;
    GroupElement value;
    ProximalData prox;
  };
  std::vector<Cand> gs;
  std::vector<Word> hs;
  int budget = 2000;
  for_each_reduced_word(pair, 8, [&](const Word& w, const GroupElement& v) {
    if (--budget <= 0) return false;
    double d = distance_to_identity(v);
    if (d <= 0.15 && d > 1e-6 && hs.size() < 12) hs.push_back(w);
    if (gs.size() >= 24) return true;
    ProximalData p = classify_proximal(v);
    if (p.kind != want || !p.in_pi || p.degenerate) return true;
    double as = std::abs(p.s);
    if (as < 0.05 || as > 0.9) return true;
    gs.push_back({w, v, p});
    return true;
  });
  if (static_cast<int>(gs.size()) < n || hs.empty())
    throw Error(ErrorClass::Search,
                "psi assembly: candidate search budget exhausted");

  // Numeric gradients of ln|s_j| (and arg s_j) over the slice.
  const double fd = 1e-5;
  std::vector<Eigen::VectorXd> sig(gs.size()), sig_arg(gs.size());
  for (std::size_t j = 0; j < gs.size(); ++j) {
    sig[j].resize(n);
    sig_arg[j].resize(n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
      u(i) = fd;
      std::complex<double> sp =
          dominant_s(evaluate(gs[j].w, psi_alpha(spec, u)), gs[j].prox.s);
      u(i) = -fd;
      std::complex<double> sm =
          dominant_s(evaluate(gs[j].w, psi_alpha(spec, u)), gs[j].prox.s);
      sig[j](i) = (std::log(std::abs(sp)) - std::log(std::abs(sm))) / (2 * fd);
      double da = std::arg(sp / sm);
      sig_arg[j](i) = da / (2 * fd);
    }
  }

  for (const Word& hw : hs) {
    GroupElement hv = evaluate(hw, pair);
    std::vector<AlgebraElement> nus(gs.size(), zero_algebra(g));
    std::vector<bool> ok(gs.size(), false);
    for (std::size_t j = 0; j < gs.size(); ++j) {
      try {
        AlgebraElement v = run_dynamics(gs[j].value, hv, 300).v_estimate;
        if (v.norm() > 1e-8) {
          nus[j] = v;
          ok[j] = true;
        }
      } catch (const Error&) {
      }
    }
    std::vector<int> usable;
    for (std::size_t j = 0; j < gs.size(); ++j)
      if (ok[j]) usable.push_back(static_cast<int>(j));
    if (static_cast<int>(usable.size()) < n) continue;

    // Best n-subset among the leading candidates by smallest singular value.
    int K = std::min<int>(usable.size(), 10);
    std::vector<int> pick(n), best_pick;
    double best_sv = 0.0;
    std::function<void(int, int)> choose = [&](int start, int depth) {
      if (depth == n) {
        PsiSpec trial = spec;
        for (int idx : pick) {
          trial.g_words.push_back(gs[usable[idx]].w);
          trial.s0.push_back(gs[usable[idx]].prox.s);
          trial.sigma.push_back(sig[usable[idx]]);
          trial.sigma_arg.push_back(sig_arg[usable[idx]]);
          trial.nu.push_back(nus[usable[idx]]);
          trial.prox.push_back(gs[usable[idx]].prox);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(assemble_omega(trial) /
                                              trial.epsilon);
        double sv = svd.singularValues().tail(1)(0);
        if (sv > best_sv) {
          best_sv = sv;
          best_pick = pick;
        }
        return;
      }
      for (int i = start; i <= K - (n - depth); ++i) {
        pick[depth] = i;
        choose(i + 1, depth + 1);
      }
    };
    choose(0, 0);
    if (best_sv < 1e-4) continue;

    spec.h_word = hw;
    for (int idx : best_pick) {
      spec.g_words.push_back(gs[usable[idx]].w);
      spec.s0.push_back(gs[usable[idx]].prox.s);
      spec.sigma.push_back(sig[usable[idx]]);
      spec.sigma_arg.push_back(sig_arg[usable[idx]]);
      spec.nu.push_back(nus[usable[idx]]);
      spec.prox.push_back(gs[usable[idx]].prox);
    }
    spec.l_offsets.assign(spec.g_words.size(), 0);
    spec.omega = assemble_omega(spec);
    spec.omega_sv = best_sv;
    spec.accepted = true;
    return spec;
  }
  throw Error(ErrorClass::Search,
              "psi assembly: no accepted (g_1..g_n, h) combination in budget");
}

long long m_jk(const PsiSpec& spec, int j, int k) {
  double v = spec.epsilon * std::pow(std::abs(spec.s0[j]), -k);
  if (v > 9e18)
    throw Error(ErrorClass::Size, "m_jk overflows the integer range");
  return static_cast<long long>(std::floor(v));
}

GroupElement omega_k_value(const PsiSpec& spec, int k, const Tuple& pair_u) {
  const GroupSpec& g = spec.base_pair.group();
  GroupElement h = evaluate(spec.h_word, pair_u);
  GroupElement acc = identity(g);
  for (std::size_t j = 0; j < spec.g_words.size(); ++j) {
    GroupElement gj = evaluate(spec.g_words[j], pair_u);
    GroupElement w = h;
    for (int i = 0; i < k; ++i) w = comm(gj, w);
    acc = mul(acc, GroupElement{&g, power_matrix(w.m, m_jk(spec, j, k))});
  }
  return acc;
}

std::vector<PsiConvergence> verify_psi_limit(const PsiSpec& spec,
                                             const std::vector<int>& k_list,
                                             int grid_per_axis, double delta) {
  if (!spec.accepted)
    throw Error(ErrorClass::Usage, "verify_psi_limit needs an accepted spec");
  const int n = static_cast<int>(spec.slice_a.size());
  std::vector<Eigen::VectorXd> grid;
  std::vector<int> idx(n, 0);
  for (;;) {
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i)
      u(i) = grid_per_axis == 1
                 ? 0.0
                 : -delta + 2.0 * delta * idx[i] / (grid_per_axis - 1);
    grid.push_back(u);
    int i = 0;
    while (i < n && ++idx[i] == grid_per_axis) idx[i++] = 0;
    if (i == n) break;
  }
  std::vector<PsiConvergence> out;
  for (int k : k_list) {
    PsiConvergence row;
    row.k = k;
    row.numeric_realization = true;
    for (const auto& u : grid) {
      Tuple pu = psi_alpha(spec, u / static_cast<double>(k));
      double err =
          (omega_k_value(spec, k, pu).m - psi_value(spec, u).m).norm();
      row.sup_error = std::max(row.sup_error, err);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<int> select_k_subsequence(const PsiSpec& spec, int count,
                                      int k_max) {
  std::vector<int> ks;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max && static_cast<int>(ks.size()) < count; ++k) {
    double score = 0.0;
    for (const auto& s : spec.s0) {
      double phase = std::fmod(k * std::arg(s), 2 * M_PI);
      if (phase < 0) phase += 2 * M_PI;
      score = std::max(score, std::min(phase, 2 * M_PI - phase));
    }
    if (score < best) {
      best = score;
      ks.push_back(k);
    }
  }
  return ks;
}

}  // namespace lieforge
