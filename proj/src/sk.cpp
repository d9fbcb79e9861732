#include "lieforge/sk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lieforge {

namespace {

int branch_factor(SKMode mode) { return mode == SKMode::Weak ? 9 : 5; }

}  // namespace

SKLevelState init_levels(const WordNet& base, SKMode mode,
                         const CalibrationRecord& cal, std::uint64_t seed) {
  SKLevelState st;
  st.mode = mode;
  st.pair = base.tuple;
  st.base = base;
  st.c_prime =
      1.2 * (mode == SKMode::Weak ? cal.c_weak : cal.c_strong);
  st.c_dprime = cal.c_contraction;
  st.degenerate = base.degenerate;

  double d1 = base.claimed_radius;
  if (!st.degenerate && st.c_dprime * std::pow(d1, 1.5) >= d1)
    throw Error(ErrorClass::Regime,
                "base accuracy too coarse for contraction; build a longer "
                "base net (need c'' * sqrt(delta) < 1)");
  st.delta.push_back(d1);
  long long l1 = 0;
  for (const auto& e : base.entries)
    l1 = std::max<long long>(l1, e.word.length());
  st.length_cap.push_back(std::max<long long>(l1, 1));

  double ball = 2.0 * st.c_prime * std::sqrt(d1);
  for (std::size_t i = 0; i < base.entries.size(); ++i)
    if (distance_to_identity(base.entries[i].value) <= ball)
      st.omega_tilde1.push_back(static_cast<int>(i));

  if (!st.degenerate) {
    st.rd = root_decompose(base.tuple.group(), seed);
    find_splitting_element(st.rd, seed + 1);
  }
  return st;
}

ApproxResult approximate(const SKLevelState& st, const GroupElement& target,
                         int depth) {
  if (depth < 1 || depth > st.levels())
    throw Error(ErrorClass::Usage, "approximate: depth outside built levels");
  if (depth == 1 || st.degenerate) {
    NearestResult nr = nearest(st.base, target);
    return {st.base.entries[nr.index].word, nr.dist, false};
  }
  ApproxResult coarse = approximate(st, target, depth - 1);
  GroupElement w_val = evaluate(coarse.word, st.pair);
  GroupElement residual = mul(inv(w_val), target);
  double r = distance_to_identity(residual);
  if (r < 1e-13) {
    coarse.achieved_dist = distance(w_val, target);
    return coarse;
  }
  if (r > 0.3) {
    NearestResult nr = nearest(st.base, target);
    return {st.base.entries[nr.index].word, nr.dist, true};
  }
  CommutatorFactorization f =
      group_commutator_factor(st.rd, residual, st.mode);
  const GroupSpec& g = st.pair.group();
  // Newton-polish the factor pairs so the intended group commutator product
  // matches the residual exactly; the plain algebra solve leaves a BCH
  // remainder ~ c|r|^{3/2} that would otherwise cap the refinement.
  {
    const int P = static_cast<int>(f.pairs.size());
    const int n = g.algebra_dim;
    std::vector<Eigen::VectorXd> th(2 * P);
    for (int p = 0; p < P; ++p) {
      th[2 * p] = log_elem(f.pairs[p].first).coords;
      th[2 * p + 1] = log_elem(f.pairs[p].second).coords;
    }
    auto defect = [&](const std::vector<Eigen::VectorXd>& t) {
      GroupElement prod = identity(g);
      for (int p = 0; p < P; ++p)
        prod = mul(prod, comm(exp_elem(algebra_from_coords(g, t[2 * p])),
                              exp_elem(algebra_from_coords(g, t[2 * p + 1]))));
      return log_elem(mul(inv(residual), prod)).coords.eval();
    };
    try {
      Eigen::VectorXd F = defect(th);
      const double fd = 1e-6;
      for (int it = 0; it < 8 && F.norm() > 1e-12; ++it) {
        Eigen::MatrixXd J(n, 2 * P * n);
        for (int c = 0; c < 2 * P; ++c)
          for (int b = 0; b < n; ++b) {
            auto tp = th;
            tp[c](b) += fd;
            J.col(c * n + b) = (defect(tp) - F) / fd;
          }
        Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-F);
        double t = 1.0;
        for (int half = 0; half < 20; ++half, t *= 0.5) {
          auto tp = th;
          for (int c = 0; c < 2 * P; ++c) tp[c] += t * step.segment(c * n, n);
          Eigen::VectorXd F2 = defect(tp);
          if (F2.norm() < F.norm()) {
            th = std::move(tp);
            F = std::move(F2);
            break;
          }
        }
      }
      if (F.norm() < distance_to_identity(residual))
        for (int p = 0; p < P; ++p)
          f.pairs[p] = {exp_elem(algebra_from_coords(g, th[2 * p])),
                        exp_elem(algebra_from_coords(g, th[2 * p + 1]))};
    } catch (const Error&) {
    }
  }
  Word word = coarse.word;
  // Realized part values so later parts can be re-targeted against the
  // approximation error already committed by earlier ones.
  GroupElement pending = residual;
  bool first_part = true;
  for (const auto& [X, Y] : f.pairs) {
    // Intended bracket for this part; later parts target what earlier
    // realized parts left over (their committed error included).
    AlgebraElement zi = bracket(log_elem(X), log_elem(Y));
    if (!first_part) {
      try {
        zi = log_elem(pending);
      } catch (const Error&) {
      }
    }
    first_part = false;
    Word wx = approximate(st, X, depth - 1).word;
    GroupElement xv = evaluate(wx, st.pair);
    // Re-solve the bracket against the realized X word so its approximation
    // error is absorbed into the choice of Y instead of compounding.
    GroupElement Yt = Y;
    try {
      AlgebraElement xt = log_elem(xv);
      Eigen::VectorXd yc =
          ad(xt).completeOrthogonalDecomposition().solve(zi.coords);
      if ((ad(xt) * yc - zi.coords).norm() <= 0.2 * zi.norm())
        Yt = exp_elem(algebra_from_coords(g, yc));
    } catch (const Error&) {
    }
    Word wy;
    if (depth - 1 == 1) {
      // At the base level, pick Y among the nearest net entries by the
      // error of the realized bracket, not by distance to Y alone.
      GroupElement want = exp_elem(zi);
      std::vector<std::pair<double, int>> cand;
      cand.reserve(st.base.entries.size());
      for (std::size_t i = 0; i < st.base.entries.size(); ++i)
        cand.emplace_back(distance(st.base.entries[i].value, Yt),
                          static_cast<int>(i));
      const int K = std::min<int>(12, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + K, cand.end());
      double best = std::numeric_limits<double>::infinity();
      int pick = cand[0].second;
      for (int c = 0; c < K; ++c) {
        const GroupElement& yv = st.base.entries[cand[c].second].value;
        double err = distance(comm(xv, yv), want);
        if (err < best) {
          best = err;
          pick = cand[c].second;
        }
      }
      wy = st.base.entries[pick].word;
    } else {
      wy = approximate(st, Yt, depth - 1).word;
    }
    GroupElement yv = evaluate(wy, st.pair);
    pending = mul(inv(comm(xv, yv)), pending);
    word = concat(word, commutator_word(wx, wy));
  }
  word = reduce(word.letters, word.alphabet);
  ApproxResult out;
  out.achieved_dist = distance(evaluate(word, st.pair), target);
  out.word = std::move(word);
  if (out.achieved_dist > coarse.achieved_dist) return coarse;
  return out;
}

void refine_level(SKLevelState& st, int targets, std::uint64_t seed) {
  int m = st.levels();
  if (st.degenerate) {
    st.delta.push_back(st.delta.back());
    st.length_cap.push_back(st.length_cap.back());
    return;
  }
  long long cap = branch_factor(st.mode) * st.length_cap.back();
  Rng rng = make_rng(seed + 7919 * m);
  double worst = 0.0;
  const GroupSpec& g = st.pair.group();
  // Provisional level so descent can recurse to depth m+1.
  st.delta.push_back(st.delta.back());
  st.length_cap.push_back(cap);
  for (int i = 0; i < targets; ++i) {
    GroupElement target = random_element(g, rng, st.base.region.radius);
    ApproxResult res = approximate(st, target, m + 1);
    if (static_cast<long long>(res.word.length()) > cap) {
      st.delta.pop_back();
      st.length_cap.pop_back();
      throw Error(ErrorClass::Integrity, "length majorant violated");
    }
    worst = std::max(worst, res.achieved_dist);
  }
  if (worst >= st.delta[m - 1]) {
    double prev = st.delta[m - 1];
    st.delta.pop_back();
    st.length_cap.pop_back();
    throw Error(ErrorClass::Stagnation,
                "refinement stagnated: delta_" + std::to_string(m + 1) + " = " +
                    std::to_string(worst) + " >= delta_" + std::to_string(m) +
                    " = " + std::to_string(prev));
  }
  st.delta[m] = worst;
}

RateReport fit_rate(const std::vector<RateLevel>& levels, SKMode mode) {
  RateReport rep;
  rep.mode = mode;
  rep.levels = levels;
  rep.kappa_theory =
      mode == SKMode::Weak ? std::log(1.5) / std::log(9.0)
                           : std::log(1.5) / std::log(5.0);
  // Fit log(-log err) = kappa * log l + b over levels with err in (0, 1).
  std::vector<double> xs, ys;
  for (const auto& lv : levels)
    if (lv.max_err > 1e-15 && lv.max_err < 1.0) {
      xs.push_back(std::log(static_cast<double>(lv.l_m)));
      ys.push_back(std::log(-std::log(lv.max_err)));
    }
  int n = static_cast<int>(xs.size());
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    rep.kappa_hat = (n * sxy - sx * sy) / denom;
    double b = (sy - rep.kappa_hat * sx) / n;
    if (n > 2) {
      double ss = 0;
      for (int i = 0; i < n; ++i) {
        double e = ys[i] - (rep.kappa_hat * xs[i] + b);
        ss += e * e;
      }
      rep.kappa_stderr = std::sqrt(ss / (n - 2) / (sxx - sx * sx / n));
    }
  }
  // Largest single c with err_m <= exp(-(c l_m)^kappa) at the theory kappa.
  double c = std::numeric_limits<double>::infinity();
  for (const auto& lv : levels) {
    if (lv.max_err >= 1.0) {
      c = 0.0;
      break;
    }
    double err = std::max(lv.max_err, 1e-300);
    c = std::min(c, std::pow(-std::log(err), 1.0 / rep.kappa_theory) /
                        static_cast<double>(lv.l_m));
  }
  rep.c_hat = std::isfinite(c) ? c : 0.0;
  rep.pass = rep.c_hat > 0.0;
  for (const auto& lv : levels)
    if (lv.max_err >
        std::exp(-std::pow(rep.c_hat * static_cast<double>(lv.l_m),
                           rep.kappa_theory)) *
            (1.0 + 1e-9))
      rep.pass = false;
  return rep;
}

RateReport rate_report(const SKLevelState& st, int samples,
                       std::uint64_t seed) {
  if (st.levels() < 2)
    throw Error(ErrorClass::Usage, "rate_report needs at least 2 levels");
  auto t0 = std::chrono::steady_clock::now();
  const GroupSpec& g = st.pair.group();
  std::vector<RateLevel> levels;
  for (int m = 1; m <= st.levels(); ++m) {
    Rng rng = make_rng(seed);  // same targets at every level
    std::vector<double> errs(samples);
    for (int i = 0; i < samples; ++i) {
      GroupElement target = random_element(g, rng, st.base.region.radius);
      errs[i] = approximate(st, target, m).achieved_dist;
    }
    std::sort(errs.begin(), errs.end());
    RateLevel lv;
    lv.m = m;
    lv.l_m = st.length_cap[m - 1];
    lv.max_err = errs.back();
    lv.median_err = errs[samples / 2];
    levels.push_back(lv);
  }
  RateReport rep = fit_rate(levels, st.mode);
  rep.samples = samples;
  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace lieforge
