#pragma once
#include <vector>
#include "lieforge/commutator.hpp"
#include "lieforge/net.hpp"
namespace lieforge {

// Level-indexed refinement state. delta[m-1] and length_cap[m-1] are the
// measured accuracy and exact length majorant of level m.
struct SKLevelState {
  SKMode mode = SKMode::Weak;
  Tuple pair;
  WordNet base;
  RootDecomposition rd;
  double c_prime = 0.0;   // 1.2 x calibrated commutator constant
  double c_dprime = 0.0;  // calibrated contraction constant
  std::vector<double> delta;
  std::vector<long long> length_cap;
  std::vector<int> omega_tilde1;  // near-identity entries of the base net
  bool degenerate = false;
  int levels() const { return static_cast<int>(delta.size()); }
};

struct ApproxResult {
  Word word;
  double achieved_dist = 0.0;
  bool regime_fallback = false;
};

struct RateLevel {
  int m = 0;
  long long l_m = 0;
  double max_err = 0.0;
  double median_err = 0.0;
};

struct RateReport {
  SKMode mode = SKMode::Weak;
  std::vector<RateLevel> levels;
  double kappa_hat = 0.0;
  double kappa_stderr = 0.0;
  double c_hat = 0.0;
  double kappa_theory = 0.0;
  bool pass = false;
  int samples = 0;
  double runtime_seconds = 0.0;
};

SKLevelState init_levels(const WordNet& base, SKMode mode,
                         const CalibrationRecord& cal, std::uint64_t seed);
// Adds one level; measures delta_{m+1} by descent on random targets.
void refine_level(SKLevelState& state, int targets = 500,
                  std::uint64_t seed = 0);
ApproxResult approximate(const SKLevelState& state, const GroupElement& target,
                         int depth);
RateReport rate_report(const SKLevelState& state, int samples,
                       std::uint64_t seed);
// Fit kappa and c for a given error curve (exposed for synthetic-data tests).
RateReport fit_rate(const std::vector<RateLevel>& levels, SKMode mode);

}  // namespace lieforge
