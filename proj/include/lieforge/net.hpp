#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lieforge/word.hpp"

namespace lieforge {

struct BallRegion {
  GroupElement center;
  double radius = 1.0;
};

struct NetEntry {
  Word word;
  GroupElement value;
  Eigen::VectorXd chart;  // log coordinates around the region center
};

struct NetValidation {
  int samples = 0;
  double coverage_fraction = 0.0;  // fraction within claimed_radius
  double defect_rate = 0.0;
  double max_entry_excess = 0.0;   // max distance of entries beyond the region
  double max_derivative_norm = 0.0;  // empirical, over sampled net words
};

struct WordNet {
  Tuple tuple;
  BallRegion region;
  double claimed_radius = 0.0;  // measured covering radius
  int max_word_length = 0;
  bool degenerate = false;
  bool partial = false;  // budget exhausted above the target radius
  std::uint64_t seed = 0;
  std::vector<NetEntry> entries;
  NetValidation validation;
};

struct NearestResult {
  int index = -1;
  double dist = 0.0;
  const Word& word(const WordNet& net) const { return net.entries[index].word; }
};

// Depth-first shortlex enumeration of nonempty reduced words with
// incremental evaluation; the callback may return false to stop early.
bool for_each_reduced_word(
    const Tuple& t, int max_len,
    const std::function<bool(const Word&, const GroupElement&)>& fn);
// No value of a nonempty reduced word of length <= max_len falls within
// tol of the identity.
bool irrationality_screen(const Tuple& t, int max_len = 8, double tol = 1e-8);

WordNet build_base_net(const Tuple& t, int max_len, const BallRegion& region,
                       double target_delta, std::uint64_t seed);

NearestResult nearest(const WordNet& net, const GroupElement& target);

WordNet compose_nets(const WordNet& outer, const WordNet& inner,
                     std::uint64_t seed);

void save_net(const WordNet& net, const std::string& path);
WordNet load_net(const std::string& path, const Tuple& expected_tuple);

// Stable digest of tuple matrices, used as the cache key component.
std::uint64_t tuple_hash(const Tuple& t);

// Uniform sample of the region (log-chart ball around the center).
GroupElement sample_region(const BallRegion& region, Rng& rng);

}  // namespace lieforge
