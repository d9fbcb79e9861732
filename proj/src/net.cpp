#include "lieforge/net.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace lieforge {

namespace {

using json = nlohmann::json;

constexpr const char* kNetFormatVersion = "lieforge-net-v1";

// Chart coordinates around the region center, falling back to flattened
// matrix entries outside the chart.
Eigen::VectorXd chart_coords(const BallRegion& region, const GroupElement& v) {
  GroupElement rel = mul(inv(region.center), v);
  if (in_principal_chart(rel)) {
    Eigen::MatrixXcd L = rel.m.log();
    double res = 0;
    AlgebraElement x = to_algebra(*v.group, L, &res);
    if (res <= 1e-8) return x.coords;
  }
  const auto& m = v.m;
  Eigen::VectorXd flat(2 * m.size());
  for (int i = 0; i < m.size(); ++i) {
    flat(2 * i) = m.data()[i].real();
    flat(2 * i + 1) = m.data()[i].imag();
  }
  return flat;
}

}  // namespace

bool for_each_reduced_word(const Tuple& t, int max_len,
                           const std::function<bool(const Word&,
                                                    const GroupElement&)>& fn) {
  const int M = t.size();
  std::vector<int> letters;
  std::vector<GroupElement> values{identity(t.group())};
  std::vector<int> letter_order;
  for (int s = 1; s <= M; ++s) {
    letter_order.push_back(s);
    letter_order.push_back(-s);
  }
  std::function<bool()> rec = [&]() -> bool {
    if (!letters.empty() && !fn(Word{letters, M}, values.back())) return false;
    if (static_cast<int>(letters.size()) == max_len) return true;
    for (int l : letter_order) {
      if (!letters.empty() && letters.back() == -l) continue;
      const GroupElement& gen = t.elements[std::abs(l) - 1];
      letters.push_back(l);
      values.push_back(l > 0 ? mul(values[values.size() - 1], gen)
                             : mul(values[values.size() - 1], inv(gen)));
      bool keep_going = rec();
      letters.pop_back();
      values.pop_back();
      if (!keep_going) return false;
    }
    return true;
  };
  return rec();
}

namespace {

// Spatial hash over the first <=3 chart coordinates.
class DedupGrid {
 public:
  DedupGrid(double cell) : cell_(std::max(cell, 1e-12)) {}

  std::int64_t key(const Eigen::VectorXd& c) const {
    std::int64_t k = 1469598103934665603LL;
    for (int i = 0; i < std::min<int>(3, c.size()); ++i) {
      auto q = static_cast<std::int64_t>(std::floor(c(i) / cell_));
      k = (k ^ q) * 1099511628211LL;
    }
    return k;
  }

  // All indices in the cells adjacent to c.
  void neighbors(const Eigen::VectorXd& c, std::vector<int>& out) const {
    out.clear();
    int dims = std::min<int>(3, c.size());
    int count = 1;
    for (int i = 0; i < dims; ++i) count *= 3;
    for (int pattern = 0; pattern < count; ++pattern) {
      Eigen::VectorXd shifted = c;
      int p = pattern;
      for (int i = 0; i < dims; ++i) {
        shifted(i) += cell_ * ((p % 3) - 1);
        p /= 3;
      }
      auto it = cells_.find(key(shifted));
      if (it != cells_.end())
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }

  void insert(const Eigen::VectorXd& c, int index) {
    cells_[key(c)].push_back(index);
  }

 private:
  double cell_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

struct Percentiles {
  double p99 = 0.0;
  double max = 0.0;
};

Percentiles nearest_distance_percentiles(const WordNet& net, Rng& rng,
                                         int samples) {
  std::vector<double> dists(samples);
  BallRegion region = net.region;
  for (int i = 0; i < samples; ++i) {
    GroupElement x = sample_region(region, rng);
    dists[i] = nearest(net, x).dist;
  }
  std::sort(dists.begin(), dists.end());
  Percentiles p;
  p.max = dists.back();
  p.p99 = dists[static_cast<std::size_t>(std::ceil(0.99 * samples)) - 1];
  return p;
}

double empirical_derivative_norm(const WordNet& net, int budget = 100) {
  if (net.entries.empty()) return 0.0;
  const auto& t = net.tuple;
  const GroupSpec& g = t.group();
  double best = 0.0;
  std::size_t stride = std::max<std::size_t>(1, net.entries.size() / budget);
  for (std::size_t e = 0; e < net.entries.size(); e += stride) {
    for (int comp = 0; comp < t.size(); ++comp)
      for (int b = 0; b < g.algebra_dim; ++b) {
        std::vector<AlgebraElement> dir(t.size(), zero_algebra(g));
        dir[comp].coords(b) = 1.0;
        best = std::max(best,
                        word_derivative(net.entries[e].word, t, dir).norm());
      }
  }
  return best;
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& rows) {
  int nr = rows.size(), nc = rows.at(0).size();
  Eigen::MatrixXcd m(nr, nc);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      m(i, j) = std::complex<double>(rows[i][j][0].get<double>(),
                                     rows[i][j][1].get<double>());
  return m;
}

}  // namespace

GroupElement sample_region(const BallRegion& region, Rng& rng) {
  AlgebraElement v = random_algebra(*region.center.group, rng, region.radius);
  return mul(region.center, exp_elem(v));
}

std::uint64_t tuple_hash(const Tuple& t) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    for (const char* p = buf; *p; ++p) h = (h ^ std::uint64_t(*p)) * 1099511628211ULL;
  };
  for (const auto& e : t.elements)
    for (int i = 0; i < e.m.size(); ++i) {
      mix(e.m.data()[i].real());
      mix(e.m.data()[i].imag());
    }
  return h;
}

bool irrationality_screen(const Tuple& t, int max_len, double tol) {
  bool clean = for_each_reduced_word(
      t, max_len, [&](const Word&, const GroupElement& v) {
        return distance_to_identity(v) > tol;
      });
  return clean;
}

WordNet build_base_net(const Tuple& t, int max_len, const BallRegion& region,
                       double target_delta, std::uint64_t seed) {
  if (max_len > 20)
    throw Error(ErrorClass::Usage, "max_len above the supported budget of 20");
  const int M = t.size();

  WordNet net;
  net.tuple = t;
  net.region = region;
  net.seed = seed;
  net.max_word_length = max_len;

  bool all_identity = true;
  for (const auto& e : t.elements)
    if (distance_to_identity(e) > 1e-12) all_identity = false;
  if (all_identity) {
    net.degenerate = true;
    net.partial = true;
    net.claimed_radius = region.radius;
    net.entries.push_back(
        {Word{{}, M}, identity(t.group()), chart_coords(region, identity(t.group()))});
    return net;
  }

  if (!irrationality_screen(t, std::min(8, max_len)))
    throw Error(ErrorClass::Search,
                "reducible pair: short relation found by the screen");

  const double keep_slack = target_delta;
  const double dedup_radius = target_delta / 4.0;
  DedupGrid grid(dedup_radius);
  std::vector<int> neigh;

  // Identity (empty word) is always a net entry.
  net.entries.push_back(
      {Word{{}, M}, identity(t.group()), chart_coords(region, identity(t.group()))});
  grid.insert(net.entries[0].chart, 0);

  for_each_reduced_word(t, max_len, [&](const Word& candidate,
                                        const GroupElement& v) {
    if (distance(region.center, v) > region.radius + keep_slack) return true;
    Eigen::VectorXd chart = chart_coords(region, v);
    grid.neighbors(chart, neigh);
    int collide = -1;
    double best = dedup_radius;
    for (int idx : neigh) {
      double d = distance(net.entries[idx].value, v);
      if (d <= best) {
        best = d;
        collide = idx;
      }
    }
    Word w = candidate;
    if (collide >= 0) {
      if (shortlex_less(w, net.entries[collide].word)) {
        net.entries[collide].word = std::move(w);
        net.entries[collide].value = v;
        net.entries[collide].chart = std::move(chart);
      }
      return true;
    }
    int index = static_cast<int>(net.entries.size());
    net.entries.push_back({std::move(w), v, chart});
    grid.insert(net.entries.back().chart, index);
    return true;
  });

  Rng rng = make_rng(seed);
  Percentiles p = nearest_distance_percentiles(net, rng, 10000);
  net.claimed_radius = p.p99;
  net.partial = net.claimed_radius > target_delta;
  net.validation.samples = 10000;
  net.validation.coverage_fraction = 0.99;
  net.validation.defect_rate = 0.01;
  double excess = 0.0;
  for (const auto& e : net.entries)
    excess = std::max(excess,
                      distance(region.center, e.value) - region.radius);
  net.validation.max_entry_excess = std::max(0.0, excess);
  net.validation.max_derivative_norm = empirical_derivative_norm(net);
  return net;
}

NearestResult nearest(const WordNet& net, const GroupElement& target) {
  if (net.entries.empty()) throw Error(ErrorClass::Usage, "empty net");
  NearestResult best;
  best.dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < net.entries.size(); ++i) {
    double d = distance(net.entries[i].value, target);
    if (d < best.dist ||
        (d == best.dist && best.index >= 0 &&
         shortlex_less(net.entries[i].word, net.entries[best.index].word))) {
      best.dist = d;
      best.index = static_cast<int>(i);
    }
  }
  return best;
}

WordNet compose_nets(const WordNet& outer, const WordNet& inner,
                     std::uint64_t seed) {
  if (tuple_hash(outer.tuple) != tuple_hash(inner.tuple))
    throw Error(ErrorClass::Usage, "compose_nets: different tuples");
  if (distance_to_identity(inner.region.center) > 1e-9)
    throw Error(ErrorClass::Usage,
                "compose_nets: inner region must be centered at identity");
  if (std::abs(inner.region.radius - outer.claimed_radius) >
      0.2 * outer.claimed_radius + 1e-12)
    throw Error(ErrorClass::Usage,
                "compose_nets: inner region radius must match outer accuracy");

  WordNet out;
  out.tuple = outer.tuple;
  out.region = outer.region;
  out.seed = seed;
  out.max_word_length = outer.max_word_length + inner.max_word_length;

  double keep_slack = std::max(inner.claimed_radius, 1e-6);
  DedupGrid grid(keep_slack / 4.0);
  std::vector<int> neigh;
  for (const auto& oe : outer.entries)
    for (const auto& ie : inner.entries) {
      GroupElement v = mul(oe.value, ie.value);
      if (distance(out.region.center, v) > out.region.radius + keep_slack)
        continue;
      Word w = concat(oe.word, ie.word);
      Eigen::VectorXd chart = chart_coords(out.region, v);
      grid.neighbors(chart, neigh);
      int collide = -1;
      double best = keep_slack / 4.0;
      for (int idx : neigh) {
        double d = distance(out.entries[idx].value, v);
        if (d <= best) {
          best = d;
          collide = idx;
        }
      }
      if (collide >= 0) {
        if (shortlex_less(w, out.entries[collide].word)) {
          out.entries[collide].word = std::move(w);
          out.entries[collide].value = v;
          out.entries[collide].chart = std::move(chart);
        }
        continue;
      }
      int index = static_cast<int>(out.entries.size());
      out.entries.push_back({std::move(w), v, chart});
      grid.insert(out.entries.back().chart, index);
    }

  Rng rng = make_rng(seed);
  Percentiles p = nearest_distance_percentiles(out, rng, 10000);
  out.claimed_radius = p.p99;
  out.validation.samples = 10000;
  out.validation.coverage_fraction = 0.99;
  out.validation.defect_rate = 0.01;
  out.validation.max_derivative_norm = empirical_derivative_norm(out);
  return out;
}

void save_net(const WordNet& net, const std::string& path) {
  json j;
  j["version"] = kNetFormatVersion;
  j["group"] = net.tuple.group().id;
  j["tuple_hash"] = tuple_hash(net.tuple);
  j["tuple"] = json::array();
  for (const auto& e : net.tuple.elements) j["tuple"].push_back(matrix_to_json(e.m));
  j["region_center"] = matrix_to_json(net.region.center.m);
  j["region_radius"] = net.region.radius;
  j["claimed_radius"] = net.claimed_radius;
  j["max_word_length"] = net.max_word_length;
  j["degenerate"] = net.degenerate;
  j["partial"] = net.partial;
  j["seed"] = net.seed;
  j["validation"] = {{"samples", net.validation.samples},
                     {"coverage_fraction", net.validation.coverage_fraction},
                     {"defect_rate", net.validation.defect_rate},
                     {"max_entry_excess", net.validation.max_entry_excess},
                     {"max_derivative_norm", net.validation.max_derivative_norm}};
  json entries = json::array();
  for (const auto& e : net.entries)
    entries.push_back({{"word", e.word.letters}, {"matrix", matrix_to_json(e.value.m)}});
  j["entries"] = std::move(entries);
  std::ofstream f(path);
  if (!f) throw Error(ErrorClass::Usage, "cannot write " + path);
  f << j.dump() << "\n";
}

WordNet load_net(const std::string& path, const Tuple& expected_tuple) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorClass::Integrity, "cannot read " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorClass::Integrity,
                std::string("corrupt net cache: ") + e.what());
  }
  if (j.value("version", "") != kNetFormatVersion)
    throw Error(ErrorClass::Migration,
                "net cache version mismatch: " + j.value("version", "?"));
  if (j.at("tuple_hash").get<std::uint64_t>() != tuple_hash(expected_tuple))
    throw Error(ErrorClass::Integrity,
                "net cache was built for a different tuple");

  WordNet net;
  net.tuple = expected_tuple;
  const GroupSpec& g = expected_tuple.group();
  net.region.center = {&g, matrix_from_json(j.at("region_center"))};
  net.region.radius = j.at("region_radius").get<double>();
  net.claimed_radius = j.at("claimed_radius").get<double>();
  net.max_word_length = j.at("max_word_length").get<int>();
  net.degenerate = j.at("degenerate").get<bool>();
  net.partial = j.at("partial").get<bool>();
  net.seed = j.at("seed").get<std::uint64_t>();
  const auto& val = j.at("validation");
  net.validation.samples = val.at("samples").get<int>();
  net.validation.coverage_fraction = val.at("coverage_fraction").get<double>();
  net.validation.defect_rate = val.at("defect_rate").get<double>();
  net.validation.max_entry_excess = val.at("max_entry_excess").get<double>();
  net.validation.max_derivative_norm = val.at("max_derivative_norm").get<double>();
  for (const auto& je : j.at("entries")) {
    NetEntry e;
    e.word = Word{je.at("word").get<std::vector<int>>(), expected_tuple.size()};
    e.value = {&g, matrix_from_json(je.at("matrix"))};
    e.chart = chart_coords(net.region, e.value);
    net.entries.push_back(std::move(e));
  }
  return net;
}

}  // namespace lieforge
