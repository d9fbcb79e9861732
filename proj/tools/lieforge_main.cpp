#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lieforge/commutator.hpp"
#include "lieforge/dynamics.hpp"
#include "lieforge/net.hpp"
#include "lieforge/relation.hpp"
#include "lieforge/sk.hpp"

using json = nlohmann::json;
using namespace lieforge;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (f.get(c)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  return h;
}

struct Manifest {
  json config;
  std::map<std::string, double> phase_seconds;
  std::vector<std::string> outputs;

  void write(const std::string& out_path) const {
    if (out_path.empty()) return;
    json j;
    j["tool"] = "lieforge";
    j["format"] = "lieforge-manifest-v1";
    j["config"] = config;
    j["phase_seconds"] = phase_seconds;
    json files = json::array();
    for (const auto& p : outputs) {
      char d[24];
      std::snprintf(d, sizeof d, "%016llx",
                    static_cast<unsigned long long>(file_digest(p)));
      files.push_back({{"path", p}, {"digest", d}});
    }
    j["outputs"] = files;
    std::ofstream f(out_path + ".manifest.json");
    f << j.dump(2) << "\n";
  }
};

class Phase {
 public:
  Phase(Manifest& m, std::string name)
      : m_(m), name_(std::move(name)),
        t0_(std::chrono::steady_clock::now()) {}
  ~Phase() {
    m_.phase_seconds[name_] +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
            .count();
  }

 private:
  Manifest& m_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

Tuple seeded_pair(const GroupSpec& g, std::uint64_t pair_seed) {
  Rng rng = make_rng(pair_seed * 0x9e3779b97f4a7c15ULL + 1);
  GroupElement a = random_element(g, rng, 1.0);
  GroupElement b = random_element(g, rng, 1.0);
  return make_tuple({a, b});
}

std::string cache_path(const std::string& dir, const std::string& group,
                       std::uint64_t pair_seed, int max_len, double delta,
                       std::uint64_t seed) {
  std::ostringstream os;
  os << dir << "/net-" << group << "-p" << pair_seed << "-l" << max_len
     << "-d" << fmt(delta) << "-s" << seed << ".json";
  return os.str();
}

WordNet build_or_load_net(Manifest& man, const std::string& cache_dir,
                          const std::string& group, std::uint64_t pair_seed,
                          const Tuple& pair, int max_len, double radius,
                          double delta, std::uint64_t seed) {
  std::string path;
  if (!cache_dir.empty()) {
    path = cache_path(cache_dir, group, pair_seed, max_len, delta, seed);
    std::ifstream probe(path);
    if (probe.good()) {
      Phase ph(man, "net-load");
      return load_net(path, pair);
    }
  }
  Phase ph(man, "net-build");
  WordNet net = build_base_net(pair, max_len,
                               {identity(pair.group()), radius}, delta, seed);
  if (!path.empty()) save_net(net, path);
  return net;
}

int default_max_len(const std::string& group) {
  if (group == "su2") return 12;
  if (group == "so3") return 10;
  return 10;
}

SKLevelState build_engine(Manifest& man, const std::string& cache_dir,
                          const std::string& group, std::uint64_t pair_seed,
                          int levels, SKMode mode, std::uint64_t seed,
                          int max_len, double delta, int refine_targets) {
  const GroupSpec& g = GroupSpec::by_id(group);
  Tuple pair = seeded_pair(g, pair_seed);
  WordNet net = build_or_load_net(man, cache_dir, group, pair_seed, pair,
                                  max_len, 1.0, delta, seed);
  CalibrationRecord cal;
  {
    Phase ph(man, "calibrate");
    cal = calibrate(g, seed + 11, 200);
  }
  Phase ph(man, "refine");
  SKLevelState st = init_levels(net, mode, cal, seed + 23);
  for (int m = 1; m < levels; ++m) refine_level(st, refine_targets, seed + m);
  return st;
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorClass::Usage, "cannot write " + path);
  for (const auto& l : lines) f << l << "\n";
}

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lieforge: word approximation and relation experiments on "
               "matrix Lie groups"};
  app.set_config("--config", "", "flat key=value config file; flags win");
  app.require_subcommand(1);

  std::string group = "su2", out, cache_dir, mode_name = "weak";
  std::uint64_t pair_seed = 7, seed = 1;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  app.add_option("--threads", threads, "thread budget for parallel sections");

  auto add_common = [&](CLI::App* sub, bool with_pair) {
    sub->add_option("--group", group,
                    "group id: su2, so3, sl2r, sl3r, aff1");
    sub->add_option("--seed", seed, "search/measurement seed");
    sub->add_option("--out", out, "output file");
    sub->add_option("--cache-dir", cache_dir, "net cache directory");
    if (with_pair)
      sub->add_option("--pair-seed", pair_seed, "base pair seed");
  };

  // net
  auto* c_net = app.add_subcommand("net", "build and store a base word net");
  int max_len = 0;
  double radius = 1.0, target_delta = 0.1;
  add_common(c_net, true);
  c_net->add_option("--max-len", max_len, "maximum word length");
  c_net->add_option("--radius", radius, "region radius around identity");
  c_net->add_option("--target-delta", target_delta, "target covering radius");

  // approx
  auto* c_approx = app.add_subcommand("approx", "recursive word approximation");
  int levels = 3, targets = 50, refine_targets = 120;
  add_common(c_approx, true);
  c_approx->add_option("--mode", mode_name, "weak or strong");
  c_approx->add_option("--levels", levels, "refinement levels");
  c_approx->add_option("--targets", targets, "random targets to approximate");
  c_approx->add_option("--max-len", max_len, "base net word length");
  c_approx->add_option("--target-delta", target_delta, "base net accuracy");
  c_approx->add_option("--refine-targets", refine_targets,
                       "measurement targets per refinement");

  // rate
  auto* c_rate = app.add_subcommand("rate", "length-vs-accuracy rate report");
  int samples = 200;
  add_common(c_rate, true);
  c_rate->add_option("--mode", mode_name, "weak or strong");
  c_rate->add_option("--levels", levels, "refinement levels");
  c_rate->add_option("--samples", samples, "targets per level");
  c_rate->add_option("--max-len", max_len, "base net word length");
  c_rate->add_option("--target-delta", target_delta, "base net accuracy");
  c_rate->add_option("--refine-targets", refine_targets,
                     "measurement targets per refinement");

  // factor-commutator
  auto* c_factor =
      app.add_subcommand("factor-commutator", "group commutator factoring");
  double delta = 0.1;
  int factor_samples = 20;
  add_common(c_factor, false);
  c_factor->add_option("--mode", mode_name, "weak or strong");
  c_factor->add_option("--delta", delta, "distance of targets from identity");
  c_factor->add_option("--samples", factor_samples, "random targets");

  // find-relation
  auto* c_rel = app.add_subcommand("find-relation",
                                   "relation certificates across levels");
  add_common(c_rel, true);
  c_rel->add_option("--mode", mode_name, "weak or strong");
  c_rel->add_option("--levels", levels, "certificate levels");
  c_rel->add_option("--max-len", max_len, "base net word length");
  c_rel->add_option("--target-delta", target_delta, "base net accuracy");
  c_rel->add_option("--refine-targets", refine_targets,
                    "measurement targets per refinement");

  // dynamics
  auto* c_dyn = app.add_subcommand("dynamics", "iterated commutator dynamics");
  std::string g_desc = "diag:1.2";
  std::uint64_t h_seed = 3;
  int kmax = 40;
  add_common(c_dyn, false);
  c_dyn->add_option("--g", g_desc, "diag:<t> or seed:<n>");
  c_dyn->add_option("--h-seed", h_seed, "seed for the small start element");
  c_dyn->add_option("--kmax", kmax, "iteration cap");

  // affine
  auto* c_aff = app.add_subcommand("affine", "Aff+(R) relation sequence");
  double s0 = 0.3;
  add_common(c_aff, false);
  c_aff->add_option("--s0", s0, "scaling factor in (0, 1)");
  c_aff->add_option("--kmax", kmax, "sequence length");

  // calibrate
  auto* c_cal = app.add_subcommand("calibrate",
                                   "measure per-group solver constants");
  int cal_samples = 2000;
  add_common(c_cal, false);
  c_cal->add_option("--samples", cal_samples, "calibration samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorClass::Usage);
  }

  if (const char* env = std::getenv("LIEFORGE_CACHE")) cache_dir = env;

  Manifest man;
  man.config = {{"group", group},        {"pair_seed", pair_seed},
                {"seed", seed},          {"out", out},
                {"cache_dir", cache_dir}, {"threads", threads},
                {"mode", mode_name}};
  SKMode mode = mode_name == "strong" ? SKMode::Strong : SKMode::Weak;

  try {
    if (*c_net) {
      const GroupSpec& g = GroupSpec::by_id(group);
      if (max_len == 0) max_len = default_max_len(group);
      man.config["max_len"] = max_len;
      man.config["radius"] = radius;
      man.config["target_delta"] = target_delta;
      Tuple pair = seeded_pair(g, pair_seed);
      WordNet net;
      {
        Phase ph(man, "net-build");
        net = build_base_net(pair, max_len, {identity(g), radius},
                             target_delta, seed);
      }
      if (out.empty()) out = "net.json";
      save_net(net, out);
      man.outputs.push_back(out);
      std::printf("net %s entries=%zu claimed_radius=%s partial=%d\n",
                  group.c_str(), net.entries.size(),
                  fmt(net.claimed_radius).c_str(), net.partial ? 1 : 0);
    } else if (*c_approx) {
      if (max_len == 0) max_len = default_max_len(group);
      man.config["levels"] = levels;
      man.config["max_len"] = max_len;
      SKLevelState st =
          build_engine(man, cache_dir, group, pair_seed, levels, mode, seed,
                       max_len, target_delta, refine_targets);
      Rng rng = make_rng(seed + 1000003);
      std::vector<std::string> lines{"index,depth,word_length,dist"};
      Phase ph(man, "approximate");
      for (int i = 0; i < targets; ++i) {
        GroupElement t = random_element(st.pair.group(), rng, 1.0);
        ApproxResult r = approximate(st, t, st.levels());
        lines.push_back(std::to_string(i) + "," +
                        std::to_string(st.levels()) + "," +
                        std::to_string(r.word.length()) + "," +
                        fmt(r.achieved_dist));
      }
      if (out.empty()) out = "approx.csv";
      write_lines(out, lines);
      man.outputs.push_back(out);
    } else if (*c_rate) {
      if (max_len == 0) max_len = default_max_len(group);
      man.config["levels"] = levels;
      man.config["samples"] = samples;
      SKLevelState st =
          build_engine(man, cache_dir, group, pair_seed, levels, mode, seed,
                       max_len, target_delta, refine_targets);
      RateReport rep;
      {
        Phase ph(man, "rate");
        rep = rate_report(st, samples, seed + 31);
      }
      std::vector<std::string> lines{
          "m,l_m,max_err,median_err,kappa_hat,c_hat"};
      for (const auto& lv : rep.levels)
        lines.push_back(std::to_string(lv.m) + "," + std::to_string(lv.l_m) +
                        "," + fmt(lv.max_err) + "," + fmt(lv.median_err) +
                        "," + fmt(rep.kappa_hat) + "," + fmt(rep.c_hat));
      if (out.empty()) out = "rate.csv";
      write_lines(out, lines);
      man.outputs.push_back(out);
      std::printf("rate %s kappa_hat=%s pass=%d\n", group.c_str(),
                  fmt(rep.kappa_hat).c_str(), rep.pass ? 1 : 0);
    } else if (*c_factor) {
      const GroupSpec& g = GroupSpec::by_id(group);
      man.config["delta"] = delta;
      man.config["samples"] = factor_samples;
      Phase ph(man, "factor");
      RootDecomposition rd = root_decompose(g, seed);
      find_splitting_element(rd, seed + 1);
      Rng rng = make_rng(seed + 2);
      std::vector<std::string> lines{"index,delta,achieved_dist,ratio"};
      for (int i = 0; i < factor_samples; ++i) {
        GroupElement z = exp_elem(algebra_from_coords(
            g, delta * random_unit_vector(rng, g.algebra_dim)));
        auto f = group_commutator_factor(rd, z, mode);
        lines.push_back(std::to_string(i) + "," + fmt(delta) + "," +
                        fmt(f.achieved_dist) + "," +
                        fmt(f.achieved_dist / std::pow(delta, 1.5)));
      }
      if (out.empty()) out = "factor.csv";
      write_lines(out, lines);
      man.outputs.push_back(out);
    } else if (*c_rel) {
      if (max_len == 0) max_len = default_max_len(group);
      man.config["levels"] = levels;
      SKLevelState st =
          build_engine(man, cache_dir, group, pair_seed, levels, mode, seed,
                       max_len, target_delta, refine_targets);
      Tuple pair = st.pair;
      RelationCurve curve;
      {
        Phase ph(man, "relations");
        curve = relation_rate_curve(pair, st, levels);
      }
      json j;
      j["group"] = group;
      j["kappa_hat"] = curve.kappa_hat;
      j["c_hat"] = curve.c_hat;
      j["pass"] = curve.pass;
      j["failures"] = curve.failures;
      json certs = json::array();
      for (const auto& c : curve.certs) {
        json pm = json::array();
        for (const auto& e : c.perturbed_pair.elements)
          pm.push_back(matrix_json(e.m));
        certs.push_back({{"word", word_to_string(c.word)},
                         {"pair", pm},
                         {"residual", c.residual},
                         {"pair_dist", c.pair_dist},
                         {"l_k", c.l_k},
                         {"level", c.level},
                         {"method", "net-newton"},
                         {"checks",
                          {{"non_identical", c.non_identical},
                           {"initial_residual", c.initial_residual},
                           {"jacobian_sv", c.jacobian_sv}}}});
      }
      j["certificates"] = std::move(certs);
      if (out.empty()) out = "certs.json";
      std::ofstream f(out, std::ios::binary);
      f << j.dump(2) << "\n";
      man.outputs.push_back(out);
      std::printf("find-relation %s certificates=%zu pass=%d\n", group.c_str(),
                  curve.certs.size(), curve.pass ? 1 : 0);
    } else if (*c_dyn) {
      const GroupSpec& g = GroupSpec::by_id(group);
      man.config["g"] = g_desc;
      man.config["h_seed"] = h_seed;
      man.config["kmax"] = kmax;
      GroupElement ge = identity(g);
      if (g_desc.rfind("diag:", 0) == 0) {
        double t = std::stod(g_desc.substr(5));
        Eigen::MatrixXcd m =
            Eigen::MatrixXcd::Identity(g.matrix_dim, g.matrix_dim);
        m(0, 0) = t;
        m(1, 1) = 1.0 / t;
        ge = GroupElement{&g, m};
        require_member(ge);
      } else if (g_desc.rfind("seed:", 0) == 0) {
        Rng rng = make_rng(std::stoull(g_desc.substr(5)));
        ge = random_element(g, rng, 1.0);
      } else {
        throw Error(ErrorClass::Usage, "--g must be diag:<t> or seed:<n>");
      }
      Rng rng = make_rng(h_seed);
      GroupElement h = exp_elem(algebra_from_coords(
          g, random_ball_vector(rng, g.algebra_dim, 0.05)));
      Phase ph(man, "dynamics");
      DynamicsReport rep = run_dynamics(ge, h, kmax);
      std::vector<std::string> lines{"k,norm,ratio,angle_to_L"};
      const Eigen::MatrixXd& P = rep.prox.eigen_plane;
      double prev = 0.0;
      for (const auto& it : rep.iterates) {
        double angle =
            (it.direction - P * (P.transpose() * it.direction)).norm();
        lines.push_back(std::to_string(it.k) + "," + fmt(it.log_norm) + "," +
                        fmt(prev > 0 ? it.log_norm / prev : 0.0) + "," +
                        fmt(angle));
        prev = it.log_norm;
      }
      if (out.empty()) out = "dyn.csv";
      write_lines(out, lines);
      man.outputs.push_back(out);
      std::printf("dynamics s=%s+%si |v|=%s\n", fmt(rep.prox.s.real()).c_str(),
                  fmt(rep.prox.s.imag()).c_str(),
                  fmt(rep.v_estimate.norm()).c_str());
    } else if (*c_aff) {
      man.config["s0"] = s0;
      man.config["kmax"] = kmax;
      Phase ph(man, "affine");
      auto steps = affine_relation_sequence(s0, kmax);
      std::vector<std::string> lines{"k,m_k,s_k,gap,relation_residual"};
      for (const auto& st : steps)
        lines.push_back(std::to_string(st.k) + "," + std::to_string(st.m_k) +
                        "," + fmt(st.s_k) + "," + fmt(st.gap) + "," +
                        fmt(st.relation_residual));
      if (out.empty()) out = "affine.csv";
      write_lines(out, lines);
      man.outputs.push_back(out);
    } else if (*c_cal) {
      const GroupSpec& g = GroupSpec::by_id(group);
      man.config["samples"] = cal_samples;
      Phase ph(man, "calibrate");
      CalibrationRecord rec = calibrate(g, seed, cal_samples);
      json j = {{"group", rec.group},
                {"c_weak", rec.c_weak},
                {"c_strong", rec.c_strong},
                {"c_contraction", rec.c_contraction},
                {"seed", rec.seed},
                {"samples", rec.samples}};
      if (out.empty()) out = "calibration.json";
      std::ofstream f(out, std::ios::binary);
      f << j.dump(2) << "\n";
      man.outputs.push_back(out);
      std::printf("calibrate %s c_weak=%s c_contraction=%s\n", group.c_str(),
                  fmt(rec.c_weak).c_str(), fmt(rec.c_contraction).c_str());
    }
    if (!out.empty()) man.write(out);
  } catch (const Error& e) {
    std::fprintf(stderr, "lieforge: %s error: %s\n",
                 error_class_name(e.error_class()), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lieforge: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
