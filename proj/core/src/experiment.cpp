#include "terralab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "numerics.hpp"

namespace terralab {

int snap_to_minimum(const PotentialAnalysis& analysis,
                    const std::vector<double>& approx, double snap_tol) {
  int best = -1;
  double best_d = snap_tol;
  for (size_t i = 0; i < analysis.minima.size(); ++i) {
    const auto& loc = analysis.minima[i].location;
    double s = 0;
    for (size_t j = 0; j < loc.size(); ++j)
      s += (loc[j] - approx[j]) * (loc[j] - approx[j]);
    const double d = std::sqrt(s);
    if (d <= best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    std::string s = "state (";
    for (size_t j = 0; j < approx.size(); ++j)
      s += (j ? " " : "") + num::fmt17(approx[j]);
    throw ConfigError(s + ") is not near any minimum of the potential");
  }
  return best;
}

namespace {

std::vector<double> snapped(const PotentialAnalysis& analysis,
                            const std::vector<double>& approx) {
  return analysis.minima[snap_to_minimum(analysis, approx)].location;
}

}  // namespace

Experiment build_experiment(const Config& cfg) {
  Experiment ex;

  const std::string pname = cfg.get_string("potential");
  std::map<std::string, double> params;
  for (const auto& key : cfg.keys())
    if (key.rfind("potential.", 0) == 0)
      params[key.substr(10)] = cfg.get_real(key);
  ex.spec = make_builtin(pname, params);

  ex.box = builtin_box(pname);
  if (cfg.has("box")) {
    const auto b = cfg.get_reals("box");
    const int n = ex.spec.n;
    if (static_cast<int>(b.size()) != 2 * n)
      throw ConfigError("key 'box' must list " + std::to_string(2 * n) +
                        " reals (lows then highs)");
    ex.box.lo.assign(b.begin(), b.begin() + n);
    ex.box.hi.assign(b.begin() + n, b.end());
  }
  ex.analysis = analyze_potential(ex.spec, ex.box);

  ex.grid.d = cfg.get_int("d");
  if (ex.grid.d < 1 || ex.grid.d > 3)
    throw ConfigError("key 'd' must be 1, 2, or 3");
  ex.grid.r_max = cfg.get_real("r_max");
  const double dr = cfg.get_real("dr");
  if (!(ex.grid.r_max > 0) || !(dr > 0))
    throw ConfigError("keys 'r_max' and 'dr' must be positive");
  ex.grid.n_nodes = static_cast<int>(std::lround(ex.grid.r_max / dr)) + 1;

  const std::string scheme = cfg.get_string("scheme", "imex_cn");
  if (scheme == "imex_cn")
    ex.integ.scheme = Scheme::imex_cn;
  else if (scheme == "explicit_rk4")
    ex.integ.scheme = Scheme::explicit_rk4;
  else
    throw ConfigError("key 'scheme' must be imex_cn or explicit_rk4");
  ex.integ.dt = cfg.get_real("dt");
  ex.integ.t_end = cfg.get_real("t_end");
  if (!(ex.integ.t_end >= 0)) throw ConfigError("key 't_end' must be nonnegative");
  ex.integ.observe_every = cfg.get_int("observe_every", 50);
  if (ex.integ.observe_every < 1)
    throw ConfigError("key 'observe_every' must be at least 1");

  const std::string bc = cfg.get_string("outer_bc", "neumann");
  if (bc == "neumann") {
    ex.integ.outer_bc = OuterBc::neumann_zero;
  } else if (bc == "dirichlet") {
    ex.integ.outer_bc = OuterBc::dirichlet_value;
    ex.integ.outer_value = cfg.get_reals("outer_value");
    if (static_cast<int>(ex.integ.outer_value.size()) != ex.spec.n)
      throw ConfigError("key 'outer_value' must list one real per component");
  } else {
    throw ConfigError("key 'outer_bc' must be neumann or dirichlet");
  }

  const int n = ex.spec.n;
  auto read_state = [&](const std::string& key) {
    const auto v = cfg.get_reals(key);
    if (static_cast<int>(v.size()) != n)
      throw ConfigError("key '" + key + "' must list " + std::to_string(n) +
                        " reals");
    return v;
  };

  const std::string kind = cfg.get_string("initial");
  std::vector<double> outer_state;
  if (kind == "plateau") {
    const auto mi = snapped(ex.analysis, read_state("initial.m_inner"));
    const auto mo = snapped(ex.analysis, read_state("initial.m_outer"));
    ex.initial = initial_plateau(ex.grid, mi, mo, cfg.get_real("initial.r0"),
                                 cfg.get_real("initial.w"));
    outer_state = mo;
  } else if (kind == "stack") {
    const auto flat = cfg.get_reals("initial.levels");
    if (flat.size() % n != 0)
      throw ConfigError("key 'initial.levels' must list a multiple of n reals");
    std::vector<std::vector<double>> levels;
    for (size_t i = 0; i < flat.size(); i += n)
      levels.push_back(
          snapped(ex.analysis, {flat.begin() + i, flat.begin() + i + n}));
    const auto radii = cfg.get_reals("initial.radii");
    ex.initial = initial_stack(ex.grid, levels, radii, cfg.get_real("initial.w"));
    outer_state = levels.back();
  } else if (kind == "bump") {
    const auto m = snapped(ex.analysis, read_state("initial.m"));
    const auto amp = read_state("initial.amplitude");
    ex.initial = initial_bump(ex.grid, m, amp, cfg.get_real("initial.r0"),
                              cfg.get_real("initial.w"));
    outer_state = m;
  } else if (kind == "front_seed") {
    const FrontProfile prof = read_front_csv(cfg.get_string("initial.front_csv"),
                                             cfg.get_string("initial.front_json"));
    if (prof.n != n)
      throw ConfigError("front profile component count does not match potential");
    ex.initial = initial_front_seed(ex.grid, prof, cfg.get_real("initial.r0"));
    outer_state = prof.m_plus;
  } else if (kind == "homogeneous") {
    const auto m = snapped(ex.analysis, read_state("initial.m"));
    ex.initial = initial_homogeneous(ex.grid, m);
    outer_state = m;
  } else {
    throw ConfigError(
        "key 'initial' must be plateau, stack, bump, front_seed, or homogeneous");
  }

  ex.m_ref_index = snap_to_minimum(
      ex.analysis, cfg.has("m_ref") ? read_state("m_ref") : outer_state);

  const auto unread = cfg.unread_keys();
  if (!unread.empty()) {
    std::string msg = "unrecognized key";
    if (unread.size() > 1) msg += "s";
    for (size_t i = 0; i < unread.size(); ++i)
      msg += (i ? ", '" : " '") + unread[i] + "'";
    throw ConfigError(cfg.origin() + ": " + msg);
  }
  return ex;
}

RunResult run_experiment(const Config& cfg, const std::string& out_dir) {
  // run-level keys are consumed before build_experiment runs its strict
  // leftover-key check; the terrace and audit namespaces belong to the
  // post-processing stages and ride along in the same config
  const int snapshot_every = cfg.get_int("snapshot_every", 0);
  const bool with_tracker = cfg.get_bool("tracker", true);
  for (const auto& key : cfg.keys())
    if (key.rfind("terrace.", 0) == 0 || key.rfind("audit.", 0) == 0)
      cfg.get_string(key);

  Experiment ex = build_experiment(cfg);
  std::filesystem::create_directories(out_dir);

  RunResult result;
  result.out_dir = out_dir;

  std::vector<ObserverSlot> observers;
  int snap_index = 0;
  observers.push_back(
      {snapshot_every, [&](const RadialField& f) {
         char name[32];
         std::snprintf(name, sizeof name, "snap_%06d.csv", snap_index++);
         const std::string path = out_dir + "/" + name;
         write_snapshot_csv(f, path);
         result.snapshot_paths.push_back(path);
       }});

  std::optional<EscapeTracker> tracker;
  if (with_tracker) {
    const FirewallConfig fw = make_firewall_config(
        ex.analysis, ex.grid.d, ex.analysis.minima[ex.m_ref_index]);
    tracker.emplace(fw, ex.spec);
    observers.push_back({0, [&](const RadialField& f) { tracker->observe(f); }});
  }

  integrate(ex.initial, ex.spec, ex.integ, observers);

  std::vector<std::string> files = result.snapshot_paths;
  if (tracker) {
    const std::string path = out_dir + "/tracker.csv";
    tracker->write_csv(path);
    files.push_back(path);
    result.warnings = tracker->warnings();
  }

  nlohmann::json man;
  man["origin"] = cfg.origin();
  man["config"] = cfg.echo();
  man["potential"] = ex.spec.name;
  man["grid"] = {{"d", ex.grid.d},
                 {"r_max", ex.grid.r_max},
                 {"dr", ex.grid.dr()},
                 {"n_nodes", ex.grid.n_nodes}};
  man["scheme"] = ex.integ.scheme == Scheme::imex_cn ? "imex_cn" : "explicit_rk4";
  man["dt"] = ex.integ.dt;
  man["t_end"] = ex.integ.t_end;
  man["m_ref_index"] = ex.m_ref_index;
  man["analysis"] = nlohmann::json::parse(analysis_to_json(ex.analysis));
  man["files"] = nlohmann::json::array();
  for (const auto& f : files)
    man["files"].push_back(std::filesystem::path(f).filename().string());
  man["warnings"] = result.warnings;

  result.manifest_path = out_dir + "/manifest.json";
  std::ofstream out(result.manifest_path);
  if (!out) throw ConfigError("cannot write '" + result.manifest_path + "'");
  out << man.dump(2) << "\n";
  return result;
}

}  // namespace terralab
