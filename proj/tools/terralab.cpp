#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "terralab/experiment.hpp"
#include "terralab/terrace.hpp"

using namespace terralab;
namespace fs = std::filesystem;

namespace {

// --observe-every rewrites the config text before parsing so the manifest
// echo reproduces exactly what ran
Config load_config(const std::string& path, int observe_every) {
  if (observe_every <= 0) return Config::parse_file(path);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string text, line;
  while (std::getline(in, line)) {
    const auto key_end = line.find_first_of("=#");
    std::string key = line.substr(0, key_end == std::string::npos ? line.size()
                                                                  : key_end);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "observe_every") continue;
    text += line + "\n";
  }
  text += "observe_every = " + std::to_string(observe_every) + "\n";
  return Config::parse_string(text, path);
}

nlohmann::json load_manifest(const std::string& run_dir) {
  const std::string path = run_dir + "/manifest.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

// terrace and audit default to the exact config echo a run left behind
Config run_dir_config(const std::string& config_path, const std::string& run_dir,
                      const nlohmann::json& manifest) {
  if (!config_path.empty()) return Config::parse_file(config_path);
  return Config::parse_string(manifest.at("config").get<std::string>(),
                              run_dir + "/manifest.json");
}

struct PotentialSetup {
  PotentialSpec spec;
  Box box;
  PotentialAnalysis analysis;
};

PotentialSetup potential_setup(const Config& cfg) {
  PotentialSetup s;
  const std::string pname = cfg.get_string("potential");
  std::map<std::string, double> params;
  for (const auto& key : cfg.keys())
    if (key.rfind("potential.", 0) == 0)
      params[key.substr(10)] = cfg.get_real(key);
  s.spec = make_builtin(pname, params);
  s.box = builtin_box(pname);
  if (cfg.has("box")) {
    const auto b = cfg.get_reals("box");
    const int n = s.spec.n;
    if (static_cast<int>(b.size()) != 2 * n)
      throw ConfigError("key 'box' must list " + std::to_string(2 * n) +
                        " reals (lows then highs)");
    s.box.lo.assign(b.begin(), b.begin() + n);
    s.box.hi.assign(b.begin() + n, b.end());
  }
  s.analysis = analyze_potential(s.spec, s.box);
  return s;
}

std::vector<RadialField> load_run_snapshots(const std::string& run_dir,
                                            const nlohmann::json& manifest) {
  std::vector<RadialField> snaps;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.get<std::string>();
    if (name.rfind("snap_", 0) == 0)
      snaps.push_back(read_snapshot_csv(run_dir + "/" + name));
  }
  if (snaps.empty())
    throw ConfigError("run directory '" + run_dir + "' holds no snapshots");
  return snaps;
}

std::vector<TrackerRecord> read_tracker_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<TrackerRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TrackerRecord rec{};
    std::istringstream ss(line);
    std::string tok;
    double* fields[4] = {&rec.t, &rec.r_hom, &rec.r_esc, &rec.r_esc_hull};
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ss, tok, ',')) throw ConfigError("malformed row in " + path);
      *fields[i] = std::strtod(tok.c_str(), nullptr);
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<double> read_state_key(const Config& cfg, const std::string& key,
                                   int n) {
  const auto v = cfg.get_reals(key);
  if (static_cast<int>(v.size()) != n)
    throw ConfigError("key '" + key + "' must list " + std::to_string(n) +
                      " reals");
  return v;
}

int cmd_analyze(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = Config::parse_file(config_path);
  const auto setup = potential_setup(cfg);
  fs::create_directories(out_dir);
  const std::string path = out_dir + "/analysis.json";
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << analysis_to_json(setup.analysis);
  std::cout << "potential " << setup.spec.name << ": "
            << setup.analysis.minima.size() << " minima, lambda in ["
            << setup.analysis.lambda_min << ", " << setup.analysis.lambda_max
            << "], d_esc = " << setup.analysis.d_esc << "\n";
  std::cout << "wrote " << path << "\n";
  return 0;
}

int cmd_front(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = Config::parse_file(config_path);
  const auto setup = potential_setup(cfg);
  const auto& an = setup.analysis;

  const auto lo_state = read_state_key(cfg, "front.m_minus", setup.spec.n);
  const auto hi_state = read_state_key(cfg, "front.m_plus", setup.spec.n);
  const auto& m_minus = an.minima[snap_to_minimum(an, lo_state)];
  const auto& m_plus = an.minima[snap_to_minimum(an, hi_state)];
  const double c_lo = cfg.get_real("front.bracket_lo", -0.5);
  const double c_hi = cfg.get_real("front.bracket_hi", 3.0);

  FrontProfile prof = solve_bistable_front(setup.spec, m_minus, m_plus, c_lo, c_hi);
  if (cfg.get_bool("front.normalize", true))
    prof = normalize_front(prof, an.d_esc);

  fs::create_directories(out_dir);
  const std::string csv = out_dir + "/front.csv";
  const std::string json = out_dir + "/front.json";
  write_front_csv(prof, csv, json);
  std::cout << "speed = " << std::setprecision(12) << prof.speed << "\n";
  std::cout << "residual = " << front_residual(prof, setup.spec) << "\n";
  std::cout << "wrote " << csv << " and " << json << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int observe_every) {
  const auto cfg = load_config(config_path, observe_every);
  const auto res = run_experiment(cfg, out_dir);
  std::cout << "wrote " << res.snapshot_paths.size() << " snapshots and "
            << res.manifest_path << "\n";
  for (const auto& w : res.warnings) std::cout << "warning: " << w << "\n";
  return 0;
}

int cmd_terrace(const std::string& config_path, const std::string& run_dir) {
  const auto manifest = load_manifest(run_dir);
  const auto cfg = run_dir_config(config_path, run_dir, manifest);
  const auto setup = potential_setup(cfg);
  const auto snaps = load_run_snapshots(run_dir, manifest);

  FitOptions opts;
  opts.t_a = cfg.get_real("terrace.t_a", 0.0);
  opts.t_b = cfg.get_real("terrace.t_b", 0.0);
  opts.front_bracket_lo = cfg.get_real("terrace.bracket_lo", opts.front_bracket_lo);
  opts.front_bracket_hi = cfg.get_real("terrace.bracket_hi", opts.front_bracket_hi);

  const auto fit = fit_terrace(snaps, setup.spec, setup.analysis, opts);

  const std::string jpath = run_dir + "/terrace.json";
  std::ofstream out(jpath);
  if (!out) throw ConfigError("cannot write '" + jpath + "'");
  out << terrace_to_json(fit);
  write_fit_report_csv(fit.report, run_dir + "/fit_report.csv");
  write_positions_csv(fit.terrace, run_dir + "/positions.csv");

  std::cout << "q = " << fit.terrace.q << "\n";
  for (int i = 0; i < fit.terrace.q; ++i)
    std::cout << "front " << i + 1 << ": position speed = " << std::setprecision(12)
              << fit.terrace.speeds[i]
              << " (planar " << fit.terrace.fronts[i].speed << ")\n";
  std::cout << "wrote " << jpath << "\n";
  return 0;
}

int cmd_audit(const std::string& config_path, const std::string& run_dir) {
  const auto manifest = load_manifest(run_dir);
  const auto cfg = run_dir_config(config_path, run_dir, manifest);
  const auto setup = potential_setup(cfg);

  const int d = manifest.at("grid").at("d").get<int>();
  const int m_ref = manifest.at("m_ref_index").get<int>();
  const auto fw = make_firewall_config(setup.analysis, d,
                                       setup.analysis.minima[m_ref]);
  const auto snaps = load_run_snapshots(run_dir, manifest);
  const auto& grid = snaps.front().grid;

  std::vector<double> rhos;
  if (cfg.has("audit.rho")) {
    rhos = cfg.get_reals("audit.rho");
  } else {
    const int count = cfg.get_int("audit.rho_count", 25);
    const double lo = cfg.get_real("audit.rho_lo",
                                   std::max(fw.r_sc, 0.1 * grid.r_max));
    const double hi = cfg.get_real("audit.rho_hi", 0.8 * grid.r_max);
    if (cfg.has("audit.rho_lo") || cfg.has("audit.rho_hi")) {
      if (!(lo < hi) || count < 1)
        throw ConfigError("audit window must satisfy rho_lo < rho_hi");
    }
    if (lo < hi)
      for (int i = 0; i < count; ++i)
        rhos.push_back(lo + (hi - lo) * i / std::max(1, count - 1));
  }
  const double slack_coeff = cfg.get_real("audit.slack_coeff", 1.0);

  nlohmann::json j;
  EscapeImplicationReport esc;
  if (rhos.empty()) {
    // the decay bound only applies beyond r_sc, which this grid never reaches
    j["firewall"] = {{"skipped", "no admissible rho between r_sc and 0.8 r_max"}};
    for (const auto& f : snaps) check_escape_implication(f, fw, setup.spec, esc);
  } else {
    FirewallAuditor auditor(fw, setup.spec, rhos, slack_coeff);
    for (const auto& f : snaps) {
      auditor.observe(f);
      check_escape_implication(f, fw, setup.spec, esc);
    }
    const auto fwrep = auditor.report();
    auditor.write_csv(run_dir + "/firewall_audit.csv");
    j["firewall"] = {{"samples", fwrep.samples.size()},
                     {"violations", fwrep.violations},
                     {"worst_margin", fwrep.worst_margin},
                     {"slack", fwrep.slack},
                     {"slack_coeff", fwrep.slack_coeff},
                     {"dt_obs", fwrep.dt_obs}};
  }
  j["escape_implication"] = {{"checked", esc.checked},
                             {"violations", esc.violations},
                             {"worst_excess", esc.worst_excess}};

  const std::string tracker_path = run_dir + "/tracker.csv";
  if (fs::exists(tracker_path)) {
    const auto series = read_tracker_csv(tracker_path);
    const auto inv = audit_invasion_bound(series, fw.c_noesc,
                                          cfg.get_real("audit.invasion_tol", 1e-9));
    j["invasion_bound"] = {{"pairs", inv.pairs},
                           {"violations", inv.violations},
                           {"worst_violation", inv.worst_violation},
                           {"c_noesc", fw.c_noesc}};
  }

  const std::string jpath = run_dir + "/audit.json";
  std::ofstream out(jpath);
  if (!out) throw ConfigError("cannot write '" + jpath + "'");
  out << j.dump(2) << "\n";

  if (j["firewall"].contains("skipped"))
    std::cout << "firewall: skipped, " << j["firewall"]["skipped"].get<std::string>()
              << "\n";
  else
    std::cout << "firewall: " << j["firewall"]["samples"] << " samples, "
              << j["firewall"]["violations"] << " violations (slack "
              << j["firewall"]["slack"] << ")\n";
  std::cout << "escape implication: " << esc.checked << " checked, "
            << esc.violations << " violations\n";
  if (j.contains("invasion_bound"))
    std::cout << "invasion bound: " << j["invasion_bound"]["pairs"] << " pairs, "
              << j["invasion_bound"]["violations"] << " violations\n";
  std::cout << "wrote " << jpath << "\n";
  return 0;
}

struct SweepEntry {
  std::string config_path;
  std::string dir;
  int exit_code = 0;
  std::string status = "ok";
  std::string message;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InstabilityError*>(&e)) return 4;
  if (dynamic_cast<const SolverError*>(&e)) return 3;
  return 2;
}

int cmd_sweep(const std::string& list_path, const std::string& out_dir, int jobs) {
  std::ifstream in(list_path);
  if (!in) throw ConfigError("cannot open '" + list_path + "'");
  const fs::path base = fs::path(list_path).parent_path();

  std::vector<SweepEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t"));
    line.erase(line.find_last_not_of(" \t") + 1);
    if (line.empty()) continue;
    SweepEntry e;
    const fs::path p(line);
    e.config_path = p.is_absolute() ? p.string() : (base / p).string();
    e.dir = out_dir + "/" + p.stem().string();
    entries.push_back(e);
  }
  if (entries.empty()) throw ConfigError("sweep list '" + list_path + "' is empty");
  for (size_t i = 0; i < entries.size(); ++i)
    for (size_t k = i + 1; k < entries.size(); ++k)
      if (entries[i].dir == entries[k].dir)
        throw ConfigError("sweep entries collide on directory '" +
                          entries[i].dir + "'");

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1)) {
      auto& e = entries[i];
      try {
        const auto cfg = Config::parse_file(e.config_path);
        run_experiment(cfg, e.dir);
      } catch (const std::exception& ex) {
        e.exit_code = exit_code_for(ex);
        e.status = e.exit_code == 4   ? "instability"
                   : e.exit_code == 3 ? "solver_error"
                                      : "config_error";
        e.message = ex.what();
      }
    }
  };

  const int n_workers = std::max(
      1, std::min<int>(jobs, static_cast<int>(entries.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  fs::create_directories(out_dir);
  nlohmann::json j = nlohmann::json::array();
  int worst = 0;
  for (const auto& e : entries) {
    j.push_back({{"config", e.config_path},
                 {"dir", e.dir},
                 {"status", e.status},
                 {"message", e.message}});
    worst = std::max(worst, e.exit_code);
    std::cout << e.status << ": " << e.config_path;
    if (!e.message.empty()) std::cout << " (" << e.message << ")";
    std::cout << "\n";
  }
  const std::string jpath = out_dir + "/sweep.json";
  std::ofstream out(jpath);
  if (!out) throw ConfigError("cannot write '" + jpath + "'");
  out << j.dump(2) << "\n";
  std::cout << "wrote " << jpath << "\n";
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for radially symmetric gradient"
               " reaction-diffusion systems"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int observe_every = 0;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "experiment config file");
    if (config_required) c->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--observe-every", observe_every,
                    "override the observer cadence (steps)");
    return sub;
  };

  auto* analyze = add_common(
      app.add_subcommand("analyze", "analyze the configured potential"), true);
  auto* front = add_common(
      app.add_subcommand("front", "solve a planar bistable front"), true);
  auto* run = add_common(
      app.add_subcommand("run", "integrate the configured scenario"), true);
  run->get_option("--out")->required();
  auto* terrace = add_common(
      app.add_subcommand("terrace", "fit a propagating terrace to a finished run"),
      false);
  terrace->get_option("--out")->required();
  auto* audit = add_common(
      app.add_subcommand("audit", "check firewall, escape, and invasion bounds"
                                  " on a finished run"),
      false);
  audit->get_option("--out")->required();
  auto* sweep = add_common(
      app.add_subcommand("sweep", "run a list of configs concurrently"), true);
  sweep->get_option("--out")->required();
  sweep->add_option("--jobs", jobs, "maximum concurrent runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(config_path, out_dir);
    if (front->parsed()) return cmd_front(config_path, out_dir);
    if (run->parsed()) return cmd_run(config_path, out_dir, observe_every);
    if (terrace->parsed()) return cmd_terrace(config_path, out_dir);
    if (audit->parsed()) return cmd_audit(config_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InstabilityError& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return 4;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
