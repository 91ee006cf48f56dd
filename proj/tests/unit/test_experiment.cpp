#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "terralab/experiment.hpp"
#include "terralab/front.hpp"
#include "test_util.hpp"

using namespace terralab;

namespace {

std::string render(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::map<std::string, std::string> plateau_base() {
  return {{"potential", "cubic"},   {"d", "3"},
          {"r_max", "40"},          {"dr", "0.2"},
          {"dt", "0.02"},           {"t_end", "1"},
          {"initial", "plateau"},   {"initial.m_inner", "0.9"},
          {"initial.m_outer", "0.1"}, {"initial.r0", "15"},
          {"initial.w", "4"}};
}

Experiment build(const std::map<std::string, std::string>& kv) {
  return build_experiment(Config::parse_string(render(kv), "unit"));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("experiment");

TEST_CASE("states snap to the nearest refined minimum") {
  const auto spec = make_builtin("cubic");
  const auto an = analyze_potential(spec, builtin_box("cubic"));
  CHECK(snap_to_minimum(an, {0.9}) == 0);
  CHECK(snap_to_minimum(an, {0.86}) == 0);
  CHECK(snap_to_minimum(an, {0.05}) == 1);
  CHECK(snap_to_minimum(an, {-0.1}) == 1);
  CHECK(snap_to_minimum(an, {0.7}, 0.35) == 0);

  auto run = [&] { snap_to_minimum(an, {0.5}); };
  CHECK_THROWS_WITH_AS(run(),
                       "state (0.5) is not near any minimum of the potential",
                       ConfigError);

  const auto pair_spec = make_builtin("coupled_wells");
  const auto pair_an = analyze_potential(pair_spec, builtin_box("coupled_wells"));
  auto run2 = [&] { snap_to_minimum(pair_an, {0.5, 0.25}); };
  CHECK_THROWS_WITH_AS(
      run2(), "state (0.5 0.25) is not near any minimum of the potential",
      ConfigError);
}

TEST_CASE("a plateau config assembles with defaults filled in") {
  const auto ex = build(plateau_base());
  CHECK(ex.spec.name == "cubic");
  CHECK(ex.grid.d == 3);
  CHECK(ex.grid.n_nodes == 201);
  CHECK(ex.grid.r_max == 40.0);
  CHECK(ex.integ.scheme == Scheme::imex_cn);
  CHECK(ex.integ.dt == 0.02);
  CHECK(ex.integ.t_end == 1.0);
  CHECK(ex.integ.observe_every == 50);
  CHECK(ex.integ.outer_bc == OuterBc::neumann_zero);

  // approximate states land exactly on the refined minima
  CHECK(ex.initial.comp(0)[0] == ex.analysis.minima[0].location[0]);
  CHECK(ex.initial.comp(0)[200] == ex.analysis.minima[1].location[0]);
  CHECK(ex.m_ref_index == 1);
}

TEST_CASE("scheme, boundary, and reference-state overrides are honored") {
  auto kv = plateau_base();
  kv["scheme"] = "explicit_rk4";
  kv["dt"] = "0.004";
  kv["outer_bc"] = "dirichlet";
  kv["outer_value"] = "0";
  kv["observe_every"] = "7";
  kv["m_ref"] = "1";
  const auto ex = build(kv);
  CHECK(ex.integ.scheme == Scheme::explicit_rk4);
  CHECK(ex.integ.outer_bc == OuterBc::dirichlet_value);
  REQUIRE(ex.integ.outer_value.size() == 1);
  CHECK(ex.integ.outer_value[0] == 0.0);
  CHECK(ex.integ.observe_every == 7);
  CHECK(ex.m_ref_index == 0);
}

TEST_CASE("potential parameters pass through to the analysis") {
  std::map<std::string, std::string> kv{
      {"potential", "triple_well"}, {"potential.s1", "0.9"},
      {"d", "2"},                   {"r_max", "30"},
      {"dr", "0.2"},                {"dt", "0.02"},
      {"t_end", "1"},               {"initial", "stack"},
      {"initial.levels", "-1 0 1"}, {"initial.radii", "8 16"},
      {"initial.w", "2"}};
  const auto ex = build(kv);

  const auto ref = analyze_potential(make_builtin("triple_well", {{"s1", 0.9}}),
                                     builtin_box("triple_well"));
  const auto def = analyze_potential(make_builtin("triple_well"),
                                     builtin_box("triple_well"));
  CHECK(ex.analysis.minima[0].value == ref.minima[0].value);
  CHECK(ex.analysis.minima[0].value != def.minima[0].value);

  CHECK(ex.m_ref_index == 2);  // outer level snaps to the +1 state
  CHECK(ex.initial.comp(0)[0] == ex.analysis.minima[0].location[0]);
  CHECK(ex.initial.comp(0)[ex.grid.n_nodes - 1] ==
        ex.analysis.minima[2].location[0]);
}

TEST_CASE("a custom box replaces the builtin search window") {
  auto kv = plateau_base();
  kv["box"] = "-0.5 1.5";
  const auto ex = build(kv);
  CHECK(ex.box.lo == std::vector<double>{-0.5});
  CHECK(ex.box.hi == std::vector<double>{1.5});

  kv["box"] = "0 1 2";
  auto run = [&] { build(kv); };
  CHECK_THROWS_WITH_AS(run(), "key 'box' must list 2 reals (lows then highs)",
                       ConfigError);
}

TEST_CASE("validation failures name the offending key") {
  auto expect = [](std::map<std::string, std::string> kv, const char* msg) {
    CHECK_THROWS_WITH_AS(build_experiment(Config::parse_string(render(kv), "unit")),
                         msg, ConfigError);
  };

  auto kv = plateau_base();
  kv["d"] = "4";
  expect(kv, "key 'd' must be 1, 2, or 3");

  kv = plateau_base();
  kv["r_max"] = "-40";
  expect(kv, "keys 'r_max' and 'dr' must be positive");

  kv = plateau_base();
  kv["scheme"] = "euler";
  expect(kv, "key 'scheme' must be imex_cn or explicit_rk4");

  kv = plateau_base();
  kv["t_end"] = "-1";
  expect(kv, "key 't_end' must be nonnegative");

  kv = plateau_base();
  kv["observe_every"] = "0";
  expect(kv, "key 'observe_every' must be at least 1");

  kv = plateau_base();
  kv["outer_bc"] = "absorbing";
  expect(kv, "key 'outer_bc' must be neumann or dirichlet");

  kv = plateau_base();
  kv["outer_bc"] = "dirichlet";
  kv["outer_value"] = "0 0";
  expect(kv, "key 'outer_value' must list one real per component");

  kv = plateau_base();
  kv["initial"] = "wedge";
  expect(kv, "key 'initial' must be plateau, stack, bump, front_seed, or homogeneous");

  kv = plateau_base();
  kv["initial.m_outer"] = "0.5";
  expect(kv, "state (0.5) is not near any minimum of the potential");

  expect({{"potential", "coupled_wells"}, {"d", "1"}, {"r_max", "20"},
          {"dr", "0.1"}, {"dt", "0.01"}, {"t_end", "1"}, {"initial", "stack"},
          {"initial.levels", "0 0 1"}, {"initial.radii", "8"},
          {"initial.w", "2"}},
         "key 'initial.levels' must list a multiple of n reals");
}

TEST_CASE("unconsumed keys are rejected with their origin") {
  auto kv = plateau_base();
  kv["zz"] = "1";
  auto one = [&] { build(kv); };
  CHECK_THROWS_WITH_AS(one(), "unit: unrecognized key 'zz'", ConfigError);

  kv["aa"] = "2";
  auto two = [&] { build(kv); };
  CHECK_THROWS_WITH_AS(two(), "unit: unrecognized keys 'aa', 'zz'", ConfigError);
}

TEST_CASE("a front profile seeds the initial state from disk") {
  const auto spec = make_builtin("cubic");
  const auto an = analyze_potential(spec, builtin_box("cubic"));
  const auto front = normalize_front(
      solve_bistable_front(spec, an.minima[0], an.minima[1], 0.0, 1.0),
      an.d_esc);

  testutil::ScopedDir dir("experiment");
  const auto csv = dir.file("prof.csv");
  const auto json = dir.file("prof.json");
  write_front_csv(front, csv, json);

  std::map<std::string, std::string> kv{
      {"potential", "cubic"}, {"d", "2"},
      {"r_max", "40"},        {"dr", "0.2"},
      {"dt", "0.02"},         {"t_end", "1"},
      {"initial", "front_seed"}, {"initial.front_csv", csv},
      {"initial.front_json", json}, {"initial.r0", "20"}};
  const auto ex = build(kv);

  const auto direct = initial_front_seed(ex.grid, read_front_csv(csv, json), 20.0);
  REQUIRE(ex.initial.values.size() == direct.values.size());
  for (size_t i = 0; i < direct.values.size(); ++i)
    CHECK(ex.initial.values[i] == direct.values[i]);
  CHECK(ex.m_ref_index == 1);

  kv["potential"] = "coupled_wells";
  auto run = [&] { build(kv); };
  CHECK_THROWS_WITH_AS(run(),
                       "front profile component count does not match potential",
                       ConfigError);
}

TEST_CASE("a run writes snapshots, tracker, and a faithful manifest") {
  std::map<std::string, std::string> kv{
      {"potential", "cubic"}, {"d", "1"},
      {"r_max", "10"},        {"dr", "0.1"},
      {"dt", "0.02"},         {"t_end", "0.4"},
      {"observe_every", "10"}, {"initial", "homogeneous"},
      {"initial.m", "0"}};
  const auto cfg = Config::parse_string(render(kv), "unit");

  testutil::ScopedDir dir("experiment");
  const auto out = dir.file("runA");
  const auto res = run_experiment(cfg, out);

  REQUIRE(res.snapshot_paths.size() == 3);  // steps 0, 10, 20
  CHECK(std::filesystem::path(res.snapshot_paths[0]).filename() ==
        "snap_000000.csv");
  CHECK(std::filesystem::path(res.snapshot_paths[2]).filename() ==
        "snap_000002.csv");
  for (const auto& p : res.snapshot_paths)
    CHECK(std::filesystem::exists(p));
  CHECK(std::filesystem::exists(out + "/tracker.csv"));
  CHECK(res.warnings.empty());

  const auto man = nlohmann::json::parse(slurp(res.manifest_path));
  CHECK(man["origin"] == "unit");
  CHECK(man["config"] == cfg.echo());
  CHECK(man["potential"] == "cubic");
  CHECK(man["grid"]["d"] == 1);
  CHECK(man["grid"]["n_nodes"] == 101);
  CHECK(man["grid"]["dr"] == 0.1);
  CHECK(man["scheme"] == "imex_cn");
  CHECK(man["dt"] == 0.02);
  CHECK(man["m_ref_index"] == 1);
  CHECK(man["analysis"]["d_esc"] == doctest::Approx(0.0534238815308));
  REQUIRE(man["files"].size() == 4);
  CHECK(man["files"][0] == "snap_000000.csv");
  CHECK(man["files"][3] == "tracker.csv");
  CHECK(man["warnings"].empty());

  // the final state never left the (Newton-refined) minimum
  const auto last = read_snapshot_csv(res.snapshot_paths.back());
  CHECK(last.time == doctest::Approx(0.4));
  for (double v : last.values) CHECK(std::abs(v) < 1e-15);

  // identical configs reproduce byte-identical outputs
  const auto out2 = dir.file("runB");
  const auto res2 = run_experiment(cfg, out2);
  CHECK(slurp(res2.manifest_path) == slurp(res.manifest_path));
  CHECK(slurp(out2 + "/tracker.csv") == slurp(out + "/tracker.csv"));
  for (size_t i = 0; i < res.snapshot_paths.size(); ++i)
    CHECK(slurp(res2.snapshot_paths[i]) == slurp(res.snapshot_paths[i]));
}

TEST_CASE("snapshot cadence and tracker can be configured away") {
  std::map<std::string, std::string> kv{
      {"potential", "cubic"}, {"d", "1"},
      {"r_max", "10"},        {"dr", "0.1"},
      {"dt", "0.02"},         {"t_end", "0.4"},
      {"observe_every", "10"}, {"snapshot_every", "20"},
      {"tracker", "false"},   {"initial", "homogeneous"},
      {"initial.m", "0"}};
  const auto cfg = Config::parse_string(render(kv), "unit");

  testutil::ScopedDir dir("experiment");
  const auto out = dir.file("quiet");
  const auto res = run_experiment(cfg, out);
  CHECK(res.snapshot_paths.size() == 2);  // steps 0 and 20 only
  CHECK(!std::filesystem::exists(out + "/tracker.csv"));

  const auto man = nlohmann::json::parse(slurp(res.manifest_path));
  CHECK(man["files"].size() == 2);
}

TEST_SUITE_END();
