#include <benchmark/benchmark.h>

#include "terralab/diagnostics.hpp"
#include "terralab/front.hpp"
#include "terralab/potential.hpp"
#include "terralab/radial.hpp"
#include "terralab/terrace.hpp"

using namespace terralab;

namespace {

struct Fixture {
  PotentialSpec spec = make_builtin("cubic");
  PotentialAnalysis analysis = analyze_potential(spec, builtin_box("cubic"));
  FirewallConfig fw = make_firewall_config(analysis, 3, analysis.minima[1]);
  RadialField mid_invasion;

  Fixture() {
    RadialGrid g;
    g.r_max = 200.0;
    g.n_nodes = 2001;
    g.d = 3;
    auto f = initial_plateau(g, analysis.minima[0].location,
                             analysis.minima[1].location, 10.0, 12.0);
    IntegratorConfig integ;
    integ.scheme = Scheme::imex_cn;
    integ.dt = 0.02;
    integ.t_end = 100.0;
    mid_invasion = integrate(std::move(f), spec, integ);
  }
};

const Fixture& fix() {
  static const Fixture f;
  return f;
}

void imex_step(benchmark::State& state) {
  IntegratorConfig integ;
  integ.scheme = Scheme::imex_cn;
  integ.dt = 0.02;
  RadialField f = fix().mid_invasion;
  for (auto _ : state) {
    f = step(f, fix().spec, integ);
    benchmark::DoNotOptimize(f.values.data());
  }
  state.SetItemsProcessed(state.iterations() * f.grid.n_nodes);
}
BENCHMARK(imex_step);

void rk4_step(benchmark::State& state) {
  IntegratorConfig integ;
  integ.scheme = Scheme::explicit_rk4;
  integ.dt = 0.002;
  RadialField f = fix().mid_invasion;
  for (auto _ : state) {
    f = step(f, fix().spec, integ);
    benchmark::DoNotOptimize(f.values.data());
  }
  state.SetItemsProcessed(state.iterations() * f.grid.n_nodes);
}
BENCHMARK(rk4_step);

void tracker_observe(benchmark::State& state) {
  EscapeTracker tracker(fix().fw, fix().spec);
  for (auto _ : state) {
    tracker.observe(fix().mid_invasion);
    benchmark::DoNotOptimize(tracker.series().size());
  }
}
BENCHMARK(tracker_observe);

void auditor_observe(benchmark::State& state) {
  std::vector<double> rhos(25);
  for (int i = 0; i < 25; ++i) rhos[i] = 64.0 + 4.0 * i;
  FirewallAuditor auditor(fix().fw, fix().spec, rhos);
  for (auto _ : state) {
    auditor.observe(fix().mid_invasion);
    benchmark::DoNotOptimize(auditor.report().worst_margin);
  }
}
BENCHMARK(auditor_observe);

void interface_detect(benchmark::State& state) {
  for (auto _ : state) {
    auto hits = detect_interfaces(fix().mid_invasion, fix().analysis.minima,
                                  fix().analysis.d_esc);
    benchmark::DoNotOptimize(hits.size());
  }
}
BENCHMARK(interface_detect);

void front_solve(benchmark::State& state) {
  for (auto _ : state) {
    auto profile =
        solve_bistable_front(fix().spec, fix().analysis.minima[0],
                             fix().analysis.minima[1], 0.0, 1.0);
    benchmark::DoNotOptimize(profile.speed);
  }
}
BENCHMARK(front_solve);

void potential_analysis(benchmark::State& state) {
  for (auto _ : state) {
    auto an = analyze_potential(fix().spec, builtin_box("cubic"));
    benchmark::DoNotOptimize(an.d_esc);
  }
}
BENCHMARK(potential_analysis);

}  // namespace

BENCHMARK_MAIN();
