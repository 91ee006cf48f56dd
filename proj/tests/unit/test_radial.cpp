#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "terralab/front.hpp"
#include "terralab/potential.hpp"
#include "terralab/radial.hpp"
#include "test_util.hpp"

using namespace terralab;

namespace {

RadialGrid grid_of(double r_max, int n_nodes, int d) {
  RadialGrid g;
  g.r_max = r_max;
  g.n_nodes = n_nodes;
  g.d = d;
  return g;
}

double sup_diff(const RadialField& a, const RadialField& b) {
  double m = 0;
  for (size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("radial");

TEST_CASE("grid geometry") {
  const auto g = grid_of(2.0, 5, 3);
  CHECK(g.dr() == 0.5);
  CHECK(g.r(0) == 0.0);
  CHECK(g.r(3) == 1.5);
  CHECK(g.r(4) == g.r_max);
}

TEST_CASE("rhs vanishes at a homogeneous minimum") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 26, 3);
  const auto f = initial_homogeneous(g, std::vector<double>{1.0});
  std::vector<double> rhs(f.values.size(), 1.0);
  semi_discrete_rhs(f, spec, rhs);
  for (double v : rhs) CHECK(v == 0.0);
}

TEST_CASE("rhs is exact on a quadratic profile") {
  // u = alpha r^2 with V = u^2/2: centered differences reproduce u_rr = 2 alpha
  // and u_r/r = 2 alpha exactly, and the origin regularization matches.
  PotentialSpec spec;
  spec.name = "quadratic";
  spec.n = 1;
  spec.value = [](std::span<const double> u) { return 0.5 * u[0] * u[0]; };
  spec.gradient = [](std::span<const double> u, std::span<double> g) {
    g[0] = u[0];
  };
  spec.hessian = [](std::span<const double>, std::span<double> h) { h[0] = 1.0; };
  const double alpha = 0.375;
  for (int d : {1, 2, 3}) {
    const auto g = grid_of(4.0, 17, d);
    RadialField f;
    f.grid = g;
    f.n = 1;
    f.values.resize(g.n_nodes);
    for (int k = 0; k < g.n_nodes; ++k) f.values[k] = alpha * g.r(k) * g.r(k);
    std::vector<double> rhs(f.values.size());
    semi_discrete_rhs(f, spec, rhs);
    for (int k = 0; k + 1 < g.n_nodes; ++k) {
      const double want = 2.0 * alpha * d - f.values[k];
      CHECK(rhs[k] == doctest::Approx(want).epsilon(1e-13));
    }
  }
}

TEST_CASE("d=1 interior stencil has no drift term") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(3.0, 13, 1);
  RadialField f;
  f.grid = g;
  f.n = 1;
  f.values.resize(g.n_nodes);
  for (int k = 0; k < g.n_nodes; ++k) f.values[k] = std::sin(0.7 * g.r(k));
  std::vector<double> rhs(f.values.size());
  semi_discrete_rhs(f, spec, rhs);
  const double idr2 = 1.0 / (g.dr() * g.dr());
  std::vector<double> u(1), gr(1);
  for (int k = 1; k + 1 < g.n_nodes; ++k) {
    u[0] = f.values[k];
    spec.gradient(u, gr);
    const double want =
        (f.values[k + 1] - 2.0 * f.values[k] + f.values[k - 1]) * idr2 - gr[0];
    CHECK(rhs[k] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("step guards reject oversized dt") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 26, 3);  // dr = 0.2
  const auto f = initial_homogeneous(g, std::vector<double>{1.0});

  IntegratorConfig integ;
  integ.scheme = Scheme::explicit_rk4;
  integ.dt = 0.009;  // over 0.2 dr^2 = 0.008
  CHECK_THROWS_WITH_AS(
      step(f, spec, integ),
      "rk4 step guard violated: dt must satisfy dt <= 0.2 dr^2", ConfigError);

  integ.scheme = Scheme::imex_cn;
  integ.dt = 0.11;  // over 0.5 dr = 0.1
  CHECK_THROWS_WITH_AS(step(f, spec, integ),
                       "imex step guard violated: dt must satisfy dt <= 0.5 dr",
                       ConfigError);

  integ.dt = 0.0;
  CHECK_THROWS_WITH_AS(step(f, spec, integ), "dt must be positive", ConfigError);

  integ.dt = 0.05;
  integ.outer_bc = OuterBc::dirichlet_value;
  integ.outer_value = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(step(f, spec, integ),
                       "dirichlet outer value must have one entry per component",
                       ConfigError);
}

TEST_CASE("homogeneous minimum is a fixed point of both schemes") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 51, 3);  // dr = 0.1

  for (auto scheme : {Scheme::imex_cn, Scheme::explicit_rk4}) {
    auto f = initial_homogeneous(g, std::vector<double>{1.0});
    IntegratorConfig integ;
    integ.scheme = scheme;
    integ.dt = scheme == Scheme::imex_cn ? 0.05 : 0.002;
    integ.t_end = 1.0;
    const auto out = integrate(f, spec, integ);
    CHECK(out.time == doctest::Approx(1.0));
    for (double v : out.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("two-component homogeneous minimum stays put") {
  const auto spec = make_builtin("coupled_wells");
  const auto an = analyze_potential(spec, builtin_box("coupled_wells"));
  REQUIRE(an.minima.size() == 4);
  const auto& m = an.minima[0].location;
  const auto g = grid_of(4.0, 41, 2);
  auto f = initial_homogeneous(g, m);
  IntegratorConfig integ;
  integ.dt = 0.05;
  integ.t_end = 0.5;
  const auto out = integrate(f, spec, integ);
  REQUIRE(out.n == 2);
  for (int j = 0; j < 2; ++j)
    for (double v : out.comp(j)) CHECK(v == doctest::Approx(m[j]).epsilon(1e-12));
}

TEST_CASE("integration is deterministic bit for bit") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(8.0, 81, 3);
  const auto f0 = initial_bump(g, std::vector<double>{0.0},
                               std::vector<double>{0.4}, 2.0, 1.0);
  IntegratorConfig integ;
  integ.dt = 0.05;
  integ.t_end = 2.0;
  const auto a = integrate(f0, spec, integ);
  const auto b = integrate(f0, spec, integ);
  REQUIRE(a.values.size() == b.values.size());
  CHECK(a.time == b.time);
  for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("single step matches a one-step integrate") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(6.0, 61, 2);
  const auto f0 = initial_plateau(g, std::vector<double>{1.0},
                                  std::vector<double>{0.0}, 3.0, 1.0);
  IntegratorConfig integ;
  integ.dt = 0.05;
  integ.t_end = 0.05;
  const auto via_step = step(f0, spec, integ);
  const auto via_integrate = integrate(f0, spec, integ);
  CHECK(via_step.time == via_integrate.time);
  CHECK(sup_diff(via_step, via_integrate) == 0.0);
}

TEST_CASE("dirichlet outer value is clamped throughout") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(10.0, 101, 3);
  auto f = initial_homogeneous(g, std::vector<double>{1.0});
  IntegratorConfig integ;
  integ.dt = 0.05;
  integ.t_end = 1.0;
  integ.outer_bc = OuterBc::dirichlet_value;
  integ.outer_value = {0.0};

  std::vector<double> boundary;
  ObserverSlot slot;
  slot.every = 1;
  slot.fn = [&](const RadialField& s) {
    boundary.push_back(s.comp(0)[s.grid.n_nodes - 1]);
  };
  const auto out = integrate(f, spec, integ, {slot});
  REQUIRE(boundary.size() > 2);
  for (double v : boundary) CHECK(v == 0.0);
  // the clamp pulls the profile away from 1 near the boundary but not yet
  // near the origin
  CHECK(out.comp(0)[g.n_nodes - 2] < 1.0);
  CHECK(out.comp(0)[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("observer cadence covers initial, periodic and final states") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 26, 3);
  const auto f = initial_homogeneous(g, std::vector<double>{1.0});
  IntegratorConfig integ;
  integ.dt = 0.1;
  integ.t_end = 1.0;
  integ.observe_every = 5;

  std::vector<double> def_times, odd_times;
  ObserverSlot use_default;  // every = 0 falls back to integ.observe_every
  use_default.fn = [&](const RadialField& s) { def_times.push_back(s.time); };
  ObserverSlot every3;
  every3.every = 3;
  every3.fn = [&](const RadialField& s) { odd_times.push_back(s.time); };

  integrate(f, spec, integ, {use_default, every3});

  REQUIRE(def_times.size() == 3);
  CHECK(def_times[0] == 0.0);
  CHECK(def_times[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(def_times[2] == doctest::Approx(1.0).epsilon(1e-14));

  // steps 3, 6, 9 plus the forced initial and final states
  REQUIRE(odd_times.size() == 5);
  CHECK(odd_times[0] == 0.0);
  CHECK(odd_times[1] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(odd_times[3] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(odd_times[4] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("integration continues from a nonzero start time") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 26, 3);
  auto f = initial_homogeneous(g, std::vector<double>{1.0});
  f.time = 7.0;
  IntegratorConfig integ;
  integ.dt = 0.1;
  integ.t_end = 0.5;  // duration of this leg
  std::vector<double> times;
  ObserverSlot slot;
  slot.every = 100;
  slot.fn = [&](const RadialField& s) { times.push_back(s.time); };
  const auto out = integrate(f, spec, integ, {slot});
  REQUIRE(times.size() == 2);
  CHECK(times.front() == 7.0);
  CHECK(out.time == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("blow-up raises an instability error") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(5.0, 11, 3);  // dr = 0.5
  auto f = initial_homogeneous(g, std::vector<double>{100.0});
  IntegratorConfig integ;
  integ.scheme = Scheme::explicit_rk4;
  integ.dt = 0.05;
  integ.t_end = 5.0;
  CHECK_THROWS_WITH_AS(integrate(f, spec, integ),
                       doctest::Contains("blow-up or instability detected"),
                       InstabilityError);
}

TEST_CASE("schemes agree on a smooth invasion run") {
  const auto spec = make_builtin("cubic");
  const auto g = grid_of(10.0, 51, 2);  // dr = 0.2
  const auto f0 = initial_plateau(g, std::vector<double>{1.0},
                                  std::vector<double>{0.0}, 4.0, 2.0);

  IntegratorConfig rk;
  rk.scheme = Scheme::explicit_rk4;
  rk.dt = 0.004;
  rk.t_end = 0.8;
  const auto a = integrate(f0, spec, rk);

  IntegratorConfig imex;
  imex.scheme = Scheme::imex_cn;
  imex.dt = 0.004;
  imex.t_end = 0.8;
  const auto b = integrate(f0, spec, imex);

  CHECK(sup_diff(a, b) < 1e-5);
  // and the run did something: the interface moved off its initial ramp
  CHECK(sup_diff(a, f0) > 1e-3);
}

TEST_CASE("plateau profile hits its levels and midpoint") {
  const auto g = grid_of(10.0, 101, 3);
  const auto f = initial_plateau(g, std::vector<double>{1.0},
                                 std::vector<double>{-0.5}, 4.0, 2.0);
  auto c = f.comp(0);
  CHECK(c[0] == 1.0);
  CHECK(c[20] == 1.0);   // r = 2, inside the plateau
  CHECK(c[30] == 1.0);   // r = 3, ramp starts here
  CHECK(c[40] == doctest::Approx(0.25));  // r = r0, half-way
  CHECK(c[50] == -0.5);  // r = 5, ramp done
  CHECK(c[100] == -0.5);
  for (int k = 30; k < 50; ++k) CHECK(c[k] >= c[k + 1]);

  CHECK_THROWS_WITH_AS(initial_plateau(g, std::vector<double>{1.0},
                                       std::vector<double>{0.0}, 9.5, 2.0),
                       "initial data exceeds domain", ConfigError);
  CHECK_THROWS_WITH_AS(initial_plateau(g, std::vector<double>{1.0},
                                       std::vector<double>{0.0}, 0.5, 2.0),
                       "initial data exceeds domain", ConfigError);
}

TEST_CASE("two-level stack reproduces the plateau") {
  const auto g = grid_of(10.0, 101, 3);
  const auto plat = initial_plateau(g, std::vector<double>{1.0},
                                    std::vector<double>{0.0}, 4.0, 2.0);
  const auto stack = initial_stack(g, {{1.0}, {0.0}}, {4.0}, 2.0);
  CHECK(sup_diff(plat, stack) == 0.0);
}

TEST_CASE("three-level stack orders its terraces") {
  const auto g = grid_of(20.0, 201, 2);
  const auto f = initial_stack(g, {{-1.0}, {0.0}, {1.0}}, {6.0, 13.0}, 2.0);
  auto c = f.comp(0);
  CHECK(c[0] == -1.0);
  CHECK(c[90] == 0.0);    // r = 9, between the ramps
  CHECK(c[200] == 1.0);
  CHECK(c[60] == doctest::Approx(-0.5));
  CHECK(c[130] == doctest::Approx(0.5));

  CHECK_THROWS_WITH_AS(initial_stack(g, {{1.0}}, {}, 1.0),
                       "stack needs L levels and L-1 radii", ConfigError);
  CHECK_THROWS_WITH_AS(initial_stack(g, {{1.0}, {0.0}}, {6.0, 13.0}, 1.0),
                       "stack needs L levels and L-1 radii", ConfigError);
  CHECK_THROWS_WITH_AS(initial_stack(g, {{1.0}, {0.0}, {2.0}}, {13.0, 6.0}, 1.0),
                       "stack radii must increase", ConfigError);
  CHECK_THROWS_WITH_AS(initial_stack(g, {{1.0}, {0.0}, {2.0}}, {6.0, 19.9}, 1.0),
                       "initial data exceeds domain", ConfigError);
}

TEST_CASE("bump is even through the origin") {
  const auto g = grid_of(10.0, 101, 3);
  const double A = 0.3, r0 = 2.0, w = 1.5;
  const auto f = initial_bump(g, std::vector<double>{0.5}, std::vector<double>{A},
                              r0, w);
  auto c = f.comp(0);
  const double at0 = 0.5 + 2.0 * A * std::exp(-r0 * r0 / (w * w));
  CHECK(c[0] == doctest::Approx(at0).epsilon(1e-15));
  // peak sits near r0 and decays outward
  CHECK(c[20] > c[50]);
  CHECK(c[100] == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_WITH_AS(initial_bump(g, std::vector<double>{0.5},
                                    std::vector<double>{A}, 11.0, w),
                       "initial data exceeds domain", ConfigError);
}

TEST_CASE("front seed transplants the connecting profile") {
  const auto spec = make_builtin("cubic");
  const auto an = analyze_potential(spec, builtin_box("cubic"));
  REQUIRE(an.minima.size() == 2);
  const auto profile = normalize_front(
      solve_bistable_front(spec, an.minima[0], an.minima[1], 0.0, 1.0),
      an.d_esc);

  const auto g = grid_of(40.0, 201, 3);
  const double r0 = 20.0;
  const auto f = initial_front_seed(g, profile, r0);
  CHECK(f.n == 1);
  CHECK(f.comp(0)[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(f.comp(0)[200] == doctest::Approx(0.0).epsilon(1e-4));
  for (int k = 0; k < g.n_nodes; ++k)
    CHECK(f.comp(0)[k] == profile.eval(0, g.r(k) - r0));

  CHECK_THROWS_WITH_AS(initial_front_seed(g, profile, 41.0),
                       "initial data exceeds domain", ConfigError);
}

TEST_CASE("snapshot files round-trip exactly") {
  testutil::ScopedDir dir("snapshot");
  const auto g = grid_of(3.0, 31, 3);
  auto f = initial_bump(g, std::vector<double>{1.0 / 3.0},
                        std::vector<double>{0.123456789012345}, 1.0, 0.7);
  f.time = 12.25;
  const auto path = dir.file("snap.csv");
  write_snapshot_csv(f, path);
  const auto back = read_snapshot_csv(path);
  CHECK(back.time == f.time);
  CHECK(back.n == f.n);
  CHECK(back.grid.d == f.grid.d);
  CHECK(back.grid.n_nodes == f.grid.n_nodes);
  CHECK(back.grid.r_max == doctest::Approx(f.grid.r_max).epsilon(1e-15));
  REQUIRE(back.values.size() == f.values.size());
  for (size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == f.values[i]);

  CHECK_THROWS_WITH_AS(read_snapshot_csv(dir.file("absent.csv")),
                       doctest::Contains("cannot open"), ConfigError);
}

TEST_SUITE_END();
