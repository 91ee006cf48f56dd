#include "numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace terralab;

namespace {

// y = A x for a tridiagonal A given by (sub, diag, sup)
std::vector<double> tridiag_apply(const std::vector<double>& sub,
                                  const std::vector<double>& diag,
                                  const std::vector<double>& sup,
                                  const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    y[i] = diag[i] * x[i];
    if (i > 0) y[i] += sub[i] * x[i - 1];
    if (i + 1 < n) y[i] += sup[i] * x[i + 1];
  }
  return y;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("tridiagonal solve recovers known solutions") {
  std::mt19937 rng(91);
  std::uniform_real_distribution<double> off(-1.0, 1.0);
  for (size_t n : {1u, 2u, 5u, 50u, 501u}) {
    std::vector<double> sub(n), diag(n), sup(n), x(n);
    for (size_t i = 0; i < n; ++i) {
      sub[i] = off(rng);
      sup[i] = off(rng);
      diag[i] = 4.0 + off(rng);  // dominant, well conditioned
      x[i] = off(rng);
    }
    auto rhs = tridiag_apply(sub, diag, sup, x);
    num::TridiagSolver solver(sub, diag, sup);
    REQUIRE(solver.size() == n);
    solver.solve(rhs);
    for (size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));
  }
}

TEST_CASE("tridiagonal solver is reusable across right-hand sides") {
  std::vector<double> sub{0, 1, 1}, diag{2, 2, 2}, sup{1, 1, 0};
  num::TridiagSolver solver(sub, diag, sup);
  std::vector<double> ones{1, 1, 1};
  auto b1 = tridiag_apply(sub, diag, sup, ones);
  auto b2 = tridiag_apply(sub, diag, sup, {1, 0, -1});
  solver.solve(b1);
  solver.solve(b2);
  for (int i = 0; i < 3; ++i) CHECK(b1[i] == doctest::Approx(1.0));
  CHECK(b2[0] == doctest::Approx(1.0));
  CHECK(b2[1] == doctest::Approx(0.0));
  CHECK(b2[2] == doctest::Approx(-1.0));
}

TEST_CASE("hermite interpolation is exact on cubics") {
  auto f = [](double x) { return x * x * x - 2.0 * x * x + x - 0.5; };
  auto df = [](double x) { return 3.0 * x * x - 4.0 * x + 1.0; };
  const int n = 11;
  std::vector<double> x(n), y(n), dy(n);
  for (int i = 0; i < n; ++i) {
    x[i] = -1.0 + 0.4 * i;
    y[i] = f(x[i]);
    dy[i] = df(x[i]);
  }
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> q(-1.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double xq = q(rng);
    CHECK(num::hermite_eval(x, y, dy, xq) == doctest::Approx(f(xq)).epsilon(1e-13));
    CHECK(num::hermite_eval_deriv(x, y, dy, xq) == doctest::Approx(df(xq)).epsilon(1e-12));
  }
  // clamped beyond the grid
  CHECK(num::hermite_eval(x, y, dy, -5.0) == y.front());
  CHECK(num::hermite_eval(x, y, dy, 50.0) == y.back());
  CHECK(num::hermite_eval_deriv(x, y, dy, -5.0) == 0.0);
}

TEST_CASE("catmull-rom reproduces quadratics away from the ends") {
  auto f = [](double x) { return 3.0 * x * x - x + 2.0; };
  const double x0 = 0.0, dx = 0.1;
  std::vector<double> y(21);
  for (size_t i = 0; i < y.size(); ++i) y[i] = f(x0 + dx * i);
  for (double xq = 0.15; xq < 1.85; xq += 0.037)
    CHECK(num::catmull_eval(x0, dx, y, xq) == doctest::Approx(f(xq)).epsilon(1e-12));
  CHECK(num::catmull_eval(x0, dx, y, -1.0) == y.front());
  CHECK(num::catmull_eval(x0, dx, y, 9.0) == y.back());
}

TEST_CASE("trapezoid quadrature") {
  // exact for linear data
  std::vector<double> lin(11);
  for (int i = 0; i < 11; ++i) lin[i] = 2.0 + 3.0 * (0.5 * i);
  CHECK(num::trapezoid(lin, 0.5) == doctest::Approx(2.0 * 5.0 + 1.5 * 25.0).epsilon(1e-14));

  // second order on smooth data
  const int n = 2001;
  const double dx = M_PI / (n - 1);
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = std::sin(i * dx);
  CHECK(std::abs(num::trapezoid(s, dx) - 2.0) < 1e-6);
}

TEST_CASE("windowed trapezoid handles partial cells") {
  const double x0 = 0.0, dx = 0.25;
  std::vector<double> y(9);
  for (int i = 0; i < 9; ++i) y[i] = 1.0 + 2.0 * (x0 + dx * i);  // linear: exact

  auto exact = [](double a, double b) { return (b - a) + (b * b - a * a); };
  CHECK(num::trapezoid_window(x0, dx, y, 0.0, 2.0) == doctest::Approx(exact(0, 2)).epsilon(1e-14));
  CHECK(num::trapezoid_window(x0, dx, y, 0.1, 1.93) == doctest::Approx(exact(0.1, 1.93)).epsilon(1e-13));
  // both endpoints inside one cell
  CHECK(num::trapezoid_window(x0, dx, y, 0.05, 0.2) == doctest::Approx(exact(0.05, 0.2)).epsilon(1e-13));
  // clipped to the grid
  CHECK(num::trapezoid_window(x0, dx, y, -1.0, 5.0) == doctest::Approx(exact(0, 2)).epsilon(1e-13));
  // empty window
  CHECK(num::trapezoid_window(x0, dx, y, 1.5, 1.5) == 0.0);
}

TEST_CASE("adaptive runge-kutta hits tight tolerances") {
  auto decay = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0];
  };
  std::vector<double> y0{1.0};
  std::vector<num::OdeNode> nodes;
  num::rk45_integrate(decay, 0.0, y0, 1e-12, 5.0,
                      [](const num::OdeNode&) { return true; }, nodes);
  REQUIRE(nodes.size() > 2);
  CHECK(nodes.front().x == 0.0);
  CHECK(nodes.back().x >= 5.0);
  CHECK(std::abs(nodes.back().y[0] - std::exp(-nodes.back().x)) < 1e-10);
  // dy recorded alongside y
  CHECK(nodes.back().dy[0] == doctest::Approx(-nodes.back().y[0]).epsilon(1e-12));
}

TEST_CASE("runge-kutta respects the step cap and the stop predicate") {
  auto unit = [](double, std::span<const double>, std::span<double> dy) {
    dy[0] = 1.0;
  };
  std::vector<double> y0{0.0};
  std::vector<num::OdeNode> nodes;
  num::rk45_integrate(unit, 0.0, y0, 1e-10, 100.0,
                      [](const num::OdeNode& nd) { return nd.y[0] < 2.0; },
                      nodes, 0.05);
  for (size_t i = 1; i < nodes.size(); ++i)
    CHECK(nodes[i].x - nodes[i - 1].x <= 0.05 + 1e-12);
  CHECK(nodes.back().y[0] >= 2.0);
  CHECK(nodes.back().y[0] < 2.0 + 0.05 + 1e-9);
}

TEST_CASE("runge-kutta reports unreachable integrations") {
  // y' = y^2 from y(0) = 1 blows up at x = 1
  auto riccati = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[0] * y[0];
  };
  std::vector<double> y0{1.0};
  std::vector<num::OdeNode> nodes;
  auto run = [&] {
    num::rk45_integrate(riccati, 0.0, y0, 1e-10, 2.0,
                        [](const num::OdeNode&) { return true; }, nodes);
  };
  CHECK_THROWS_AS(run(), std::runtime_error);
}

TEST_CASE("line fit recovers slope and uncertainty") {
  std::vector<double> x{0, 1, 2, 3, 4, 5}, y(6);
  for (int i = 0; i < 6; ++i) y[i] = 0.7 - 0.3 * x[i];
  auto fit = num::fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fit.stderr_slope == doctest::Approx(0.0));
  CHECK(fit.n == 6);

  // hand-checked 4-point fit: y = {0, 1, 1, 2} over x = {0, 1, 2, 3}
  std::vector<double> xs{0, 1, 2, 3}, ys{0, 1, 1, 2};
  fit = num::fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(0.1).epsilon(1e-12));
  // RSS = 0.2, sxx = 5, stderr = sqrt(0.2/2/5)
  CHECK(fit.stderr_slope == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
}

TEST_CASE("polynomial helpers") {
  std::vector<double> a{1.0, 1.0};   // 1 + x
  std::vector<double> b{1.0, -1.0};  // 1 - x
  auto p = num::poly_mul(a, b);      // 1 - x^2
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == -1.0);

  auto ip = num::poly_antideriv(p);  // x - x^3/3
  CHECK(num::poly_eval(ip, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  auto dip = num::poly_deriv(ip);
  REQUIRE(dip.size() == p.size());
  for (size_t i = 0; i < p.size(); ++i) CHECK(dip[i] == doctest::Approx(p[i]));

  CHECK(num::poly_eval(p, 0.5) == doctest::Approx(0.75));
}

TEST_CASE("fmt17 round-trips doubles exactly") {
  for (double v : {1.0 / 3.0, 0.1, -2.5e300, 3.5e-12, 0.0, -0.35355339059327373}) {
    const std::string s = num::fmt17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

}  // TEST_SUITE
