#pragma once

// Internal numerical helpers shared across the library. Not installed.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace terralab::num {

// ---- tridiagonal systems ----

// Thomas solve with the forward elimination factored once; reusable across
// right-hand sides (the matrix is fixed per integrator setup).
class TridiagSolver {
 public:
  TridiagSolver() = default;
  // sub[0] and sup[n-1] are ignored.
  TridiagSolver(std::span<const double> sub, std::span<const double> diag,
                std::span<const double> sup);
  void solve(std::span<double> rhs) const;  // in place
  size_t size() const { return cp_.size(); }

 private:
  std::vector<double> sub_, cp_, inv_;
};

// ---- interpolation on uniform grids ----

// Cubic Hermite with supplied derivatives; clamps to endpoint values
// outside the grid (so the derivative there is zero).
double hermite_eval(std::span<const double> x, std::span<const double> y,
                    std::span<const double> dy, double xq);
double hermite_eval_deriv(std::span<const double> x, std::span<const double> y,
                          std::span<const double> dy, double xq);

// Catmull-Rom (finite-difference slopes) for sampled fields without stored
// derivatives; clamps to endpoint values.
double catmull_eval(double x0, double dx, std::span<const double> y, double xq);

// ---- quadrature ----

double trapezoid(std::span<const double> y, double dx);

// Trapezoid of y over [a, b] subinterval of the uniform grid (x0 + k dx),
// with linearly interpolated partial cells at both ends.
double trapezoid_window(double x0, double dx, std::span<const double> y,
                        double a, double b);

// ---- dense-output adaptive Runge-Kutta (Cash-Karp 5(4)) ----

struct OdeNode {
  double x;
  std::vector<double> y;
  std::vector<double> dy;
};

// Integrate y' = f(x, y) from x0 while `keep_going(node)` returns true, with
// absolute/relative tolerance tol. Every accepted node (including the first)
// is appended to `nodes`. Stops when x exceeds x_max. h_max bounds the step,
// which also bounds the cubic-Hermite dense-output error between nodes.
void rk45_integrate(
    const std::function<void(double, std::span<const double>, std::span<double>)>& f,
    double x0, std::span<const double> y0, double tol, double x_max,
    const std::function<bool(const OdeNode&)>& keep_going,
    std::vector<OdeNode>& nodes, double h_max = 0.25);

// ---- regression ----

struct LineFit {
  double slope = 0, intercept = 0, stderr_slope = 0;
  int n = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// ---- small polynomial algebra (coefficient vectors, ascending powers) ----

std::vector<double> poly_mul(std::span<const double> a, std::span<const double> b);
std::vector<double> poly_antideriv(std::span<const double> a);  // constant 0
std::vector<double> poly_deriv(std::span<const double> a);
double poly_eval(std::span<const double> a, double x);

// ---- formatting ----

// Shortest exact round-trip is not needed; fixed "%.17g" keeps files
// deterministic and re-reads exact.
std::string fmt17(double v);

}  // namespace terralab::num
