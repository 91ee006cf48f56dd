#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace terralab::num {

TridiagSolver::TridiagSolver(std::span<const double> sub,
                             std::span<const double> diag,
                             std::span<const double> sup) {
  const size_t n = diag.size();
  sub_.assign(sub.begin(), sub.end());
  cp_.resize(n);
  inv_.resize(n);
  double denom = diag[0];
  inv_[0] = 1.0 / denom;
  cp_[0] = sup[0] * inv_[0];
  for (size_t k = 1; k < n; ++k) {
    denom = diag[k] - sub_[k] * cp_[k - 1];
    inv_[k] = 1.0 / denom;
    cp_[k] = (k + 1 < n ? sup[k] : 0.0) * inv_[k];
  }
}

void TridiagSolver::solve(std::span<double> rhs) const {
  const size_t n = cp_.size();
  rhs[0] *= inv_[0];
  for (size_t k = 1; k < n; ++k)
    rhs[k] = (rhs[k] - sub_[k] * rhs[k - 1]) * inv_[k];
  for (size_t k = n - 1; k-- > 0;) rhs[k] -= cp_[k] * rhs[k + 1];
}

namespace {

// locate xq in a uniform ascending grid; returns cell index in [0, n-2]
// or -1 / n-1 for out-of-range left / right
long locate_uniform(double x0, double dx, size_t n, double xq) {
  if (xq <= x0) return xq < x0 ? -1 : 0;
  const double last = x0 + dx * static_cast<double>(n - 1);
  if (xq >= last) return xq > last ? static_cast<long>(n) - 1 : static_cast<long>(n) - 2;
  long k = static_cast<long>(std::floor((xq - x0) / dx));
  if (k < 0) k = 0;
  if (k > static_cast<long>(n) - 2) k = static_cast<long>(n) - 2;
  return k;
}

}  // namespace

double hermite_eval(std::span<const double> x, std::span<const double> y,
                    std::span<const double> dy, double xq) {
  const size_t n = x.size();
  const double dx = x[1] - x[0];
  const long k = locate_uniform(x[0], dx, n, xq);
  if (k < 0) return y.front();
  if (k >= static_cast<long>(n) - 1) return y.back();
  const double t = (xq - x[k]) / dx;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * y[k] + h10 * dx * dy[k] + h01 * y[k + 1] + h11 * dx * dy[k + 1];
}

double hermite_eval_deriv(std::span<const double> x, std::span<const double> y,
                          std::span<const double> dy, double xq) {
  const size_t n = x.size();
  const double dx = x[1] - x[0];
  const long k = locate_uniform(x[0], dx, n, xq);
  // the value extension outside the grid is constant
  if (k < 0 || k >= static_cast<long>(n) - 1) return 0.0;
  const double t = (xq - x[k]) / dx;
  const double t2 = t * t;
  const double g00 = (6 * t2 - 6 * t) / dx, g10 = 3 * t2 - 4 * t + 1;
  const double g01 = (-6 * t2 + 6 * t) / dx, g11 = 3 * t2 - 2 * t;
  return g00 * y[k] + g10 * dy[k] + g01 * y[k + 1] + g11 * dy[k + 1];
}

double catmull_eval(double x0, double dx, std::span<const double> y, double xq) {
  const size_t n = y.size();
  const long k = locate_uniform(x0, dx, n, xq);
  if (k < 0) return y.front();
  if (k >= static_cast<long>(n) - 1) return y.back();
  const double sl = k > 0 ? (y[k + 1] - y[k - 1]) / 2 : y[k + 1] - y[k];
  const double sr = k + 2 < static_cast<long>(n) ? (y[k + 2] - y[k]) / 2
                                                 : y[k + 1] - y[k];
  const double t = (xq - (x0 + k * dx)) / dx;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y[k] + (t3 - 2 * t2 + t) * sl +
         (-2 * t3 + 3 * t2) * y[k + 1] + (t3 - t2) * sr;
}

double trapezoid(std::span<const double> y, double dx) {
  if (y.size() < 2) return 0;
  double s = 0.5 * (y.front() + y.back());
  for (size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
  return s * dx;
}

double trapezoid_window(double x0, double dx, std::span<const double> y,
                        double a, double b) {
  const size_t n = y.size();
  const double xlast = x0 + dx * static_cast<double>(n - 1);
  a = std::max(a, x0);
  b = std::min(b, xlast);
  if (b <= a) return 0;
  auto lin = [&](double xq) {
    const long k = locate_uniform(x0, dx, n, xq);
    const double t = (xq - (x0 + k * dx)) / dx;
    return y[k] * (1 - t) + y[k + 1] * t;
  };
  const long ka = locate_uniform(x0, dx, n, a);
  const long kb = locate_uniform(x0, dx, n, b);
  if (ka == kb)  // both ends inside one cell
    return 0.5 * (lin(a) + lin(b)) * (b - a);
  double s = 0;
  const double ra = x0 + (ka + 1) * dx;
  s += 0.5 * (lin(a) + y[ka + 1]) * (ra - a);
  for (long k = ka + 1; k < kb; ++k) s += 0.5 * (y[k] + y[k + 1]) * dx;
  const double rb = x0 + kb * dx;
  s += 0.5 * (y[kb] + lin(b)) * (b - rb);
  return s;
}

void rk45_integrate(
    const std::function<void(double, std::span<const double>, std::span<double>)>& f,
    double x0, std::span<const double> y0, double tol, double x_max,
    const std::function<bool(const OdeNode&)>& keep_going,
    std::vector<OdeNode>& nodes, double h_max) {
  // Cash-Karp tableau
  static const double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
  static const double b21 = 0.2;
  static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
  static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
  static const double b51 = -11.0 / 54, b52 = 2.5, b53 = -70.0 / 27,
                      b54 = 35.0 / 27;
  static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512,
                      b63 = 575.0 / 13824, b64 = 44275.0 / 110592,
                      b65 = 253.0 / 4096;
  static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                      c6 = 512.0 / 1771;
  static const double d1 = c1 - 2825.0 / 27648, d3 = c3 - 18575.0 / 48384,
                      d4 = c4 - 13525.0 / 55296, d5 = -277.0 / 14336,
                      d6 = c6 - 0.25;

  const size_t m = y0.size();
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), yt(m), ynew(m);
  double x = x0, h = std::min(1e-3, h_max);

  f(x, y, k1);
  nodes.push_back({x, y, k1});
  if (!keep_going(nodes.back())) return;

  while (x < x_max) {
    h = std::min(h, x_max - x);
    for (size_t i = 0; i < m; ++i) yt[i] = y[i] + h * b21 * k1[i];
    f(x + a2 * h, yt, k2);
    for (size_t i = 0; i < m; ++i)
      yt[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
    f(x + a3 * h, yt, k3);
    for (size_t i = 0; i < m; ++i)
      yt[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
    f(x + a4 * h, yt, k4);
    for (size_t i = 0; i < m; ++i)
      yt[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
    f(x + a5 * h, yt, k5);
    for (size_t i = 0; i < m; ++i)
      yt[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] +
                          b64 * k4[i] + b65 * k5[i]);
    f(x + a6 * h, yt, k6);

    double err = 0;
    for (size_t i = 0; i < m; ++i) {
      ynew[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c6 * k6[i]);
      const double e =
          h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]);
      const double sc = tol * (1.0 + std::abs(y[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      x += h;
      y = ynew;
      f(x, y, k1);
      nodes.push_back({x, y, k1});
      if (!keep_going(nodes.back())) return;
    }
    double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    fac = std::clamp(fac, 0.2, 5.0);
    h = std::min(h * fac, h_max);
    if (h < 1e-14) throw std::runtime_error("ode step underflow");
  }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  LineFit out;
  const size_t n = x.size();
  out.n = static_cast<int>(n);
  if (n < 2) return out;
  double sx = 0, sy = 0;
  for (size_t k = 0; k < n; ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (size_t k = 0; k < n; ++k) {
      const double e = y[k] - (out.intercept + out.slope * x[k]);
      rss += e * e;
    }
    out.stderr_slope = std::sqrt(rss / (n - 2) / sxx);
  }
  return out;
}

std::vector<double> poly_mul(std::span<const double> a, std::span<const double> b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

std::vector<double> poly_antideriv(std::span<const double> a) {
  std::vector<double> c(a.size() + 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) c[i + 1] = a[i] / static_cast<double>(i + 1);
  return c;
}

std::vector<double> poly_deriv(std::span<const double> a) {
  if (a.size() <= 1) return {0.0};
  std::vector<double> c(a.size() - 1);
  for (size_t i = 1; i < a.size(); ++i) c[i - 1] = a[i] * static_cast<double>(i);
  return c;
}

double poly_eval(std::span<const double> a, double x) {
  double v = 0;
  for (size_t i = a.size(); i-- > 0;) v = v * x + a[i];
  return v;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace terralab::num
