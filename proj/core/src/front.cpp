#include "terralab/front.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "numerics.hpp"

namespace terralab {

double FrontProfile::eval(int j, double xi) const {
  return num::hermite_eval(xi_grid, comp(j), dcomp(j), xi);
}

double FrontProfile::eval_deriv(int j, double xi) const {
  return num::hermite_eval_deriv(xi_grid, comp(j), dcomp(j), xi);
}

void front_ode_rhs(const PotentialSpec& spec, double c,
                   std::span<const double> y, std::span<double> dy) {
  const int n = spec.n;
  spec.gradient(y.subspan(0, n), dy.subspan(n, n));
  for (int j = 0; j < n; ++j) {
    dy[j] = y[n + j];
    dy[n + j] += -c * y[n + j];
  }
}

namespace {

enum class ShotKind { overshoot, undershoot };

struct Shot {
  ShotKind kind = ShotKind::undershoot;
  std::vector<num::OdeNode> nodes;
  size_t best = 0;                // node closest to the target saddle
  double best_score = std::numeric_limits<double>::infinity();
};

double second_deriv_at(const PotentialSpec& spec, double u) {
  double h;
  std::array<double, 1> pt{u};
  spec.hessian(pt, {&h, 1});
  return h;
}

// unstable rate at phi(-inf) and decaying rate at phi(+inf) of the
// linearization mu^2 + c mu - V'' = 0
double rate_unstable(double c, double vpp) {
  return 0.5 * (-c + std::sqrt(c * c + 4.0 * vpp));
}
double rate_stable(double c, double vpp) {
  return 0.5 * (-c - std::sqrt(c * c + 4.0 * vpp));
}

Shot shoot(const PotentialSpec& spec, double m_lo, double m_hi, double c,
           const FrontSolveOptions& opts, double h_max) {
  const double gap = std::abs(m_hi - m_lo);
  const double sgn = m_hi > m_lo ? 1.0 : -1.0;
  const double mu = rate_unstable(c, second_deriv_at(spec, m_lo));
  const double margin = 1e-3 * gap;

  Shot shot;
  bool decided = false;
  auto keep_going = [&](const num::OdeNode& node) {
    const double dist = std::abs(node.y[0] - m_hi);
    const double score = dist + std::abs(node.y[1]);
    if (score < shot.best_score) {
      shot.best_score = score;
      shot.best = shot.nodes.size() - 1;
    }
    if (sgn * (node.y[0] - m_hi) > margin) {
      shot.kind = ShotKind::overshoot;
      decided = true;
      return false;
    }
    if (sgn * node.y[1] < 0 && sgn * (node.y[0] - m_hi) < -margin) {
      shot.kind = ShotKind::undershoot;
      decided = true;
      return false;
    }
    return true;
  };

  const std::array<double, 2> y0{m_lo + sgn * opts.offset, sgn * opts.offset * mu};
  auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    front_ode_rhs(spec, c, y, dy);
  };
  num::rk45_integrate(rhs, 0.0, y0, opts.ode_tol, opts.xi_max, keep_going,
                      shot.nodes, h_max);
  if (!decided) shot.kind = ShotKind::undershoot;
  return shot;
}

double hermite_cell(double xl, double xr, double yl, double yr, double dl,
                    double dr, double xq, bool deriv) {
  const double h = xr - xl;
  const double t = (xq - xl) / h;
  const double t2 = t * t, t3 = t2 * t;
  if (!deriv)
    return (2 * t3 - 3 * t2 + 1) * yl + (t3 - 2 * t2 + t) * h * dl +
           (-2 * t3 + 3 * t2) * yr + (t3 - t2) * h * dr;
  return ((6 * t2 - 6 * t) / h) * yl + (3 * t2 - 4 * t + 1) * dl +
         ((-6 * t2 + 6 * t) / h) * yr + (3 * t2 - 2 * t) * dr;
}

FrontProfile assemble(const PotentialSpec& spec, double m_lo, double m_hi,
                      double c, const FrontSolveOptions& opts, double dxi) {
  const double sgn = m_hi > m_lo ? 1.0 : -1.0;
  const double gap = std::abs(m_hi - m_lo);
  const double mu_l = rate_unstable(c, second_deriv_at(spec, m_lo));
  const double mu_r = rate_stable(c, second_deriv_at(spec, m_hi));

  Shot shot = shoot(spec, m_lo, m_hi, c, opts, 0.5 * dxi);
  if (shot.best == 0)
    throw SolverError("bracket does not isolate a bistable speed");
  // hand off to the analytic tail while the approach is still dominated by
  // the stable rate; at the closest approach the residual unstable component
  // already bends the derivative away from mu_r * (phi - m_hi)
  size_t seam = shot.best;
  while (seam > 1 && std::abs(shot.nodes[seam].y[0] - m_hi) < 1e-4 * gap) --seam;
  shot.nodes.resize(seam + 1);
  const auto& nodes = shot.nodes;
  const double xi_k = nodes.back().x;
  const double d_seam = nodes.back().y[0] - m_hi;

  // the orbit's own decay rate at the seam differs from the linearized one by
  // the curvature of the stable manifold; using it keeps the junction C^1
  double mu_tail = mu_r;
  if (d_seam != 0.0) {
    const double local = nodes.back().dy[0] / d_seam;
    if (local < 0.0) mu_tail = local;
  }

  // right tail decays from the seam amplitude to below representable
  // influence; the grid extends to cover that and stays symmetric about 0
  double ext = 0;
  if (std::abs(d_seam) > 0)
    ext = std::log(std::abs(d_seam) / (1e-17 * gap)) / std::max(1e-12, -mu_tail);
  const long half = static_cast<long>(std::ceil((xi_k + std::max(0.0, ext)) / dxi));
  const long n_nodes = 2 * half + 1;

  FrontProfile p;
  p.n = 1;
  p.speed = c;
  p.m_minus = {m_lo};
  p.m_plus = {m_hi};
  p.xi_grid.resize(n_nodes);
  p.values.resize(n_nodes);
  p.derivs.resize(n_nodes);

  size_t cell = 0;
  for (long k = 0; k < n_nodes; ++k) {
    const double xi = dxi * static_cast<double>(k - half);
    p.xi_grid[k] = xi;
    if (xi <= 0.0) {
      const double e = std::exp(mu_l * xi);
      p.values[k] = m_lo + sgn * opts.offset * e;
      p.derivs[k] = sgn * opts.offset * mu_l * e;
    } else if (xi >= xi_k) {
      const double e = std::exp(mu_tail * (xi - xi_k));
      p.values[k] = m_hi + d_seam * e;
      p.derivs[k] = d_seam * mu_tail * e;
    } else {
      while (cell + 2 < nodes.size() && nodes[cell + 1].x < xi) ++cell;
      const auto& a = nodes[cell];
      const auto& b = nodes[cell + 1];
      p.values[k] = hermite_cell(a.x, b.x, a.y[0], b.y[0], a.dy[0], b.dy[0], xi, false);
      p.derivs[k] = hermite_cell(a.x, b.x, a.y[0], b.y[0], a.dy[0], b.dy[0], xi, true);
    }
  }
  return p;
}

}  // namespace

FrontProfile solve_bistable_front(const PotentialSpec& spec,
                                  const MinimumPoint& m_minus,
                                  const MinimumPoint& m_plus, double c_lo,
                                  double c_hi, const FrontSolveOptions& opts) {
  if (spec.n != 1)
    throw ConfigError(
        "vector shooting unsupported; use front_residual on externally "
        "supplied profiles");
  const double m_lo = m_minus.location[0];
  const double m_hi = m_plus.location[0];
  if (std::abs(m_hi - m_lo) < 1e-12)
    throw ConfigError("endpoint states coincide");
  if (!(c_lo < c_hi)) throw ConfigError("speed bracket is empty");

  auto kind_at = [&](double c) {
    return shoot(spec, m_lo, m_hi, c, opts, 0.25).kind;
  };
  if (kind_at(c_lo) != ShotKind::overshoot || kind_at(c_hi) != ShotKind::undershoot)
    throw SolverError("bracket does not isolate a bistable speed");

  double lo = c_lo, hi = c_hi;
  while (hi - lo > opts.bisect_width) {
    const double mid = 0.5 * (lo + hi);
    (kind_at(mid) == ShotKind::overshoot ? lo : hi) = mid;
  }
  double c = 0.5 * (lo + hi);
  if (std::abs(c) < opts.speed_zero_tol) c = 0.0;

  FrontProfile best;
  double best_res = std::numeric_limits<double>::infinity();
  double dxi = opts.dxi;
  for (int attempt = 0; attempt < 6; ++attempt) {
    FrontProfile p = assemble(spec, m_lo, m_hi, c, opts, dxi);
    const double res = front_residual(p, spec);
    if (res < best_res) {
      best = std::move(p);
      best_res = res;
    }
    if (best_res <= opts.residual_target) break;
    dxi *= 0.5;
  }
  return best;
}

FrontProfile normalize_front(const FrontProfile& profile, double d_esc) {
  const int n = profile.n;
  const long nn = profile.n_nodes();
  auto amp = [&](long k) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      const double d = profile.comp(j)[k] - profile.m_plus[j];
      s += d * d;
    }
    return std::sqrt(s);
  };

  long last = -1;
  for (long k = nn - 1; k >= 0; --k)
    if (amp(k) >= d_esc) {
      last = k;
      break;
    }
  if (last < 0 || last == nn - 1)
    throw SolverError("profile never escapes d_esc");

  // root of |phi(xi) - m_plus| = d_esc on the Hermite interpolant, bisected
  // inside the bracketing cell
  auto amp_at = [&](double xi) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      const double d = profile.eval(j, xi) - profile.m_plus[j];
      s += d * d;
    }
    return std::sqrt(s) - d_esc;
  };
  double a = profile.xi_grid[last], b = profile.xi_grid[last + 1];
  for (int it = 0; it < 100 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    const double mid = 0.5 * (a + b);
    (amp_at(mid) >= 0 ? a : b) = mid;
  }
  const double xi0 = 0.5 * (a + b);

  FrontProfile out = profile;
  for (auto& xi : out.xi_grid) xi -= xi0;
  out.normalized = true;
  out.d_esc = d_esc;
  return out;
}

double front_residual(const FrontProfile& profile, const PotentialSpec& spec) {
  const int n = profile.n;
  const long nn = profile.n_nodes();
  const double dxi = profile.dxi();
  if (nn < 3) throw ConfigError("profile too short for a residual");

  std::vector<double> u(n), g(n);
  double sup = 0;
  for (long k = 1; k + 1 < nn; ++k) {
    for (int j = 0; j < n; ++j) u[j] = profile.comp(j)[k];
    spec.gradient(u, g);
    for (int j = 0; j < n; ++j) {
      auto phi = profile.comp(j);
      const double d2 = (phi[k + 1] - 2.0 * phi[k] + phi[k - 1]) / (dxi * dxi);
      const double d1 = (phi[k + 1] - phi[k - 1]) / (2.0 * dxi);
      sup = std::max(sup, std::abs(d2 + profile.speed * d1 - g[j]));
    }
  }
  return sup;
}

void write_front_csv(const FrontProfile& profile, const std::string& csv_path,
                     const std::string& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write '" + csv_path + "'");
  csv << "xi";
  for (int j = 1; j <= profile.n; ++j) csv << ",phi_" << j;
  for (int j = 1; j <= profile.n; ++j) csv << ",dphi_" << j;
  csv << "\n";
  for (long k = 0; k < profile.n_nodes(); ++k) {
    csv << num::fmt17(profile.xi_grid[k]);
    for (int j = 0; j < profile.n; ++j) csv << "," << num::fmt17(profile.comp(j)[k]);
    for (int j = 0; j < profile.n; ++j) csv << "," << num::fmt17(profile.dcomp(j)[k]);
    csv << "\n";
  }

  nlohmann::json j;
  j["speed"] = profile.speed;
  j["m_minus"] = profile.m_minus;
  j["m_plus"] = profile.m_plus;
  j["normalized"] = profile.normalized;
  j["d_esc"] = profile.d_esc;
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write '" + json_path + "'");
  js << j.dump(2) << "\n";
}

FrontProfile read_front_csv(const std::string& csv_path,
                            const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw ConfigError("cannot open '" + json_path + "'");
  nlohmann::json j;
  js >> j;

  FrontProfile p;
  p.speed = j.at("speed").get<double>();
  p.m_minus = j.at("m_minus").get<std::vector<double>>();
  p.m_plus = j.at("m_plus").get<std::vector<double>>();
  p.normalized = j.at("normalized").get<bool>();
  p.d_esc = j.at("d_esc").get<double>();
  p.n = static_cast<int>(p.m_minus.size());

  std::ifstream csv(csv_path);
  if (!csv) throw ConfigError("cannot open '" + csv_path + "'");
  std::string line;
  if (!std::getline(csv, line)) throw ConfigError("empty front file '" + csv_path + "'");
  std::vector<std::vector<double>> cols(1 + 2 * p.n);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    size_t col = 0;
    while (std::getline(ss, tok, ',')) {
      if (col >= cols.size()) throw ConfigError("malformed row in '" + csv_path + "'");
      cols[col++].push_back(std::strtod(tok.c_str(), nullptr));
    }
    if (col != cols.size()) throw ConfigError("malformed row in '" + csv_path + "'");
  }

  const size_t nn = cols[0].size();
  p.xi_grid = std::move(cols[0]);
  p.values.resize(p.n * nn);
  p.derivs.resize(p.n * nn);
  for (int j2 = 0; j2 < p.n; ++j2)
    for (size_t k = 0; k < nn; ++k) {
      p.values[j2 * nn + k] = cols[1 + j2][k];
      p.derivs[j2 * nn + k] = cols[1 + p.n + j2][k];
    }
  return p;
}

}  // namespace terralab
