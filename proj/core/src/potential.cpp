#include "terralab/potential.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "numerics.hpp"

namespace terralab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> hessian_eigs(const PotentialSpec& spec,
                                 std::span<const double> u) {
  const int n = spec.n;
  std::vector<double> h(n * n);
  spec.hessian(u, h);
  MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = h[i * n + j];
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()[i];
  return out;
}

// unit directions covering the sphere: both rays for n = 1, uniform circle
// for n = 2, Fibonacci sphere for n = 3
std::vector<std::vector<double>> direction_set(int n, int count) {
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
  } else if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double th = 2.0 * M_PI * k / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else if (n == 3) {
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back({rad * std::cos(ga * k), rad * std::sin(ga * k), z});
    }
  } else {
    throw ConfigError("escape-distance sampling supports n <= 3");
  }
  return dirs;
}

}  // namespace

std::vector<MinimumPoint> find_minima(const PotentialSpec& spec, const Box& box,
                                      const AnalysisOptions& opts) {
  const int n = spec.n;
  if (box.dim() != n) throw ConfigError("box dimension does not match potential");

  std::vector<MinimumPoint> found;
  std::vector<double> u(n), g(n), h(n * n), trial(n), gt(n);

  std::vector<int> idx(n, 0);
  const int seeds = opts.seeds_per_axis;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= seeds;

  for (long s = 0; s < total; ++s) {
    long rem = s;
    for (int i = 0; i < n; ++i) {
      idx[i] = static_cast<int>(rem % seeds);
      rem /= seeds;
      u[i] = box.lo[i] +
             (box.hi[i] - box.lo[i]) * (idx[i] + 0.5) / static_cast<double>(seeds);
    }

    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      spec.gradient(u, g);
      const double gn = norm2(g);
      if (gn <= opts.newton_tol) {
        converged = true;
        break;
      }
      spec.hessian(u, h);
      MatrixXd H(n, n);
      VectorXd G(n);
      for (int i = 0; i < n; ++i) {
        G[i] = g[i];
        for (int j = 0; j < n; ++j) H(i, j) = h[i * n + j];
      }
      Eigen::FullPivLU<MatrixXd> lu(H);
      if (!lu.isInvertible()) break;
      VectorXd step = lu.solve(G);

      double damp = 1.0;
      bool improved = false;
      for (int half = 0; half < 30; ++half) {
        for (int i = 0; i < n; ++i) trial[i] = u[i] - damp * step[i];
        spec.gradient(trial, gt);
        if (norm2(gt) < gn) {
          improved = true;
          break;
        }
        damp *= 0.5;
      }
      if (!improved) break;
      u = trial;
    }
    if (!converged) continue;

    bool inside = true;
    for (int i = 0; i < n; ++i)
      if (u[i] < box.lo[i] - opts.dedup_tol || u[i] > box.hi[i] + opts.dedup_tol)
        inside = false;
    if (!inside) continue;

    auto eigs = hessian_eigs(spec, u);
    for (double ev : eigs)
      if (std::abs(ev) < opts.degenerate_tol)
        throw ConfigError("degenerate critical point at |grad V| ~ 0; analysis "
                          "requires nondegenerate minima");
    if (eigs.front() <= 0) continue;  // saddle or maximum

    bool dup = false;
    for (auto& m : found) {
      double d = 0;
      for (int i = 0; i < n; ++i) d += (m.location[i] - u[i]) * (m.location[i] - u[i]);
      if (std::sqrt(d) < opts.dedup_tol) {
        dup = true;
        break;
      }
    }
    if (dup) continue;

    MinimumPoint m;
    m.location = u;
    m.value = spec.value(u);
    m.hess_eigenvalues = eigs;
    found.push_back(std::move(m));
  }

  std::sort(found.begin(), found.end(), [](const MinimumPoint& a, const MinimumPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.location < b.location;
  });
  return found;
}

std::pair<double, double> eigen_bounds(const std::vector<MinimumPoint>& minima) {
  if (minima.empty()) throw SolverError("no minima");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto& m : minima)
    for (double ev : m.hess_eigenvalues) {
      lo = std::min(lo, ev);
      hi = std::max(hi, ev);
    }
  return {lo, hi};
}

double escape_distance(const PotentialSpec& spec,
                       const std::vector<MinimumPoint>& minima,
                       double lambda_min, double lambda_max, const Box& box,
                       const AnalysisOptions& opts) {
  if (minima.empty()) throw SolverError("no minima");
  const int n = spec.n;
  const auto dirs = direction_set(n, opts.escape_directions);

  double cap = 0;
  for (auto& m : minima) {
    long corners = 1L << n;
    for (long c = 0; c < corners; ++c) {
      double d = 0;
      for (int i = 0; i < n; ++i) {
        const double ci = (c >> i) & 1 ? box.hi[i] : box.lo[i];
        d += (ci - m.location[i]) * (ci - m.location[i]);
      }
      cap = std::max(cap, std::sqrt(d));
    }
  }

  const double lo_bound = lambda_min / 2, hi_bound = 2 * lambda_max;
  std::vector<double> u(n);
  auto ok = [&](double d) {
    for (auto& m : minima)
      for (auto& dir : dirs)
        for (int j = 1; j <= opts.escape_radii; ++j) {
          const double r = d * j / opts.escape_radii;
          for (int i = 0; i < n; ++i) u[i] = m.location[i] + r * dir[i];
          for (double ev : hessian_eigs(spec, u))
            if (ev < lo_bound || ev > hi_bound) return false;
        }
    return true;
  };

  if (ok(cap)) return cap;
  double lo = 0, hi = cap;
  while (hi - lo > opts.escape_rel_tol * cap) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

double low_hull_coefficient(const PotentialSpec& spec,
                            const std::vector<MinimumPoint>& minima,
                            const Box& box, const AnalysisOptions& opts) {
  if (minima.empty()) throw SolverError("no minima");
  const int n = spec.n;
  const int per_axis = n == 1 ? opts.hull_samples_1d : opts.hull_samples_2d;
  if (n > 2) throw ConfigError("low-hull sampling supports n <= 2");

  double q = std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    for (int i = 0; i < n; ++i) {
      const long k = rem % per_axis;
      rem /= per_axis;
      u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * k / static_cast<double>(per_axis - 1);
    }
    const double vu = spec.value(u);
    for (auto& m : minima) {
      double d2 = 0;
      for (int i = 0; i < n; ++i) d2 += (u[i] - m.location[i]) * (u[i] - m.location[i]);
      if (d2 < 1e-24) continue;
      q = std::min(q, (vu - m.value) / d2);
    }
  }
  return q;
}

CoercivityConstants coercivity_constants(const PotentialSpec& spec,
                                         const Box& box,
                                         const AnalysisOptions& opts) {
  const int n = spec.n;
  std::vector<double> u(n), g(n);

  auto radial_quotient = [&](std::span<const double> pt) {
    double ug = 0, uu = 0;
    spec.gradient(pt, g);
    for (int i = 0; i < n; ++i) {
      ug += pt[i] * g[i];
      uu += pt[i] * pt[i];
    }
    return uu < 1e-30 ? std::numeric_limits<double>::infinity() : ug / uu;
  };

  double inf_q = std::numeric_limits<double>::infinity();
  if (n == 1) {
    inf_q = std::min(radial_quotient(std::vector<double>{box.lo[0]}),
                     radial_quotient(std::vector<double>{box.hi[0]}));
  } else {
    const int bs = opts.boundary_samples_per_edge;
    for (int face = 0; face < n; ++face)
      for (int side = 0; side < 2; ++side) {
        // sample the (n-1)-dimensional face on a per-axis grid
        long total = 1;
        for (int i = 0; i < n; ++i)
          if (i != face) total *= bs;
        for (long s = 0; s < total; ++s) {
          long rem = s;
          for (int i = 0; i < n; ++i) {
            if (i == face) {
              u[i] = side ? box.hi[i] : box.lo[i];
            } else {
              const long k = rem % bs;
              rem /= bs;
              u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * k / static_cast<double>(bs - 1);
            }
          }
          inf_q = std::min(inf_q, radial_quotient(u));
        }
      }
  }
  if (!(inf_q > 0)) throw ConfigError("potential not coercive on given box");
  const double eps_v = 0.5 * inf_q;

  const int per_axis = n == 1 ? opts.hull_samples_1d : opts.hull_samples_2d;
  double sup = 0;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    for (int i = 0; i < n; ++i) {
      const long k = rem % per_axis;
      rem /= per_axis;
      u[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * k / static_cast<double>(per_axis - 1);
    }
    spec.gradient(u, g);
    double ug = 0, uu = 0;
    for (int i = 0; i < n; ++i) {
      ug += u[i] * g[i];
      uu += u[i] * u[i];
    }
    sup = std::max(sup, eps_v * uu - ug);
  }
  const double c_v = std::max(0.0, sup);
  return {eps_v, c_v, std::sqrt(c_v / eps_v + 1.0)};
}

FirewallRateConstants firewall_rate_constants(
    const PotentialSpec& spec, const std::vector<MinimumPoint>& minima,
    double lambda_min, double lambda_max, double w_en0, double r_att,
    const AnalysisOptions& opts) {
  if (minima.empty()) throw SolverError("no minima");
  const int n = spec.n;
  const double nu =
      std::min(1.0 / w_en0, lambda_min / (4.0 * (w_en0 * lambda_max + 0.5)));

  const int per_axis = n == 1 ? opts.ball_samples_1d : opts.ball_samples_2d;
  std::vector<double> u(n), g(n);
  double worst = 0;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  for (long s = 0; s < total; ++s) {
    long rem = s;
    double uu = 0;
    for (int i = 0; i < n; ++i) {
      const long k = rem % per_axis;
      rem /= per_axis;
      u[i] = -r_att + 2.0 * r_att * k / static_cast<double>(per_axis - 1);
      uu += u[i] * u[i];
    }
    if (uu > r_att * r_att) continue;
    const double vu = spec.value(u);
    spec.gradient(u, g);
    for (auto& m : minima) {
      double d2 = 0, dg = 0;
      for (int i = 0; i < n; ++i) {
        d2 += (u[i] - m.location[i]) * (u[i] - m.location[i]);
        dg += (u[i] - m.location[i]) * g[i];
      }
      const double expr = nu * (w_en0 * (vu - m.value) + 0.5 * d2) - dg +
                          (lambda_min / 4.0) * d2;
      worst = std::max(worst, expr);
    }
  }
  return {nu, 1.0 + worst};
}

PotentialAnalysis analyze_potential(const PotentialSpec& spec, const Box& box,
                                    const AnalysisOptions& opts) {
  PotentialAnalysis a;
  a.n = spec.n;
  a.minima = find_minima(spec, box, opts);
  if (a.minima.empty()) throw SolverError("no minima");
  std::tie(a.lambda_min, a.lambda_max) = eigen_bounds(a.minima);
  a.d_esc = escape_distance(spec, a.minima, a.lambda_min, a.lambda_max, box, opts);
  a.q_low_hull = low_hull_coefficient(spec, a.minima, box, opts);
  a.w_en0 = weight_en0(a.q_low_hull);
  const auto co = coercivity_constants(spec, box, opts);
  a.eps_v = co.eps_v;
  a.c_v = co.c_v;
  a.r_att = co.r_att;
  const auto fr = firewall_rate_constants(spec, a.minima, a.lambda_min,
                                          a.lambda_max, a.w_en0, a.r_att, opts);
  a.nu_f0 = fr.nu_f0;
  a.k_f0 = fr.k_f0;
  return a;
}

std::string analysis_to_json(const PotentialAnalysis& a) {
  nlohmann::json j;
  j["n"] = a.n;
  j["minima"] = nlohmann::json::array();
  for (auto& m : a.minima) {
    nlohmann::json jm;
    jm["location"] = m.location;
    jm["value"] = m.value;
    jm["eigenvalues"] = m.hess_eigenvalues;
    j["minima"].push_back(jm);
  }
  j["lambda_min"] = a.lambda_min;
  j["lambda_max"] = a.lambda_max;
  j["d_esc"] = a.d_esc;
  j["q_low_hull"] = a.q_low_hull;
  j["w_en0"] = a.w_en0;
  j["eps_v"] = a.eps_v;
  j["c_v"] = a.c_v;
  j["r_att"] = a.r_att;
  j["nu_f0"] = a.nu_f0;
  j["k_f0"] = a.k_f0;
  return j.dump(2) + "\n";
}

// ---- builtin catalogue ----

namespace {

double param(const std::map<std::string, double>& params,
             const std::map<std::string, double>& defaults,
             const std::string& key) {
  auto it = params.find(key);
  return it != params.end() ? it->second : defaults.at(key);
}

void check_params(const std::string& name,
                  const std::map<std::string, double>& params,
                  const std::map<std::string, double>& defaults) {
  for (auto& [k, v] : params)
    if (!defaults.count(k))
      throw ConfigError("unknown parameter '" + k + "' for potential '" + name + "'");
}

PotentialSpec make_cubic(const std::map<std::string, double>& params) {
  static const std::map<std::string, double> defaults{{"a", 0.25}};
  check_params("cubic", params, defaults);
  const double a = param(params, defaults, "a");
  PotentialSpec spec;
  spec.name = "cubic";
  spec.n = 1;
  spec.value = [a](std::span<const double> u) {
    const double x = u[0];
    return x * x * x * x / 4.0 - (1.0 + a) * x * x * x / 3.0 + a * x * x / 2.0;
  };
  spec.gradient = [a](std::span<const double> u, std::span<double> g) {
    const double x = u[0];
    g[0] = x * (x - a) * (x - 1.0);
  };
  spec.hessian = [a](std::span<const double> u, std::span<double> h) {
    const double x = u[0];
    h[0] = 3.0 * x * x - 2.0 * (1.0 + a) * x + a;
  };
  return spec;
}

PotentialSpec make_double_well(const std::map<std::string, double>& params) {
  static const std::map<std::string, double> defaults{{"tilt", 0.0}};
  check_params("double_well", params, defaults);
  const double tilt = param(params, defaults, "tilt");
  PotentialSpec spec;
  spec.name = "double_well";
  spec.n = 1;
  spec.value = [tilt](std::span<const double> u) {
    const double x = u[0];
    return (x * x - 1.0) * (x * x - 1.0) / 4.0 - tilt * x;
  };
  spec.gradient = [tilt](std::span<const double> u, std::span<double> g) {
    const double x = u[0];
    g[0] = x * (x * x - 1.0) - tilt;
  };
  spec.hessian = [](std::span<const double> u, std::span<double> h) {
    const double x = u[0];
    h[0] = 3.0 * x * x - 1.0;
  };
  return spec;
}

// quintic gradient with prescribed critical points: minima at -1, 0, 1 and
// saddles of the well heights at s2 in (-1, 0) and s1 in (0, 1)
PotentialSpec make_triple_well(const std::map<std::string, double>& params) {
  static const std::map<std::string, double> defaults{
      {"s1", 0.8}, {"s2", -0.3}, {"k", 1.0}};
  check_params("triple_well", params, defaults);
  const double s1 = param(params, defaults, "s1");
  const double s2 = param(params, defaults, "s2");
  const double k = param(params, defaults, "k");

  std::vector<double> grad{0.0, 1.0};  // u
  for (double root : {-1.0, s2, s1, 1.0})
    grad = num::poly_mul(grad, std::vector<double>{-root, 1.0});
  for (double& c : grad) c *= k;
  const std::vector<double> val = num::poly_antideriv(grad);
  const std::vector<double> hess = num::poly_deriv(grad);

  PotentialSpec spec;
  spec.name = "triple_well";
  spec.n = 1;
  spec.value = [val](std::span<const double> u) { return num::poly_eval(val, u[0]); };
  spec.gradient = [grad](std::span<const double> u, std::span<double> g) {
    g[0] = num::poly_eval(grad, u[0]);
  };
  spec.hessian = [hess](std::span<const double> u, std::span<double> h) {
    h[0] = num::poly_eval(hess, u[0]);
  };
  return spec;
}

PotentialSpec make_coupled_wells(const std::map<std::string, double>& params) {
  static const std::map<std::string, double> defaults{{"eps", 0.05}};
  check_params("coupled_wells", params, defaults);
  const double eps = param(params, defaults, "eps");
  auto w = [](double x) { return (x * x - 1.0) * (x * x - 1.0) / 4.0; };
  auto dw = [](double x) { return x * (x * x - 1.0); };
  PotentialSpec spec;
  spec.name = "coupled_wells";
  spec.n = 2;
  spec.value = [w, eps](std::span<const double> u) {
    return w(u[0]) + w(u[1]) + eps * u[0] * u[1];
  };
  spec.gradient = [dw, eps](std::span<const double> u, std::span<double> g) {
    g[0] = dw(u[0]) + eps * u[1];
    g[1] = dw(u[1]) + eps * u[0];
  };
  spec.hessian = [eps](std::span<const double> u, std::span<double> h) {
    h[0] = 3.0 * u[0] * u[0] - 1.0;
    h[1] = eps;
    h[2] = eps;
    h[3] = 3.0 * u[1] * u[1] - 1.0;
  };
  return spec;
}

}  // namespace

const std::vector<BuiltinPotential>& builtin_potentials() {
  static const std::vector<BuiltinPotential> cat = {
      {"cubic",
       "scalar bistable well pair at 0 and 1 with barrier at a",
       {{"a", 0.25}},
       {{-2.0}, {3.0}}},
      {"double_well",
       "scalar symmetric wells at -1 and 1, optional tilt",
       {{"tilt", 0.0}},
       {{-3.0}, {3.0}}},
      {"triple_well",
       "scalar wells at -1, 0, 1 with tunable saddles s2, s1 and scale k",
       {{"s1", 0.8}, {"s2", -0.3}, {"k", 1.0}},
       {{-2.5}, {2.5}}},
      {"coupled_wells",
       "two symmetric wells per component with bilinear coupling eps",
       {{"eps", 0.05}},
       {{-3.0, -3.0}, {3.0, 3.0}}},
  };
  return cat;
}

PotentialSpec make_builtin(const std::string& name,
                           const std::map<std::string, double>& params) {
  if (name == "cubic") return make_cubic(params);
  if (name == "double_well") return make_double_well(params);
  if (name == "triple_well") return make_triple_well(params);
  if (name == "coupled_wells") return make_coupled_wells(params);
  throw ConfigError("unknown potential '" + name + "'");
}

Box builtin_box(const std::string& name) {
  for (auto& b : builtin_potentials())
    if (b.name == name) return b.default_box;
  throw ConfigError("unknown potential '" + name + "'");
}

}  // namespace terralab
