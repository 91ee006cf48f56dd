#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "terralab/common.hpp"

namespace terralab {

// A smooth multiwell potential V : R^n -> R given by callables. The gradient
// and Hessian are exact (builtins are polynomial); analysis routines never
// fall back to finite differences of `value`.
struct PotentialSpec {
  std::string name;
  int n = 1;
  std::function<double(std::span<const double>)> value;
  // writes n entries
  std::function<void(std::span<const double>, std::span<double>)> gradient;
  // writes n*n entries, row-major; must be symmetric
  std::function<void(std::span<const double>, std::span<double>)> hessian;
};

// Axis-aligned box in state space used as search region for minima and as
// the sampling region for the global constants. Must contain every minimum
// of interest and the attracting ball.
struct Box {
  std::vector<double> lo, hi;  // size n each
  int dim() const { return static_cast<int>(lo.size()); }
};

struct MinimumPoint {
  std::vector<double> location;
  double value = 0;
  std::vector<double> hess_eigenvalues;  // ascending, all > 0
};

// Sampling knobs. Defaults match the documented sampling rules; tests that
// freeze oracle values use these defaults.
struct AnalysisOptions {
  int seeds_per_axis = 33;        // Newton multistart grid
  double newton_tol = 1e-12;      // on |grad|
  double dedup_tol = 1e-6;
  double degenerate_tol = 1e-8;   // |eigenvalue| below this is degenerate
  int escape_directions = 64;     // n >= 2; n = 1 scans both rays
  int escape_radii = 64;
  double escape_rel_tol = 1e-6;   // bisection width, relative
  int hull_samples_1d = 10000;    // per axis, n = 1
  int hull_samples_2d = 256;      // per axis, n = 2
  int boundary_samples_per_edge = 512;
  int ball_samples_1d = 4001;     // attracting-ball max scan
  int ball_samples_2d = 129;
};

// Everything downstream diagnostics need, computed once per potential.
struct PotentialAnalysis {
  int n = 1;
  std::vector<MinimumPoint> minima;  // sorted by value, ascending
  double lambda_min = 0;  // min Hessian eigenvalue over minima
  double lambda_max = 0;  // max Hessian eigenvalue over minima
  double d_esc = 0;       // escape distance: largest d with all Hessian
                          // eigenvalues in [lambda_min/2, 2*lambda_max] on
                          // every ball |u - m| <= d
  double q_low_hull = 0;  // min over minima m, u != m of (V(u)-V(m))/|u-m|^2
  double w_en0 = 1;       // 1 / max(1, -4 q_low_hull)
  double eps_v = 0;       // coercivity: u.grad V >= eps_v |u|^2 - c_v on box
  double c_v = 0;
  double r_att = 1;       // sqrt(c_v/eps_v + 1)
  double nu_f0 = 0;       // firewall decay rate
  double k_f0 = 0;        // firewall pollution constant
};

// Multi-start damped Newton on grad V. Throws ConfigError on a degenerate
// critical point (an eigenvalue within degenerate_tol of zero) and returns
// only genuine minima inside the box, deduplicated and sorted by value.
std::vector<MinimumPoint> find_minima(const PotentialSpec& spec, const Box& box,
                                      const AnalysisOptions& opts = {});

// (lambda_min, lambda_max) over all minima. Throws SolverError("no minima")
// on an empty list.
std::pair<double, double> eigen_bounds(const std::vector<MinimumPoint>& minima);

// Bisection on the ball radius with directional sampling; capped at the
// largest distance from a minimum to a box corner.
double escape_distance(const PotentialSpec& spec,
                       const std::vector<MinimumPoint>& minima,
                       double lambda_min, double lambda_max, const Box& box,
                       const AnalysisOptions& opts = {});

double low_hull_coefficient(const PotentialSpec& spec,
                            const std::vector<MinimumPoint>& minima,
                            const Box& box, const AnalysisOptions& opts = {});

inline double weight_en0(double q_low_hull) {
  return 1.0 / std::max(1.0, -4.0 * q_low_hull);
}

struct CoercivityConstants {
  double eps_v, c_v, r_att;
};

// eps_v is half the infimum of u.grad V(u)/|u|^2 over box-boundary samples
// (throws ConfigError("potential not coercive on given box") when that
// infimum is not positive); c_v = max(0, sup over interior samples of
// eps_v |u|^2 - u.grad V(u)).
CoercivityConstants coercivity_constants(const PotentialSpec& spec,
                                         const Box& box,
                                         const AnalysisOptions& opts = {});

struct FirewallRateConstants {
  double nu_f0, k_f0;
};

// nu_f0 = min(1/w_en0, lambda_min / (4 (w_en0 lambda_max + 1/2))).
// k_f0 = 1 + max over minima m and sampled |u| <= r_att of
//   nu_f0 (w_en0 (V(u)-V(m)) + |u-m|^2/2) - (u-m).grad V(u)
//   + (lambda_min/4) |u-m|^2.
FirewallRateConstants firewall_rate_constants(
    const PotentialSpec& spec, const std::vector<MinimumPoint>& minima,
    double lambda_min, double lambda_max, double w_en0, double r_att,
    const AnalysisOptions& opts = {});

PotentialAnalysis analyze_potential(const PotentialSpec& spec, const Box& box,
                                    const AnalysisOptions& opts = {});

std::string analysis_to_json(const PotentialAnalysis& analysis);

// ---- builtin catalogue ----

struct BuiltinPotential {
  std::string name;
  std::string summary;
  std::map<std::string, double> default_params;
  Box default_box;
};

const std::vector<BuiltinPotential>& builtin_potentials();

// Throws ConfigError on unknown name or unknown parameter key.
PotentialSpec make_builtin(const std::string& name,
                           const std::map<std::string, double>& params = {});

Box builtin_box(const std::string& name);

}  // namespace terralab
