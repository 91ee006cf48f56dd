#pragma once

#include <span>
#include <string>
#include <vector>

#include "terralab/potential.hpp"

namespace terralab {

// A travelling-front profile phi(xi) on a uniform xi grid with its speed and
// endpoint states. Stored component-major: values[j*n_nodes + k] is component
// j at node k, and derivs holds dphi/dxi in the same layout.
struct FrontProfile {
  int n = 1;
  double speed = 0;
  std::vector<double> m_minus, m_plus;  // phi(-inf), phi(+inf)
  std::vector<double> xi_grid;          // uniform, ascending
  std::vector<double> values;
  std::vector<double> derivs;
  bool normalized = false;
  double d_esc = 0;  // the escape distance used when normalized

  int n_nodes() const { return static_cast<int>(xi_grid.size()); }
  double dxi() const { return xi_grid.size() > 1 ? xi_grid[1] - xi_grid[0] : 0.0; }
  std::span<const double> comp(int j) const {
    return {values.data() + static_cast<size_t>(j) * xi_grid.size(), xi_grid.size()};
  }
  std::span<const double> dcomp(int j) const {
    return {derivs.data() + static_cast<size_t>(j) * xi_grid.size(), xi_grid.size()};
  }
  // cubic Hermite evaluation, clamped to endpoint values outside the grid
  double eval(int j, double xi) const;
  double eval_deriv(int j, double xi) const;
};

// First-order form of phi'' = -c phi' + grad V(phi): y = (phi, phi'),
// dy = (phi', -c phi' + grad V(phi)). y and dy have 2n entries.
void front_ode_rhs(const PotentialSpec& spec, double c,
                   std::span<const double> y, std::span<double> dy);

struct FrontSolveOptions {
  double offset = 1e-6;        // launch distance along the unstable direction
  double ode_tol = 1e-12;      // adaptive RK error control
  double bisect_width = 1e-10; // final speed-bracket width
  double speed_zero_tol = 1e-8;
  double dxi = 0.01;           // resampling step (refined if needed)
  double tail = 1e-10;         // endpoint closeness before constant padding
  double xi_max = 400;         // integration guard
  double residual_target = 1e-6;
};

// Scalar shooting: bisect the speed between an overshoot and an undershoot
// until the bracket closes, then integrate the resolved orbit and resample it
// onto a symmetric uniform grid. Throws ConfigError for n > 1 ("vector
// shooting unsupported; use front_residual on externally supplied profiles")
// and SolverError when the bracket does not isolate a speed.
FrontProfile solve_bistable_front(const PotentialSpec& spec,
                                  const MinimumPoint& m_minus,
                                  const MinimumPoint& m_plus, double c_lo,
                                  double c_hi,
                                  const FrontSolveOptions& opts = {});

// Translate so the last crossing of |phi - m_plus| = d_esc sits at xi = 0,
// with |phi - m_plus| < d_esc for all xi > 0. Throws SolverError("profile
// never escapes d_esc") when the amplitude never reaches d_esc.
FrontProfile normalize_front(const FrontProfile& profile, double d_esc);

// Sup over interior nodes of |D2 phi + c D phi - grad V(phi)| with centered
// second-order differences.
double front_residual(const FrontProfile& profile, const PotentialSpec& spec);

// CSV columns xi,phi_1..phi_n,dphi_1..dphi_n plus a JSON sidecar carrying
// speed, endpoints, the normalized flag and d_esc.
void write_front_csv(const FrontProfile& profile, const std::string& csv_path,
                     const std::string& json_path);
FrontProfile read_front_csv(const std::string& csv_path,
                            const std::string& json_path);

}  // namespace terralab
