#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "terralab/front.hpp"
#include "terralab/potential.hpp"

namespace terralab {

// Uniform grid on [0, r_max] for the radially symmetric problem in ambient
// dimension d. Node k sits at r = k*dr with dr = r_max/(n_nodes-1).
struct RadialGrid {
  double r_max = 1;
  int n_nodes = 2;
  int d = 1;
  double dr() const { return r_max / (n_nodes - 1); }
  double r(int k) const { return k * dr(); }
};

// n-component field on a RadialGrid, component-major like FrontProfile.
struct RadialField {
  RadialGrid grid;
  int n = 1;
  double time = 0;
  std::vector<double> values;

  std::span<double> comp(int j) {
    return {values.data() + static_cast<size_t>(j) * grid.n_nodes,
            static_cast<size_t>(grid.n_nodes)};
  }
  std::span<const double> comp(int j) const {
    return {values.data() + static_cast<size_t>(j) * grid.n_nodes,
            static_cast<size_t>(grid.n_nodes)};
  }
};

enum class Scheme { imex_cn, explicit_rk4 };
enum class OuterBc { neumann_zero, dirichlet_value };

struct IntegratorConfig {
  Scheme scheme = Scheme::imex_cn;
  double dt = 0;
  double t_end = 0;
  OuterBc outer_bc = OuterBc::neumann_zero;
  std::vector<double> outer_value;  // per component, dirichlet only
  int observe_every = 50;           // default observer cadence, in steps
};

// du/dt = -grad V(u) + (d-1)/r u_r + u_rr with the reflection ghost at the
// origin; at r = 0 the curvature term is regularized to d * 2(u_1-u_0)/dr^2.
// out has n*n_nodes entries, component-major.
void semi_discrete_rhs(const RadialField& field, const PotentialSpec& spec,
                       std::span<double> out);

// One step of the configured scheme. Throws ConfigError when the step-size
// guard is violated (rk4: dt <= 0.2 dr^2; imex_cn: dt <= 0.5 dr) and
// InstabilityError("blow-up or instability detected ...") when the update
// produces a non-finite value.
RadialField step(const RadialField& field, const PotentialSpec& spec,
                 const IntegratorConfig& integ);

struct ObserverSlot {
  int every = 0;  // in steps; 0 means integ.observe_every
  std::function<void(const RadialField&)> fn;
};

// March to t_end, invoking every observer on the initial state, every
// `every` steps, and on the final state. Deterministic: rerunning an
// identical setup reproduces the trajectory bit for bit.
RadialField integrate(RadialField field, const PotentialSpec& spec,
                      const IntegratorConfig& integ,
                      const std::vector<ObserverSlot>& observers = {});

// ---- initial data ----
// All constructions are flat at the origin. Each throws
// ConfigError("initial data exceeds domain") when the feature does not fit.

// m_inner out to r0, smoothstep ramp of width w, m_outer beyond.
RadialField initial_plateau(const RadialGrid& grid,
                            std::span<const double> m_inner,
                            std::span<const double> m_outer, double r0,
                            double w);

// Staircase of levels[0..L-1] with ramps of width w at radii[0..L-2];
// levels[0] innermost. plateau == stack with two levels.
RadialField initial_stack(const RadialGrid& grid,
                          const std::vector<std::vector<double>>& levels,
                          const std::vector<double>& radii, double w);

// Transplanted front profile: u(r) = phi(r - r0), limits beyond the grid.
RadialField initial_front_seed(const RadialGrid& grid,
                               const FrontProfile& profile, double r0);

// Symmetrized Gaussian bump of the given (per-component) amplitude on top of
// m, centered at r0 with width w; even in r, so exactly flat at the origin.
RadialField initial_bump(const RadialGrid& grid, std::span<const double> m,
                         std::span<const double> amplitude, double r0,
                         double w);

RadialField initial_homogeneous(const RadialGrid& grid,
                                std::span<const double> m);

// ---- snapshot I/O ----
// CSV columns r,u_1..u_n preceded by "# t=<time> d=<d> dr=<dr>".
void write_snapshot_csv(const RadialField& field, const std::string& path);
RadialField read_snapshot_csv(const std::string& path);

}  // namespace terralab
