#pragma once

#include <array>
#include <string>
#include <vector>

#include "terralab/front.hpp"
#include "terralab/potential.hpp"
#include "terralab/radial.hpp"

namespace terralab {

// One detected transition layer: the outermost d_esc-crossing toward the
// outer plateau's minimum, between two identified plateaus.
struct Interface {
  double position = 0;
  int inner_minimum = -1;  // indices into the minima list handed to detect
  int outer_minimum = -1;
};

// Scan inward from r_max for maximal plateaus (within d_esc/2 of one
// minimum for at least 10 dr) and the crossings between them. Throws
// SolverError("solution not stable at infinity on the grid") when the outer
// end is not on a plateau. Returned outermost first.
std::vector<Interface> detect_interfaces(const RadialField& field,
                                         const std::vector<MinimumPoint>& minima,
                                         double d_esc);

// Stacked-front decomposition: chain[0] (outer, highest value) .. chain[q]
// (innermost); fronts[i] connects chain[i+1] to chain[i] and rides at
// positions[i]; front 0 is outermost and fastest.
struct Terrace {
  int q = 0;
  std::vector<MinimumPoint> chain;       // size q+1
  std::vector<FrontProfile> fronts;      // size q, normalized
  std::vector<double> speeds;            // regression slopes, size q
  std::vector<double> speed_err;         // 1-sigma slope errors
  std::vector<double> times;             // sample times
  std::vector<std::vector<double>> positions;  // [front][time index]
};

// T(r) = m_q + sum_i (phi_i(r - r_i) - m_{i+1}) with the convention above
// (equivalently m_0 plus inner corrections); out has n*n_nodes entries.
void reconstruct(const Terrace& terrace, const RadialGrid& grid,
                 std::span<const double> positions_now,
                 std::span<double> out);

// Max over grid r >= eps_t of the euclidean pointwise distance between the
// field and the reconstruction.
double sup_error(const RadialField& field, const Terrace& terrace,
                 std::span<const double> positions_now, double eps_t);

struct FitOptions {
  double t_a = 0, t_b = 0;        // fit window; 0,0 means all snapshots
  std::array<double, 3> eps_factors{0.1, 0.25, 0.5};  // of the min speed
  double front_bracket_lo = -0.5;
  double front_bracket_hi = 3.0;
};

struct FitReport {
  std::vector<double> times;
  std::array<double, 3> epsilons{};  // eps used per column
  std::vector<std::array<double, 3>> sup_errors;
  bool count_stable = false;
  bool chain_ordered = false;        // V strictly decreasing outer -> inner
  bool speeds_positive = false;
  bool speeds_ordered = false;       // c_i >= c_{i+1} - 2 sigma
  bool separations_increasing = false;  // over the last half-window
};

struct TerraceFit {
  Terrace terrace;
  FitReport report;
};

// Detect interfaces on >= 20 snapshots, associate them across time, regress
// speeds on the last half-window, solve the adjacent-pair fronts, and score
// the reconstruction. Throws SolverError("terrace not yet formed; extend
// t_b") when the interface count changes inside the window.
TerraceFit fit_terrace(const std::vector<RadialField>& snapshots,
                       const PotentialSpec& spec,
                       const PotentialAnalysis& analysis,
                       const FitOptions& opts = {});

// {q, minima_chain, speeds, position_series, fit_report}
std::string terrace_to_json(const TerraceFit& fit);

// CSV columns t,sup_err_eps1,sup_err_eps2,sup_err_eps3
void write_fit_report_csv(const FitReport& report, const std::string& path);

// CSV columns t,r_1..r_q (one column per front position series)
void write_positions_csv(const Terrace& terrace, const std::string& path);

}  // namespace terralab
