#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "terralab/potential.hpp"
#include "terralab/radial.hpp"

namespace terralab {

// Constants of the laboratory-frame firewall functional, derived from a
// PotentialAnalysis, the ambient dimension, and the reference minimum the
// solution settles to at infinity. The constructor checks the three weight
// inequalities; they hold by construction but are asserted numerically.
struct FirewallConfig {
  int d = 1;
  double kappa0 = 0;     // min(1/2, lambda_min/8)
  double r_sc = 0;       // max(2(d-1), 8(d-1)/lambda_min)
  double lambda_min = 0, lambda_max = 0;
  double w_en0 = 1;
  double d_esc = 0;
  double nu_f0 = 0, k_f0 = 0;
  double delta_esc = 0;  // d_esc * sqrt(min(w_en0/2, 1/4) / (kappa0 + 1))
  double hull_L = 0;     // log(16 k_f0 / (nu_f0 delta_esc^2 kappa0)) / kappa0
  double c_noesc = 0;    // 8 k_f0 hull_L / (kappa0 delta_esc^2)
  double r_att = 1;
  std::vector<double> m_ref;  // reference minimum
  double v_ref = 0;           // V(m_ref)
  std::vector<MinimumPoint> minima;
};

FirewallConfig make_firewall_config(const PotentialAnalysis& analysis, int d,
                                    const MinimumPoint& m_ref);

// Exponential window centered at rho with the polynomial taper inside r_sc:
// exp(-kappa0 |r-rho|) * (r/r_sc)^(d-1) for r <= r_sc, plain exponential
// beyond.
double weight_T(const FirewallConfig& cfg, double rho, double r);

// F0(rho) = integral of T * (w_en0 (|u_r|^2/2 + V(u) - V(m)) + |u-m|^2/2).
double firewall_F0(const RadialField& field, double rho,
                   const FirewallConfig& cfg, const PotentialSpec& spec);

// F0 at every grid node at once (prefix-sum form of the same trapezoid
// quadrature; agrees with firewall_F0 at node rho to rounding).
std::vector<double> firewall_profile(const RadialField& field,
                                     const FirewallConfig& cfg,
                                     const PotentialSpec& spec);

inline double escape_sentinel() {
  return -std::numeric_limits<double>::infinity();
}

struct EscapeInterval {
  double lo, hi;
};

// Maximal intervals where |u - m| > d_esc, endpoints linearly interpolated.
std::vector<EscapeInterval> escape_set(const RadialField& field,
                                       std::span<const double> m,
                                       double d_esc);

// Integral of weight_T(cfg, rho, .) over the escape set.
double escape_measure(const RadialField& field, std::span<const double> m,
                      const FirewallConfig& cfg, double rho);

// sup{r <= r_hom : |u(r) - m| = d_esc}, linearly interpolated; the sentinel
// -inf when the level is never attained.
double escape_point(const RadialField& field, std::span<const double> m,
                    double d_esc, double r_hom);

// Inner edge of the outermost plateau where |u - m| <= d_esc/2, plus a
// margin of 10 dr. NaN when no outer plateau exists.
double homogeneity_radius(const RadialField& field, std::span<const double> m,
                          double d_esc);

// No-escape hull: +inf for x < 0, (delta^2/2)(1 - x/(2L)) on [0, L],
// delta^2/4 beyond.
double hull_noesc(const FirewallConfig& cfg, double x);

// Hull-based escape point: the smallest grid r_l in [r_sc, r_hom] such that
// F0(r) <= max(hull(r - r_l), hull(r_hom - r)) for all grid r >= r_sc; NaN
// when no r_l qualifies.
double hull_escape_point(const std::vector<double>& f0_profile,
                         const RadialGrid& grid, const FirewallConfig& cfg,
                         double r_hom);

// ---- tracker ----

struct TrackerRecord {
  double t, r_hom, r_esc, r_esc_hull;
};

struct TrackerOptions {
  bool with_hull = true;
  bool warn_outer_fraction = true;  // warn once past 0.8 r_max
};

class EscapeTracker {
 public:
  EscapeTracker(FirewallConfig cfg, PotentialSpec spec,
                TrackerOptions opts = {});
  void observe(const RadialField& field);
  const std::vector<TrackerRecord>& series() const { return series_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  // CSV columns t,r_hom,r_Esc,r_esc_hull
  void write_csv(const std::string& path) const;

 private:
  FirewallConfig cfg_;
  PotentialSpec spec_;
  TrackerOptions opts_;
  std::vector<TrackerRecord> series_;
  std::vector<std::string> warnings_;
  bool warned_outer_ = false;
};

// Least-squares slope of y(t) over the window [t_a, t_b]. Throws
// SolverError("too few samples") below 10 points. Sentinel/NaN rows are
// skipped.
struct SpeedEstimate {
  double slope = 0, stderr_slope = 0;
  double t_a = 0, t_b = 0;
  int n_samples = 0;
};

SpeedEstimate speed_estimate(std::span<const double> t,
                             std::span<const double> y, double t_a,
                             double t_b);

// ---- audits ----

struct FirewallSample {
  double t, rho, f0, escape_measure, margin;
};

struct FirewallAuditReport {
  std::vector<FirewallSample> samples;
  double slack = 0;         // slack_coeff * (dr^2 + dt_obs)
  double slack_coeff = 0;
  double dt_obs = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  long violations = 0;      // margin < -slack
};

// Verifies the one-sided decay of F0 between consecutive observations:
// margin = rhs - lhs with lhs = (F0(rho,t+dt)-F0(rho,t))/dt and
// rhs = -nu_f0 F0(rho,t) + k_f0 * escape measure at t.
class FirewallAuditor {
 public:
  FirewallAuditor(FirewallConfig cfg, PotentialSpec spec,
                  std::vector<double> rho_samples, double slack_coeff = 1.0);
  void observe(const RadialField& field);
  FirewallAuditReport report() const;
  // CSV columns t,rho,F0,escape_measure,margin
  void write_csv(const std::string& path) const;

 private:
  FirewallConfig cfg_;
  PotentialSpec spec_;
  std::vector<double> rhos_;
  double slack_coeff_;
  bool have_prev_ = false;
  double prev_t_ = 0;
  std::vector<double> prev_f0_, prev_esc_;
  std::vector<FirewallSample> samples_;
  double dt_obs_ = 0;
  double dr_ = 0;
};

// Low firewall forces small amplitude: whenever F0(rho) <= delta_esc^2 at a
// node rho >= r_sc, check |u(rho) - m| <= d_esc + lip*dr where lip is the
// field's max |u_r| (grid-interpolation slack).
struct EscapeImplicationReport {
  long checked = 0;
  long violations = 0;
  double worst_excess = 0;  // max of |u-m| - d_esc - slack over violations
};

void check_escape_implication(const RadialField& field,
                              const FirewallConfig& cfg,
                              const PotentialSpec& spec,
                              EscapeImplicationReport& acc);

// r(t') - r(t) <= c_noesc (t'-t) + tol over all sample pairs t < t'.
struct InvasionBoundReport {
  long pairs = 0;
  long violations = 0;
  double worst_violation = 0;
};

InvasionBoundReport audit_invasion_bound(const std::vector<TrackerRecord>& series,
                                         double c_noesc, double tol = 1e-9);

// ---- travelling frame ----

// Co-moving window at speed c entered at (t_init, r_init). The constructor
// checks c <= c_noesc, r_init >= 2 r_sc, and the four weight inequalities.
struct TravelingFrameConfig {
  double c = 0;
  double t_init = 0;
  double r_init = 0;
  double xi_cut = 0;
  double kappa = 0;   // min(1/4, lambda_min/(16(c_noesc+1)))
  double c_cut = 0;   // min(lambda_min/(8 lambda_max), lambda_min/(8(c_noesc+1)))
  double w_en = 0;    // min(w_en0, 1/(c_noesc+1)^2)
};

TravelingFrameConfig make_traveling_frame_config(const FirewallConfig& cfg,
                                                 double c, double t_init,
                                                 double r_init, double xi_cut);

// Piecewise weights in the frame coordinate rho = r - r_init - c s at frame
// time s, with junctions at -r_init - c s + r_sc and xi_cut + c_cut s.
double frame_chi(const TravelingFrameConfig& tf, const FirewallConfig& cfg,
                 double rho, double s);
double frame_psi(const TravelingFrameConfig& tf, const FirewallConfig& cfg,
                 double rho, double s);

struct FrameRecord {
  double s, energy, dissipation, firewall;
};

// E, D, F quadratures for one snapshot (s = field.time - t_init >= 0); the
// frame integrals are evaluated on the image of the radial grid, v_s = u_t +
// c u_r with u_t from the semi-discrete right-hand side.
FrameRecord traveling_frame_sample(const RadialField& field,
                                   const TravelingFrameConfig& tf,
                                   const FirewallConfig& cfg,
                                   const PotentialSpec& spec);

class TravelingFrameSeries {
 public:
  TravelingFrameSeries(TravelingFrameConfig tf, FirewallConfig cfg,
                       PotentialSpec spec);
  void observe(const RadialField& field);
  const std::vector<FrameRecord>& series() const { return series_; }
  // CSV columns s,E,D,F
  void write_csv(const std::string& path) const;

 private:
  TravelingFrameConfig tf_;
  FirewallConfig cfg_;
  PotentialSpec spec_;
  std::vector<FrameRecord> series_;
};

// ---- standing frame ----

struct StandingFrameConfig {
  double c_hom = 0;
  double kappa_t = 0;  // min(1/2, lambda_min/(8 lambda_max c_hom),
                       //     lambda_min/(4(1+c_hom)))
  double c_left = 0, c_cut = 0, c_right = 0;  // 0 < c_left <= c_cut <= c_right < c_hom
  double t_kf = 0;     // pollution constant of the standing firewall
};

StandingFrameConfig make_standing_frame_config(const FirewallConfig& cfg,
                                               const PotentialSpec& spec,
                                               double c_hom, double c_left,
                                               double c_cut, double c_right,
                                               const AnalysisOptions& opts = {});

double standing_chi(const StandingFrameConfig& sf, int d, double r, double t);
double standing_psi(const StandingFrameConfig& sf, int d, double r, double t);

// F(t) with the standing psi weight; same integrand as firewall_F0.
double standing_firewall(const RadialField& field,
                         const StandingFrameConfig& sf,
                         const FirewallConfig& cfg, const PotentialSpec& spec);

// Integral of psi over the escape set at time field.time.
double standing_pollution(const RadialField& field,
                          const StandingFrameConfig& sf,
                          const FirewallConfig& cfg);

// ---- energies and local dissipation ----

// Integral of weight(r) (|u_r|^2/2 + V(u) - v_m) over [r_lo, r_hi] by
// trapezoid with linear partial cells.
double weighted_energy(const RadialField& field, const PotentialSpec& spec,
                       const std::function<double(double)>& weight,
                       double r_lo, double r_hi, double v_m);

// r^(d-1)-weighted energy over [0, c t] relative to the minimum m. Throws
// ConfigError("window exceeds domain") when c t > r_max.
double residual_energy(const RadialField& field, const PotentialSpec& spec,
                       double c, double v_m);

// Smallest eps with the space-time dissipation mass in the co-moving window
// below eps: bisection on g(eps) = int_{-1}^{1} int_{-1/eps}^{1/eps}
// (u_t + c_esc u_r)^2(r_esc + rho, t + tau) drho dtau - eps. The snapshots
// must cover [t-1, t+1]; windows are clipped to the grid.
double delta_dissip(const std::vector<RadialField>& snapshots,
                    const PotentialSpec& spec, double t, double r_esc,
                    double c_esc);

}  // namespace terralab
