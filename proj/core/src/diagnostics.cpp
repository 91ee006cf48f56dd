#include "terralab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "numerics.hpp"

namespace terralab {

namespace {

double amp_at(const RadialField& f, std::span<const double> m, int k) {
  double s = 0;
  for (int j = 0; j < f.n; ++j) {
    const double d = f.comp(j)[k] - m[j];
    s += d * d;
  }
  return std::sqrt(s);
}

double deriv_sq_at(const RadialField& f, int k) {
  const int nn = f.grid.n_nodes;
  const double dr = f.grid.dr();
  double s = 0;
  for (int j = 0; j < f.n; ++j) {
    auto c = f.comp(j);
    double d;
    if (k == 0)
      d = 0.0;  // even reflection at the origin
    else if (k == nn - 1)
      d = (c[nn - 1] - c[nn - 2]) / dr;
    else
      d = (c[k + 1] - c[k - 1]) / (2.0 * dr);
    s += d * d;
  }
  return s;
}

// w_en (|u_r|^2/2 + V(u) - v_ref) + |u - m|^2/2 at every node
std::vector<double> firewall_integrand(const RadialField& f,
                                       const PotentialSpec& spec, double w_en,
                                       std::span<const double> m, double v_ref) {
  const int nn = f.grid.n_nodes;
  std::vector<double> q(nn), u(f.n);
  for (int k = 0; k < nn; ++k) {
    for (int j = 0; j < f.n; ++j) u[j] = f.comp(j)[k];
    const double a = amp_at(f, m, k);
    q[k] = w_en * (0.5 * deriv_sq_at(f, k) + spec.value(u) - v_ref) + 0.5 * a * a;
  }
  return q;
}

}  // namespace

FirewallConfig make_firewall_config(const PotentialAnalysis& analysis, int d,
                                    const MinimumPoint& m_ref) {
  FirewallConfig cfg;
  cfg.d = d;
  cfg.lambda_min = analysis.lambda_min;
  cfg.lambda_max = analysis.lambda_max;
  cfg.w_en0 = analysis.w_en0;
  cfg.d_esc = analysis.d_esc;
  cfg.nu_f0 = analysis.nu_f0;
  cfg.k_f0 = analysis.k_f0;
  cfg.r_att = analysis.r_att;
  cfg.m_ref = m_ref.location;
  cfg.v_ref = m_ref.value;
  cfg.minima = analysis.minima;

  cfg.kappa0 = std::min(0.5, analysis.lambda_min / 8.0);
  cfg.r_sc = std::max(2.0 * (d - 1), 8.0 * (d - 1) / analysis.lambda_min);

  const double rate = (d > 1 ? (d - 1) / cfg.r_sc : 0.0) + cfg.kappa0;
  const double tol = 1e-12;
  if (cfg.w_en0 / 4.0 * rate * rate > 0.25 + tol)
    throw ConfigError("firewall weight inequality failed: w_en0 rate^2 / 4 > 1/4");
  if (0.25 * rate > 0.25 + tol)
    throw ConfigError("firewall weight inequality failed: rate / 4 > 1/4");
  if (rate > analysis.lambda_min / 4.0 + tol)
    throw ConfigError("firewall weight inequality failed: rate > lambda_min / 4");

  cfg.delta_esc =
      cfg.d_esc * std::sqrt(std::min(cfg.w_en0 / 2.0, 0.25) / (cfg.kappa0 + 1.0));
  cfg.hull_L = std::log(16.0 * cfg.k_f0 /
                        (cfg.nu_f0 * cfg.delta_esc * cfg.delta_esc * cfg.kappa0)) /
               cfg.kappa0;
  cfg.c_noesc = 8.0 * cfg.k_f0 * cfg.hull_L / (cfg.kappa0 * cfg.delta_esc * cfg.delta_esc);
  return cfg;
}

double weight_T(const FirewallConfig& cfg, double rho, double r) {
  double w = std::exp(-cfg.kappa0 * std::abs(r - rho));
  if (cfg.d > 1 && r < cfg.r_sc)
    w *= std::pow(r / cfg.r_sc, cfg.d - 1);
  return w;
}

double firewall_F0(const RadialField& field, double rho,
                   const FirewallConfig& cfg, const PotentialSpec& spec) {
  const int nn = field.grid.n_nodes;
  std::vector<double> q =
      firewall_integrand(field, spec, cfg.w_en0, cfg.m_ref, cfg.v_ref);
  for (int k = 0; k < nn; ++k) q[k] *= weight_T(cfg, rho, field.grid.r(k));
  return num::trapezoid(q, field.grid.dr());
}

std::vector<double> firewall_profile(const RadialField& field,
                                     const FirewallConfig& cfg,
                                     const PotentialSpec& spec) {
  const int nn = field.grid.n_nodes;
  const double dr = field.grid.dr();
  const double kap = cfg.kappa0;
  std::vector<double> q =
      firewall_integrand(field, spec, cfg.w_en0, cfg.m_ref, cfg.v_ref);
  std::vector<double> taper(nn, 1.0);
  if (cfg.d > 1)
    for (int k = 0; k < nn; ++k) {
      const double r = field.grid.r(k);
      if (r < cfg.r_sc) taper[k] = std::pow(r / cfg.r_sc, cfg.d - 1);
    }

  // split exp(-kap|r-rho|) into exp(-kap rho) exp(kap r) for r < rho and
  // exp(kap rho) exp(-kap r) beyond; both halves are prefix/suffix trapezoids
  std::vector<double> up(nn), dn(nn);
  for (int k = 0; k < nn; ++k) {
    const double r = field.grid.r(k);
    up[k] = std::exp(kap * r) * taper[k] * q[k];
    dn[k] = std::exp(-kap * r) * taper[k] * q[k];
  }
  std::vector<double> pre(nn, 0.0), suf(nn, 0.0);
  for (int k = 1; k < nn; ++k) pre[k] = pre[k - 1] + 0.5 * (up[k - 1] + up[k]) * dr;
  for (int k = nn - 2; k >= 0; --k) suf[k] = suf[k + 1] + 0.5 * (dn[k] + dn[k + 1]) * dr;

  std::vector<double> f0(nn);
  for (int k = 0; k < nn; ++k) {
    const double r = field.grid.r(k);
    f0[k] = std::exp(-kap * r) * pre[k] + std::exp(kap * r) * suf[k];
  }
  return f0;
}

std::vector<EscapeInterval> escape_set(const RadialField& field,
                                       std::span<const double> m,
                                       double d_esc) {
  const int nn = field.grid.n_nodes;
  const double dr = field.grid.dr();
  std::vector<EscapeInterval> out;
  bool open = false;
  double lo = 0;
  double prev = amp_at(field, m, 0);
  if (prev > d_esc) {
    open = true;
    lo = 0;
  }
  for (int k = 1; k < nn; ++k) {
    const double cur = amp_at(field, m, k);
    const bool above = cur > d_esc;
    if (above != open) {
      const double frac = (d_esc - prev) / (cur - prev);
      const double rx = field.grid.r(k - 1) + frac * dr;
      if (above) {
        open = true;
        lo = rx;
      } else {
        open = false;
        out.push_back({lo, rx});
      }
    }
    prev = cur;
  }
  if (open) out.push_back({lo, field.grid.r_max});
  return out;
}

double escape_measure(const RadialField& field, std::span<const double> m,
                      const FirewallConfig& cfg, double rho) {
  const double dr = field.grid.dr();
  double total = 0;
  for (const auto& iv : escape_set(field, m, cfg.d_esc)) {
    // composite trapezoid on grid-aligned pieces with fractional end cells
    const long ks = static_cast<long>(std::ceil(iv.lo / dr));
    const long ke = static_cast<long>(std::floor(iv.hi / dr));
    auto T = [&](double r) { return weight_T(cfg, rho, r); };
    if (ks > ke) {
      total += 0.5 * (T(iv.lo) + T(iv.hi)) * (iv.hi - iv.lo);
      continue;
    }
    total += 0.5 * (T(iv.lo) + T(ks * dr)) * (ks * dr - iv.lo);
    for (long k = ks; k < ke; ++k)
      total += 0.5 * (T(k * dr) + T((k + 1) * dr)) * dr;
    total += 0.5 * (T(ke * dr) + T(iv.hi)) * (iv.hi - ke * dr);
  }
  return total;
}

double escape_point(const RadialField& field, std::span<const double> m,
                    double d_esc, double r_hom) {
  const int nn = field.grid.n_nodes;
  const double dr = field.grid.dr();
  if (std::isnan(r_hom)) return escape_sentinel();
  const double top = std::min(r_hom, field.grid.r_max);

  for (int k = nn - 2; k >= 0; --k) {
    const double rl = field.grid.r(k);
    if (rl >= top) continue;
    const double rr = std::min(field.grid.r(k + 1), top);
    const double al = amp_at(field, m, k);
    double ar = amp_at(field, m, k + 1);
    if (rr < field.grid.r(k + 1))
      ar = al + (ar - al) * (rr - rl) / dr;
    const double gl = al - d_esc, gr = ar - d_esc;
    if (gr == 0.0) return rr;
    if (gl == 0.0) return rl;
    if (gl * gr < 0.0) return rl + (rr - rl) * gl / (gl - gr);
  }
  return escape_sentinel();
}

double homogeneity_radius(const RadialField& field, std::span<const double> m,
                          double d_esc) {
  const int nn = field.grid.n_nodes;
  if (amp_at(field, m, nn - 1) > 0.5 * d_esc)
    return std::numeric_limits<double>::quiet_NaN();
  int k = nn - 1;
  while (k > 0 && amp_at(field, m, k - 1) <= 0.5 * d_esc) --k;
  return field.grid.r(k) + 10.0 * field.grid.dr();
}

double hull_noesc(const FirewallConfig& cfg, double x) {
  if (x < 0) return std::numeric_limits<double>::infinity();
  const double d2 = cfg.delta_esc * cfg.delta_esc;
  if (x >= cfg.hull_L) return 0.25 * d2;
  return 0.5 * d2 * (1.0 - x / (2.0 * cfg.hull_L));
}

double hull_escape_point(const std::vector<double>& f0_profile,
                         const RadialGrid& grid, const FirewallConfig& cfg,
                         double r_hom) {
  if (std::isnan(r_hom)) return std::numeric_limits<double>::quiet_NaN();
  const int nn = grid.n_nodes;
  const int k_sc = static_cast<int>(std::ceil(cfg.r_sc / grid.dr()));
  for (int kl = k_sc; kl < nn && grid.r(kl) <= r_hom; ++kl) {
    const double rl = grid.r(kl);
    bool ok = true;
    for (int k = k_sc; k < nn; ++k) {
      const double r = grid.r(k);
      if (r > r_hom) break;  // hull(r_hom - r) is +inf beyond
      const double bound = std::max(hull_noesc(cfg, r - rl), hull_noesc(cfg, r_hom - r));
      if (f0_profile[k] > bound) {
        ok = false;
        break;
      }
    }
    if (ok) return rl;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---- tracker ----

EscapeTracker::EscapeTracker(FirewallConfig cfg, PotentialSpec spec,
                             TrackerOptions opts)
    : cfg_(std::move(cfg)), spec_(std::move(spec)), opts_(opts) {}

void EscapeTracker::observe(const RadialField& field) {
  TrackerRecord rec;
  rec.t = field.time;
  rec.r_hom = homogeneity_radius(field, cfg_.m_ref, cfg_.d_esc);
  rec.r_esc = escape_point(field, cfg_.m_ref, cfg_.d_esc, rec.r_hom);
  rec.r_esc_hull = std::numeric_limits<double>::quiet_NaN();
  if (opts_.with_hull) {
    const auto f0 = firewall_profile(field, cfg_, spec_);
    rec.r_esc_hull = hull_escape_point(f0, field.grid, cfg_, rec.r_hom);
  }
  if (opts_.warn_outer_fraction && !warned_outer_ &&
      std::isfinite(rec.r_esc) && rec.r_esc > 0.8 * field.grid.r_max) {
    std::ostringstream msg;
    msg << "escape point " << rec.r_esc << " at t=" << field.time
        << " is within 20% of the outer boundary; later records may be "
           "polluted by boundary effects";
    warnings_.push_back(msg.str());
    warned_outer_ = true;
  }
  series_.push_back(rec);
}

void EscapeTracker::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "t,r_hom,r_Esc,r_esc_hull\n";
  for (const auto& r : series_)
    out << num::fmt17(r.t) << "," << num::fmt17(r.r_hom) << ","
        << num::fmt17(r.r_esc) << "," << num::fmt17(r.r_esc_hull) << "\n";
}

SpeedEstimate speed_estimate(std::span<const double> t,
                             std::span<const double> y, double t_a,
                             double t_b) {
  std::vector<double> ts, ys;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_a || t[k] > t_b) continue;
    if (!std::isfinite(y[k])) continue;
    ts.push_back(t[k]);
    ys.push_back(y[k]);
  }
  if (ts.size() < 10) throw SolverError("too few samples");
  const auto fit = num::fit_line(ts, ys);
  SpeedEstimate est;
  est.slope = fit.slope;
  est.stderr_slope = fit.stderr_slope;
  est.t_a = t_a;
  est.t_b = t_b;
  est.n_samples = fit.n;
  return est;
}

// ---- audits ----

FirewallAuditor::FirewallAuditor(FirewallConfig cfg, PotentialSpec spec,
                                 std::vector<double> rho_samples,
                                 double slack_coeff)
    : cfg_(std::move(cfg)),
      spec_(std::move(spec)),
      rhos_(std::move(rho_samples)),
      slack_coeff_(slack_coeff) {}

void FirewallAuditor::observe(const RadialField& field) {
  dr_ = field.grid.dr();
  std::vector<double> f0(rhos_.size()), esc(rhos_.size());
  for (size_t i = 0; i < rhos_.size(); ++i) {
    f0[i] = firewall_F0(field, rhos_[i], cfg_, spec_);
    esc[i] = escape_measure(field, cfg_.m_ref, cfg_, rhos_[i]);
  }
  if (have_prev_) {
    const double dt = field.time - prev_t_;
    dt_obs_ = dt;
    for (size_t i = 0; i < rhos_.size(); ++i) {
      const double lhs = (f0[i] - prev_f0_[i]) / dt;
      const double rhs = -cfg_.nu_f0 * prev_f0_[i] + cfg_.k_f0 * prev_esc_[i];
      samples_.push_back({prev_t_, rhos_[i], prev_f0_[i], prev_esc_[i], rhs - lhs});
    }
  }
  have_prev_ = true;
  prev_t_ = field.time;
  prev_f0_ = std::move(f0);
  prev_esc_ = std::move(esc);
}

FirewallAuditReport FirewallAuditor::report() const {
  FirewallAuditReport rep;
  rep.samples = samples_;
  rep.slack_coeff = slack_coeff_;
  rep.dt_obs = dt_obs_;
  rep.slack = slack_coeff_ * (dr_ * dr_ + dt_obs_);
  for (const auto& s : samples_) {
    rep.worst_margin = std::min(rep.worst_margin, s.margin);
    if (s.margin < -rep.slack) ++rep.violations;
  }
  return rep;
}

void FirewallAuditor::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "t,rho,F0,escape_measure,margin\n";
  for (const auto& s : samples_)
    out << num::fmt17(s.t) << "," << num::fmt17(s.rho) << ","
        << num::fmt17(s.f0) << "," << num::fmt17(s.escape_measure) << ","
        << num::fmt17(s.margin) << "\n";
}

void check_escape_implication(const RadialField& field,
                              const FirewallConfig& cfg,
                              const PotentialSpec& spec,
                              EscapeImplicationReport& acc) {
  const int nn = field.grid.n_nodes;
  const double dr = field.grid.dr();
  const auto f0 = firewall_profile(field, cfg, spec);

  double lip = 0;
  for (int k = 0; k < nn; ++k) lip = std::max(lip, std::sqrt(deriv_sq_at(field, k)));
  const double slack = lip * dr;

  for (int k = 0; k < nn; ++k) {
    if (field.grid.r(k) < cfg.r_sc) continue;
    if (f0[k] > cfg.delta_esc * cfg.delta_esc) continue;
    ++acc.checked;
    const double excess = amp_at(field, cfg.m_ref, k) - cfg.d_esc - slack;
    if (excess > 0) {
      ++acc.violations;
      acc.worst_excess = std::max(acc.worst_excess, excess);
    }
  }
}

InvasionBoundReport audit_invasion_bound(const std::vector<TrackerRecord>& series,
                                         double c_noesc, double tol) {
  InvasionBoundReport rep;
  for (size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i].r_esc)) continue;
    for (size_t j = i + 1; j < series.size(); ++j) {
      if (!std::isfinite(series[j].r_esc)) continue;
      ++rep.pairs;
      const double lhs = series[j].r_esc - series[i].r_esc;
      const double rhs = c_noesc * (series[j].t - series[i].t) + tol;
      if (lhs > rhs) {
        ++rep.violations;
        rep.worst_violation = std::max(rep.worst_violation, lhs - rhs);
      }
    }
  }
  return rep;
}

// ---- travelling frame ----

TravelingFrameConfig make_traveling_frame_config(const FirewallConfig& cfg,
                                                 double c, double t_init,
                                                 double r_init, double xi_cut) {
  if (!(c > 0)) throw ConfigError("frame speed must be positive");
  if (c > cfg.c_noesc)
    throw ConfigError("frame speed exceeds the no-escape bound");
  if (r_init < 2.0 * cfg.r_sc)
    throw ConfigError("frame entry radius must be at least 2 r_sc");

  TravelingFrameConfig tf;
  tf.c = c;
  tf.t_init = t_init;
  tf.r_init = r_init;
  tf.xi_cut = xi_cut;
  tf.kappa = std::min(0.25, cfg.lambda_min / (16.0 * (cfg.c_noesc + 1.0)));
  tf.c_cut = std::min(cfg.lambda_min / (8.0 * cfg.lambda_max),
                      cfg.lambda_min / (8.0 * (cfg.c_noesc + 1.0)));
  tf.w_en = std::min(cfg.w_en0, 1.0 / ((cfg.c_noesc + 1.0) * (cfg.c_noesc + 1.0)));

  const double tol = 1e-12;
  const double ck = c + tf.kappa;
  if (tf.c_cut * ck * tf.w_en / 2.0 > 0.125 + tol)
    throw ConfigError("frame weight inequality failed: c_cut (c+kappa) w_en / 2 > 1/8");
  if (tf.w_en * (ck + 0.5) * (ck + 0.5) / 4.0 > 0.125 + tol)
    throw ConfigError("frame weight inequality failed: w_en (c+kappa+1/2)^2 / 4 > 1/8");
  if (tf.w_en * tf.c_cut * ck > cfg.lambda_min / (8.0 * cfg.lambda_max) + tol)
    throw ConfigError(
        "frame weight inequality failed: w_en c_cut (c+kappa) > lambda_min/(8 lambda_max)");
  if ((tf.c_cut + tf.kappa) * ck / 2.0 > cfg.lambda_min / 16.0 + tol)
    throw ConfigError(
        "frame weight inequality failed: (c_cut+kappa)(c+kappa)/2 > lambda_min/16");
  return tf;
}

double frame_chi(const TravelingFrameConfig& tf, const FirewallConfig& cfg,
                 double rho, double s) {
  const double j1 = -tf.r_init - tf.c * s + cfg.r_sc;
  const double j2 = tf.xi_cut + tf.c_cut * s;
  if (rho >= j2) return std::exp((tf.c + tf.kappa) * j2 - tf.kappa * rho);
  double w = std::exp(tf.c * rho);
  if (rho < j1 && cfg.d > 1) {
    const double r = tf.r_init + tf.c * s + rho;
    w *= std::pow(std::max(0.0, r) / cfg.r_sc, cfg.d - 1);
  }
  return w;
}

double frame_psi(const TravelingFrameConfig& tf, const FirewallConfig& cfg,
                 double rho, double s) {
  const double j1 = -tf.r_init - tf.c * s + cfg.r_sc;
  const double j2 = tf.xi_cut + tf.c_cut * s;
  if (rho >= j2) return std::exp((tf.c + tf.kappa) * j2 - tf.kappa * rho);
  double w = std::exp((tf.c + tf.kappa) * rho - tf.kappa * j2);
  if (rho < j1 && cfg.d > 1) {
    const double r = tf.r_init + tf.c * s + rho;
    w *= std::pow(std::max(0.0, r) / cfg.r_sc, cfg.d - 1);
  }
  return w;
}

FrameRecord traveling_frame_sample(const RadialField& field,
                                   const TravelingFrameConfig& tf,
                                   const FirewallConfig& cfg,
                                   const PotentialSpec& spec) {
  const int nn = field.grid.n_nodes;
  const int n = field.n;
  const double dr = field.grid.dr();
  const double s = field.time - tf.t_init;

  std::vector<double> ut(static_cast<size_t>(n) * nn);
  semi_discrete_rhs(field, spec, ut);

  std::vector<double> e(nn), dnode(nn), fnode(nn), u(n);
  for (int k = 0; k < nn; ++k) {
    const double rho = field.grid.r(k) - tf.r_init - tf.c * s;
    const double chi = frame_chi(tf, cfg, rho, s);
    const double psi = frame_psi(tf, cfg, rho, s);
    for (int j = 0; j < n; ++j) u[j] = field.comp(j)[k];
    const double en = 0.5 * deriv_sq_at(field, k) + spec.value(u) - cfg.v_ref;
    const double a = amp_at(field, cfg.m_ref, k);

    double vs2 = 0;
    for (int j = 0; j < n; ++j) {
      auto c = field.comp(j);
      double urj;
      if (k == 0)
        urj = 0.0;
      else if (k == nn - 1)
        urj = (c[nn - 1] - c[nn - 2]) / dr;
      else
        urj = (c[k + 1] - c[k - 1]) / (2.0 * dr);
      const double vs = ut[static_cast<size_t>(j) * nn + k] + tf.c * urj;
      vs2 += vs * vs;
    }

    e[k] = chi * en;
    dnode[k] = chi * vs2;
    fnode[k] = psi * (tf.w_en * en + 0.5 * a * a);
  }

  FrameRecord rec;
  rec.s = s;
  rec.energy = num::trapezoid(e, dr);
  rec.dissipation = num::trapezoid(dnode, dr);
  rec.firewall = num::trapezoid(fnode, dr);
  return rec;
}

TravelingFrameSeries::TravelingFrameSeries(TravelingFrameConfig tf,
                                           FirewallConfig cfg,
                                           PotentialSpec spec)
    : tf_(tf), cfg_(std::move(cfg)), spec_(std::move(spec)) {}

void TravelingFrameSeries::observe(const RadialField& field) {
  if (field.time < tf_.t_init) return;
  series_.push_back(traveling_frame_sample(field, tf_, cfg_, spec_));
}

void TravelingFrameSeries::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "s,E,D,F\n";
  for (const auto& r : series_)
    out << num::fmt17(r.s) << "," << num::fmt17(r.energy) << ","
        << num::fmt17(r.dissipation) << "," << num::fmt17(r.firewall) << "\n";
}

// ---- standing frame ----

StandingFrameConfig make_standing_frame_config(const FirewallConfig& cfg,
                                               const PotentialSpec& spec,
                                               double c_hom, double c_left,
                                               double c_cut, double c_right,
                                               const AnalysisOptions& opts) {
  if (!(c_hom > 0)) throw ConfigError("homogenization speed must be positive");
  if (!(0 < c_left && c_left <= c_cut && c_cut <= c_right && c_right < c_hom))
    throw ConfigError(
        "standing frame speeds must satisfy 0 < c_left <= c_cut <= c_right < c_hom");

  StandingFrameConfig sf;
  sf.c_hom = c_hom;
  sf.c_left = c_left;
  sf.c_cut = c_cut;
  sf.c_right = c_right;
  sf.kappa_t = std::min({0.5, cfg.lambda_min / (8.0 * cfg.lambda_max * c_hom),
                         cfg.lambda_min / (4.0 * (1.0 + c_hom))});

  // pollution constant: the same ball scan as k_f0 with the standing-frame
  // reaction terms and no unit offset
  const int n = spec.n;
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
      u[i] = -cfg.r_att + 2.0 * cfg.r_att * k / static_cast<double>(per_axis - 1);
      uu += u[i] * u[i];
    }
    if (uu > cfg.r_att * cfg.r_att) continue;
    const double vu = spec.value(u);
    spec.gradient(u, g);
    for (const auto& m : cfg.minima) {
      double d2 = 0, dg = 0;
      for (int i = 0; i < n; ++i) {
        d2 += (u[i] - m.location[i]) * (u[i] - m.location[i]);
        dg += (u[i] - m.location[i]) * g[i];
      }
      const double dv = vu - m.value;
      const double expr = cfg.nu_f0 * (cfg.w_en0 * dv + 0.5 * d2) - dg +
                          cfg.lambda_min / (8.0 * cfg.lambda_max) * std::abs(dv) +
                          cfg.lambda_min / 8.0 * d2;
      worst = std::max(worst, expr);
    }
  }
  sf.t_kf = worst;
  return sf;
}

double standing_chi(const StandingFrameConfig& sf, int d, double r, double t) {
  const double poly = d > 1 ? std::pow(r, d - 1) : 1.0;
  const double edge = sf.c_cut * t;
  if (r <= edge) return poly;
  return poly * std::exp(-sf.kappa_t * (r - edge));
}

double standing_psi(const StandingFrameConfig& sf, int d, double r, double t) {
  const double poly = d > 1 ? std::pow(r, d - 1) : 1.0;
  const double left = sf.c_left * t, right = sf.c_right * t;
  if (r < left) return poly * std::exp(-sf.kappa_t * (left - r));
  if (r > right) return poly * std::exp(-sf.kappa_t * (r - right));
  return poly;
}

double standing_firewall(const RadialField& field,
                         const StandingFrameConfig& sf,
                         const FirewallConfig& cfg, const PotentialSpec& spec) {
  const int nn = field.grid.n_nodes;
  std::vector<double> q =
      firewall_integrand(field, spec, cfg.w_en0, cfg.m_ref, cfg.v_ref);
  for (int k = 0; k < nn; ++k)
    q[k] *= standing_psi(sf, field.grid.d, field.grid.r(k), field.time);
  return num::trapezoid(q, field.grid.dr());
}

double standing_pollution(const RadialField& field,
                          const StandingFrameConfig& sf,
                          const FirewallConfig& cfg) {
  const double dr = field.grid.dr();
  const double t = field.time;
  double total = 0;
  for (const auto& iv : escape_set(field, cfg.m_ref, cfg.d_esc)) {
    auto P = [&](double r) { return standing_psi(sf, field.grid.d, r, t); };
    const long ks = static_cast<long>(std::ceil(iv.lo / dr));
    const long ke = static_cast<long>(std::floor(iv.hi / dr));
    if (ks > ke) {
      total += 0.5 * (P(iv.lo) + P(iv.hi)) * (iv.hi - iv.lo);
      continue;
    }
    total += 0.5 * (P(iv.lo) + P(ks * dr)) * (ks * dr - iv.lo);
    for (long k = ks; k < ke; ++k)
      total += 0.5 * (P(k * dr) + P((k + 1) * dr)) * dr;
    total += 0.5 * (P(ke * dr) + P(iv.hi)) * (iv.hi - ke * dr);
  }
  return total;
}

// ---- energies and local dissipation ----

double weighted_energy(const RadialField& field, const PotentialSpec& spec,
                       const std::function<double(double)>& weight,
                       double r_lo, double r_hi, double v_m) {
  const int nn = field.grid.n_nodes;
  std::vector<double> q(nn), u(field.n);
  for (int k = 0; k < nn; ++k) {
    for (int j = 0; j < field.n; ++j) u[j] = field.comp(j)[k];
    q[k] = weight(field.grid.r(k)) *
           (0.5 * deriv_sq_at(field, k) + spec.value(u) - v_m);
  }
  return num::trapezoid_window(0.0, field.grid.dr(), q, r_lo, r_hi);
}

double residual_energy(const RadialField& field, const PotentialSpec& spec,
                       double c, double v_m) {
  const double edge = c * field.time;
  if (edge > field.grid.r_max) throw ConfigError("window exceeds domain");
  const int d = field.grid.d;
  return weighted_energy(
      field, spec, [d](double r) { return d > 1 ? std::pow(r, d - 1) : 1.0; },
      0.0, edge, v_m);
}

double delta_dissip(const std::vector<RadialField>& snapshots,
                    const PotentialSpec& spec, double t, double r_esc,
                    double c_esc) {
  if (snapshots.size() < 2) throw ConfigError("too few snapshots for dissipation");
  for (size_t i = 1; i < snapshots.size(); ++i)
    if (snapshots[i].time <= snapshots[i - 1].time)
      throw ConfigError("dissipation snapshots must be time-ordered");
  if (snapshots.front().time > t - 1.0 + 1e-9 ||
      snapshots.back().time < t + 1.0 - 1e-9)
    throw ConfigError("dissipation window not covered by snapshots");

  // (u_t + c_esc u_r)^2 summed over components, per snapshot within the
  // tau window
  struct Slice {
    double tau;
    std::vector<double> q;
  };
  std::vector<Slice> slices;
  for (const auto& f : snapshots) {
    const double tau = f.time - t;
    if (tau < -1.0 - 1e-12 || tau > 1.0 + 1e-12) continue;
    const int nn = f.grid.n_nodes;
    const double dr = f.grid.dr();
    std::vector<double> ut(static_cast<size_t>(f.n) * nn);
    semi_discrete_rhs(f, spec, ut);
    Slice sl;
    sl.tau = tau;
    sl.q.resize(nn);
    for (int k = 0; k < nn; ++k) {
      double s = 0;
      for (int j = 0; j < f.n; ++j) {
        auto c = f.comp(j);
        double urj;
        if (k == 0)
          urj = 0.0;
        else if (k == nn - 1)
          urj = (c[nn - 1] - c[nn - 2]) / dr;
        else
          urj = (c[k + 1] - c[k - 1]) / (2.0 * dr);
        const double v = ut[static_cast<size_t>(j) * nn + k] + c_esc * urj;
        s += v * v;
      }
      sl.q[k] = s;
    }
    slices.push_back(std::move(sl));
  }

  const double dr = snapshots.front().grid.dr();
  auto mass = [&](double eps) {
    const double half = 1.0 / eps;
    std::vector<double> vals(slices.size());
    for (size_t i = 0; i < slices.size(); ++i)
      vals[i] = num::trapezoid_window(0.0, dr, slices[i].q, r_esc - half,
                                      r_esc + half);
    double integral = 0;
    for (size_t i = 1; i < slices.size(); ++i)
      integral += 0.5 * (vals[i - 1] + vals[i]) * (slices[i].tau - slices[i - 1].tau);
    return integral;
  };

  double lo = 1e-9, hi = 1.0;
  if (mass(lo) - lo < 0) return lo;
  while (mass(hi) - hi > 0 && hi < 1e12) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) - mid > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace terralab
