#include "terralab/terrace.hpp"

#include "terralab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "numerics.hpp"

namespace terralab {

namespace {

double dist_to(const RadialField& f, const std::vector<double>& m, int k) {
  double s = 0;
  for (int j = 0; j < f.n; ++j) {
    const double d = f.comp(j)[k] - m[j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<Interface> detect_interfaces(const RadialField& field,
                                         const std::vector<MinimumPoint>& minima,
                                         double d_esc) {
  const int nn = field.grid.n_nodes;

  // nearest-minimum assignment within d_esc/2, else unassigned
  std::vector<int> assign(nn, -1);
  for (int k = 0; k < nn; ++k) {
    double best = 0.5 * d_esc;
    for (size_t i = 0; i < minima.size(); ++i) {
      const double d = dist_to(field, minima[i].location, k);
      if (d <= best) {
        best = d;
        assign[k] = static_cast<int>(i);
      }
    }
  }

  struct Run {
    int start, end, idx;  // nodes [start, end], inclusive
  };
  std::vector<Run> plateaus;
  for (int k = 0; k < nn;) {
    if (assign[k] < 0) {
      ++k;
      continue;
    }
    int e = k;
    while (e + 1 < nn && assign[e + 1] == assign[k]) ++e;
    if (e - k >= 10) plateaus.push_back({k, e, assign[k]});
    k = e + 1;
  }
  if (plateaus.empty() || plateaus.back().end != nn - 1)
    throw SolverError("solution not stable at infinity on the grid");

  // collapse consecutive plateaus on the same state; they bound no interface
  std::vector<Run> distinct;
  for (auto it = plateaus.rbegin(); it != plateaus.rend(); ++it) {
    if (!distinct.empty() && distinct.back().idx == it->idx) continue;
    distinct.push_back(*it);  // outermost first
  }

  std::vector<Interface> out;
  for (size_t p = 0; p + 1 < distinct.size(); ++p) {
    const Run& outer = distinct[p];
    const Run& inner = distinct[p + 1];
    const auto& m_out = minima[outer.idx].location;
    // outermost crossing of |u - m_outer| = d_esc between the plateaus
    bool found = false;
    for (int k = outer.start; k > inner.end; --k) {
      const double a_hi = dist_to(field, m_out, k);
      const double a_lo = dist_to(field, m_out, k - 1);
      if (a_lo >= d_esc && a_hi < d_esc) {
        const double frac = (a_lo - d_esc) / (a_lo - a_hi);
        out.push_back({field.grid.r(k - 1) + frac * field.grid.dr(), inner.idx,
                       outer.idx});
        found = true;
        break;
      }
    }
    if (!found)
      out.push_back({0.5 * (field.grid.r(inner.end) + field.grid.r(outer.start)),
                     inner.idx, outer.idx});
  }
  return out;
}

void reconstruct(const Terrace& terrace, const RadialGrid& grid,
                 std::span<const double> positions_now, std::span<double> out) {
  const int q = terrace.q;
  const int n = terrace.chain.empty() ? 1
              : static_cast<int>(terrace.chain[0].location.size());
  const int nn = grid.n_nodes;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < nn; ++k) {
      double v = terrace.chain[q].location[j];
      for (int i = 0; i < q; ++i)
        v += terrace.fronts[i].eval(j, grid.r(k) - positions_now[i]) -
             terrace.chain[i + 1].location[j];
      out[static_cast<size_t>(j) * nn + k] = v;
    }
}

double sup_error(const RadialField& field, const Terrace& terrace,
                 std::span<const double> positions_now, double eps_t) {
  const int nn = field.grid.n_nodes;
  std::vector<double> recon(static_cast<size_t>(field.n) * nn);
  reconstruct(terrace, field.grid, positions_now, recon);
  double sup = 0;
  for (int k = 0; k < nn; ++k) {
    if (field.grid.r(k) < eps_t) continue;
    double s = 0;
    for (int j = 0; j < field.n; ++j) {
      const double d = field.comp(j)[k] - recon[static_cast<size_t>(j) * nn + k];
      s += d * d;
    }
    sup = std::max(sup, std::sqrt(s));
  }
  return sup;
}

TerraceFit fit_terrace(const std::vector<RadialField>& snapshots,
                       const PotentialSpec& spec,
                       const PotentialAnalysis& analysis,
                       const FitOptions& opts) {
  const bool whole = opts.t_a == 0 && opts.t_b == 0;
  std::vector<const RadialField*> win;
  for (const auto& f : snapshots)
    if (whole || (f.time >= opts.t_a && f.time <= opts.t_b)) win.push_back(&f);
  if (win.size() < 20) throw SolverError("too few samples");

  std::vector<std::vector<Interface>> per_time;
  per_time.reserve(win.size());
  for (const auto* f : win)
    per_time.push_back(detect_interfaces(*f, analysis.minima, analysis.d_esc));

  const size_t q = per_time.front().size();
  for (const auto& ifs : per_time)
    if (ifs.size() != q)
      throw SolverError("terrace not yet formed; extend t_b");
  if (q == 0) throw SolverError("terrace not yet formed; extend t_b");
  for (const auto& ifs : per_time)
    for (size_t i = 0; i < q; ++i)
      if (ifs[i].inner_minimum != per_time.front()[i].inner_minimum ||
          ifs[i].outer_minimum != per_time.front()[i].outer_minimum)
        throw SolverError("terrace not yet formed; extend t_b");

  TerraceFit fit;
  Terrace& tr = fit.terrace;
  tr.q = static_cast<int>(q);
  tr.chain.push_back(analysis.minima[per_time.front()[0].outer_minimum]);
  for (size_t i = 0; i < q; ++i)
    tr.chain.push_back(analysis.minima[per_time.front()[i].inner_minimum]);

  tr.times.resize(win.size());
  for (size_t s = 0; s < win.size(); ++s) tr.times[s] = win[s]->time;
  tr.positions.assign(q, std::vector<double>(win.size()));
  for (size_t s = 0; s < win.size(); ++s)
    for (size_t i = 0; i < q; ++i) tr.positions[i][s] = per_time[s][i].position;

  // regression over the last half of the covered window
  const double t_mid = 0.5 * (tr.times.front() + tr.times.back());
  for (size_t i = 0; i < q; ++i) {
    const auto est =
        speed_estimate(tr.times, tr.positions[i], t_mid, tr.times.back());
    tr.speeds.push_back(est.slope);
    tr.speed_err.push_back(est.stderr_slope);
  }

  FrontSolveOptions fopts;
  for (size_t i = 0; i < q; ++i) {
    FrontProfile p =
        solve_bistable_front(spec, tr.chain[i + 1], tr.chain[i],
                             opts.front_bracket_lo, opts.front_bracket_hi, fopts);
    tr.fronts.push_back(normalize_front(p, analysis.d_esc));
  }

  FitReport& rep = fit.report;
  rep.count_stable = true;
  rep.chain_ordered = true;
  for (size_t i = 0; i + 1 < tr.chain.size(); ++i)
    if (tr.chain[i].value <= tr.chain[i + 1].value) rep.chain_ordered = false;
  rep.speeds_positive =
      std::all_of(tr.speeds.begin(), tr.speeds.end(), [](double c) { return c > 0; });
  rep.speeds_ordered = true;
  for (size_t i = 0; i + 1 < q; ++i)
    if (tr.speeds[i] - tr.speeds[i + 1] <
        -2.0 * (tr.speed_err[i] + tr.speed_err[i + 1]))
      rep.speeds_ordered = false;
  rep.separations_increasing = true;
  for (size_t s = 1; s < win.size(); ++s) {
    if (tr.times[s] < t_mid || tr.times[s - 1] < t_mid) continue;
    for (size_t i = 0; i + 1 < q; ++i) {
      const double sep_now = tr.positions[i][s] - tr.positions[i + 1][s];
      const double sep_prev = tr.positions[i][s - 1] - tr.positions[i + 1][s - 1];
      if (sep_now <= sep_prev) rep.separations_increasing = false;
    }
  }

  const double c_min = *std::min_element(tr.speeds.begin(), tr.speeds.end());
  for (int e = 0; e < 3; ++e) rep.epsilons[e] = opts.eps_factors[e] * c_min;
  rep.times = tr.times;
  std::vector<double> pos_now(q);
  for (size_t s = 0; s < win.size(); ++s) {
    for (size_t i = 0; i < q; ++i) pos_now[i] = tr.positions[i][s];
    std::array<double, 3> errs{};
    for (int e = 0; e < 3; ++e)
      errs[e] = sup_error(*win[s], tr, pos_now, rep.epsilons[e] * tr.times[s]);
    rep.sup_errors.push_back(errs);
  }
  return fit;
}

std::string terrace_to_json(const TerraceFit& fit) {
  nlohmann::json j;
  const Terrace& tr = fit.terrace;
  j["q"] = tr.q;
  j["minima_chain"] = nlohmann::json::array();
  for (const auto& m : tr.chain) {
    nlohmann::json jm;
    jm["location"] = m.location;
    jm["value"] = m.value;
    j["minima_chain"].push_back(jm);
  }
  j["speeds"] = tr.speeds;
  j["speed_err"] = tr.speed_err;
  j["front_speeds"] = nlohmann::json::array();
  for (const auto& f : tr.fronts) j["front_speeds"].push_back(f.speed);
  j["position_series"] = nlohmann::json::object();
  j["position_series"]["t"] = tr.times;
  for (size_t i = 0; i < tr.positions.size(); ++i)
    j["position_series"]["r_" + std::to_string(i + 1)] = tr.positions[i];
  nlohmann::json jr;
  jr["epsilons"] = fit.report.epsilons;
  jr["count_stable"] = fit.report.count_stable;
  jr["chain_ordered"] = fit.report.chain_ordered;
  jr["speeds_positive"] = fit.report.speeds_positive;
  jr["speeds_ordered"] = fit.report.speeds_ordered;
  jr["separations_increasing"] = fit.report.separations_increasing;
  jr["t"] = fit.report.times;
  jr["sup_errors"] = fit.report.sup_errors;
  j["fit_report"] = jr;
  return j.dump(2) + "\n";
}

void write_fit_report_csv(const FitReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "t,sup_err_eps1,sup_err_eps2,sup_err_eps3\n";
  for (size_t s = 0; s < report.times.size(); ++s)
    out << num::fmt17(report.times[s]) << "," << num::fmt17(report.sup_errors[s][0])
        << "," << num::fmt17(report.sup_errors[s][1]) << ","
        << num::fmt17(report.sup_errors[s][2]) << "\n";
}

void write_positions_csv(const Terrace& terrace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "t";
  for (int i = 1; i <= terrace.q; ++i) out << ",r_" << i;
  out << "\n";
  for (size_t s = 0; s < terrace.times.size(); ++s) {
    out << num::fmt17(terrace.times[s]);
    for (int i = 0; i < terrace.q; ++i)
      out << "," << num::fmt17(terrace.positions[i][s]);
    out << "\n";
  }
}

}  // namespace terralab
